"""OFDM pilot configuration, beam codebooks and the Doppler ICI operator.

The inter-carrier-interference operator is the circulant matrix
C = j 2 pi f_d T_s S + I, where S is the circulant similarity transform of
diag(-K/2 .. K/2-1) by the unitary DFT.  Its first column has the closed
form s_0 = -1/2 and s_n = (-1)^n / (exp(j 2 pi n / K) - 1) for n != 0, so
columns are produced directly without materializing any K-by-K matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import arrays
from .errors import (DimensionMismatchError, IndexOutOfRangeError,
                     InvalidSectorError)
from .geometry import SPEED_OF_LIGHT, ChannelParams5G


@dataclass(frozen=True)
class OfdmConfig:
    """Downlink OFDM pilot burst parameters.

    ``n_subcarriers`` must be even (the degenerate single-subcarrier case is
    also allowed for diagnostics).  The cyclic prefix only enters through the
    full symbol duration used by the Doppler phase ramp.
    """

    n_subcarriers: int                 # K
    n_symbols: int                     # M
    subcarrier_spacing: float          # Hz
    carrier_freq: float                # Hz
    cp_duration: float = 0.0           # s
    n_beams: int = 16                  # N_b
    n_streams: int = 1                 # N_s
    ici_halfwidth: int = 1             # adjacent subcarriers kept per side

    def __post_init__(self):
        if self.n_subcarriers != 1 and self.n_subcarriers % 2 != 0:
            raise ValueError("subcarrier count must be even (or 1)")
        if self.n_symbols < 1:
            raise ValueError("need at least one OFDM symbol")
        if self.subcarrier_spacing <= 0.0 or self.carrier_freq <= 0.0:
            raise ValueError("subcarrier spacing and carrier must be positive")
        if self.cp_duration < 0.0:
            raise ValueError("cyclic prefix duration cannot be negative")
        if not (1 <= self.n_streams <= self.n_beams):
            raise ValueError("stream count must satisfy 1 <= N_s <= N_b")
        if self.ici_halfwidth < 0:
            raise ValueError("ICI halfwidth cannot be negative")

    @property
    def symbol_duration(self) -> float:
        """Useful symbol duration T_s = 1 / subcarrier spacing."""
        return 1.0 / self.subcarrier_spacing

    @property
    def total_symbol_duration(self) -> float:
        """Symbol duration including the cyclic prefix."""
        return self.symbol_duration + self.cp_duration

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.carrier_freq

    def subcarrier_indices(self) -> np.ndarray:
        """Subcarrier indices k = -K/2 .. K/2-1 (or [0] when K = 1)."""
        if self.n_subcarriers == 1:
            return np.array([0])
        half = self.n_subcarriers // 2
        return np.arange(-half, half)

    def subcarrier_wavelengths(self) -> np.ndarray:
        return SPEED_OF_LIGHT / (self.carrier_freq
                                 + self.subcarrier_indices() * self.subcarrier_spacing)


@dataclass(frozen=True)
class PilotSet:
    """Deterministic pilot symbols, shape (M, K, N_s), unit norm per (k, m)."""

    symbols: np.ndarray
    seed: int

    def __post_init__(self):
        if self.symbols.ndim != 3:
            raise ValueError("pilot tensor must have shape (M, K, N_s)")


def generate_pilots(cfg: OfdmConfig, seed: int) -> PilotSet:
    """Complex-normal pilots with every per-subcarrier vector scaled to unit norm."""
    rng = np.random.default_rng(seed)
    shape = (cfg.n_symbols, cfg.n_subcarriers, cfg.n_streams)
    x = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    x /= np.linalg.norm(x, axis=2, keepdims=True)
    return PilotSet(x, seed)


@dataclass(frozen=True)
class Sector:
    """Angular sector swept by a beam codebook.

    Beams sweep azimuth across ``span`` radians centered on ``center_phi``.
    With ``el_rows > 1`` the sweep becomes a grid: the azimuth beams are
    repeated on ``el_rows`` polar angles spread over ``el_span`` around
    ``center_theta``.
    """

    center_theta: float
    center_phi: float
    span: float
    el_span: float = 0.0
    el_rows: int = 1

    def beam_directions(self, n_beams: int) -> list[tuple[float, float]]:
        """(theta, phi) of each beam; ``n_beams`` must split evenly over rows."""
        if n_beams < 1:
            raise InvalidSectorError("codebook needs at least one beam")
        if self.el_rows < 1 or n_beams % self.el_rows != 0:
            raise InvalidSectorError(
                f"{n_beams} beams cannot form {self.el_rows} elevation rows")
        n_az = n_beams // self.el_rows
        if n_az == 1:
            azimuths = np.array([self.center_phi])
        else:
            if not (self.span > 0.0):
                raise InvalidSectorError(f"sector span must be positive, got {self.span}")
            azimuths = self.center_phi + np.linspace(-0.5, 0.5, n_az) * self.span
        if self.el_rows == 1:
            thetas = np.array([self.center_theta])
        else:
            if not (self.el_span > 0.0):
                raise InvalidSectorError("elevation span must be positive for a beam grid")
            thetas = self.center_theta + np.linspace(-0.5, 0.5, self.el_rows) * self.el_span
        return [(float(th), float(az)) for th in thetas for az in azimuths]


@dataclass(frozen=True)
class BeamformingConfig:
    """Analog steering-vector codebooks plus the round-robin digital schedule.

    Symbol m (1-based) uses beam column (m - 1) mod N_b at both ends; with
    N_s > 1 the digital stage picks N_s cyclically adjacent beams.  Returned
    precoder/combiner matrices are Frobenius-normalized to 1.
    """

    tx_beams: np.ndarray         # (N_tx, N_b)
    rx_beams: np.ndarray         # (N_rx, N_b)
    n_streams: int = 1

    def __post_init__(self):
        if self.tx_beams.shape[1] != self.rx_beams.shape[1]:
            raise DimensionMismatchError("tx and rx codebooks must have equal beam counts")
        if not (1 <= self.n_streams <= self.n_beams):
            raise DimensionMismatchError("stream count exceeds beam count")

    @property
    def n_beams(self) -> int:
        return self.tx_beams.shape[1]

    def beam_index(self, m: int) -> int:
        return (m - 1) % self.n_beams

    def _select(self, beams: np.ndarray, b: int) -> np.ndarray:
        cols = [(b + s) % self.n_beams for s in range(self.n_streams)]
        mat = beams[:, cols]
        return mat / np.linalg.norm(mat)

    def transmit_matrix(self, m: int) -> np.ndarray:
        """Precoder F for symbol m, shape (N_tx, N_s), ||F||_F = 1."""
        return self._select(self.tx_beams, self.beam_index(m))

    def receive_matrix(self, m: int) -> np.ndarray:
        """Combiner W for symbol m, shape (N_rx, N_s), ||W||_F = 1."""
        return self._select(self.rx_beams, self.beam_index(m))


def build_codebook(cfg: OfdmConfig, tx_array: arrays.AntennaArray,
                   rx_array: arrays.AntennaArray, tx_sector: Sector,
                   rx_sector: Sector) -> BeamformingConfig:
    """Steering-vector codebooks sweeping each sector's azimuth range.

    Analog beams are carrier-frequency steering vectors at N_b directions
    uniformly spanning the sector, all at the sector's polar angle.
    """
    lam = cfg.wavelength
    tx_cols = [arrays.response(tx_array, th, az, lam, lam)
               for th, az in tx_sector.beam_directions(cfg.n_beams)]
    rx_cols = [arrays.response(rx_array, th, az, lam, lam)
               for th, az in rx_sector.beam_directions(cfg.n_beams)]
    return BeamformingConfig(np.column_stack(tx_cols), np.column_stack(rx_cols),
                             cfg.n_streams)


def ici_weights(n_subcarriers: int, halfwidth: int) -> tuple[np.ndarray, np.ndarray]:
    """Circulant offsets n and weights s_n of the ICI generator.

    Offsets are limited to ``halfwidth`` on each side of the diagonal and
    deduplicated modulo K, so ``halfwidth = K // 2`` reproduces the full
    (untruncated) operator.
    """
    k = n_subcarriers
    if k == 1:
        return np.array([0]), np.array([0.0 + 0.0j])
    offsets = np.arange(-halfwidth, halfwidth + 1)
    # keep a single representative per residue class mod K
    _, keep = np.unique(np.mod(offsets, k), return_index=True)
    offsets = offsets[np.sort(keep)]
    weights = np.empty(offsets.shape, dtype=complex)
    for i, n in enumerate(offsets):
        if n % k == 0:
            weights[i] = -0.5
        else:
            weights[i] = (-1.0) ** n / (np.exp(2j * np.pi * n / k) - 1.0)
    return offsets, weights


@dataclass(frozen=True)
class IciOperator:
    """Doppler-induced inter-carrier-interference operator, truncated near the diagonal."""

    doppler: float                     # Hz
    symbol_duration: float             # s
    n_subcarriers: int
    halfwidth: int = 1
    _offsets: np.ndarray = field(init=False, repr=False)
    _weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.halfwidth < 0:
            raise ValueError("truncation halfwidth cannot be negative")
        off, w = ici_weights(self.n_subcarriers, self.halfwidth)
        object.__setattr__(self, "_offsets", off)
        object.__setattr__(self, "_weights", w)

    def column(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Sparse column of C for subcarrier k: (row indices, values)."""
        pos = subcarrier_position(k, self.n_subcarriers)
        rows = np.mod(pos + self._offsets, self.n_subcarriers)
        vals = 1j * 2.0 * np.pi * self.doppler * self.symbol_duration * self._weights
        vals = vals + (self._offsets == 0)
        return rows, vals

    def column_derivative(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Sparse column of dC/df_d (identity removed, Doppler factored out)."""
        pos = subcarrier_position(k, self.n_subcarriers)
        rows = np.mod(pos + self._offsets, self.n_subcarriers)
        vals = 1j * 2.0 * np.pi * self.symbol_duration * self._weights
        return rows, vals


def subcarrier_position(k: int, n_subcarriers: int) -> int:
    """Array position of subcarrier index k (k = -K/2 .. K/2-1)."""
    if n_subcarriers == 1:
        if k != 0:
            raise IndexOutOfRangeError(f"subcarrier {k} outside single-carrier config")
        return 0
    half = n_subcarriers // 2
    if not (-half <= k <= half - 1):
        raise IndexOutOfRangeError(
            f"subcarrier {k} outside [-{half}, {half - 1}]")
    return k + half


def apply_ici(pilot_block: np.ndarray, doppler: float, symbol_duration: float,
              offsets: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Transmitted vectors z (pilots mixed with their circulant neighbours).

    ``pilot_block`` has the subcarrier axis second-to-last
    (shapes (K, N_s) or (M, K, N_s)).
    """
    mix = ici_mixture(pilot_block, offsets, weights)
    return pilot_block + 1j * 2.0 * np.pi * doppler * symbol_duration * mix


def apply_ici_derivative(pilot_block: np.ndarray, symbol_duration: float,
                         offsets: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Derivative of z with respect to the Doppler shift."""
    return 1j * 2.0 * np.pi * symbol_duration * ici_mixture(pilot_block, offsets, weights)


def ici_mixture(pilot_block: np.ndarray, offsets: np.ndarray,
                weights: np.ndarray) -> np.ndarray:
    axis = pilot_block.ndim - 2
    mix = np.zeros_like(pilot_block)
    for n, w in zip(offsets, weights):
        mix += w * np.roll(pilot_block, -int(n), axis=axis)
    return mix


def noiseless_mean(eta: ChannelParams5G, k: int, m: int, cfg: OfdmConfig,
                   tx_array: arrays.AntennaArray, rx_array: arrays.AntennaArray,
                   beams: BeamformingConfig, pilots: PilotSet,
                   sample_snr: float) -> np.ndarray:
    """Noise-free received vector on subcarrier k, symbol m (1-based).

    mu = kappa * (W^H a_rx) (a_tx^H F z) with
    |kappa|^2 = sample_snr * N_tx * N_rx, where ``sample_snr`` is the SNR of
    one subcarrier-symbol sample before array gain.  The phase of kappa
    carries the delay ramp across subcarriers and the Doppler ramp across
    symbols.
    """
    if tx_array.n_elements != beams.tx_beams.shape[0]:
        raise DimensionMismatchError("tx array size does not match codebook")
    if rx_array.n_elements != beams.rx_beams.shape[0]:
        raise DimensionMismatchError("rx array size does not match codebook")
    if pilots.symbols.shape[1] != cfg.n_subcarriers:
        raise DimensionMismatchError("pilot set does not match subcarrier count")
    if not (1 <= m <= pilots.symbols.shape[0]):
        raise IndexOutOfRangeError(f"symbol index {m} outside 1..{pilots.symbols.shape[0]}")
    pos = subcarrier_position(k, cfg.n_subcarriers)
    lam_k = cfg.subcarrier_wavelengths()[pos]
    a_tx = arrays.response(tx_array, eta.theta_tx, eta.phi_tx, lam_k, cfg.wavelength)
    a_rx = arrays.response(rx_array, eta.theta_rx, eta.phi_rx, lam_k, cfg.wavelength)
    f_mat = beams.transmit_matrix(m)
    w_mat = beams.receive_matrix(m)
    off, wts = ici_weights(cfg.n_subcarriers, cfg.ici_halfwidth)
    z = apply_ici(pilots.symbols[m - 1], eta.doppler, cfg.symbol_duration, off, wts)[pos]
    amp = np.sqrt(sample_snr * tx_array.n_elements * rx_array.n_elements)
    kappa = amp * np.exp(-1j * 2.0 * np.pi * k * cfg.subcarrier_spacing * eta.tau_b
                         + 1j * 2.0 * np.pi * eta.doppler * cfg.total_symbol_duration * m)
    return kappa * (w_mat.conj().T @ a_rx) * (a_tx.conj() @ f_mat @ z)
