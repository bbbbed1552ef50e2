"""Fisher information of the per-anchor channel parameters.

Two independent routes exist for the 5G matrix: :func:`fim_5g_closed`
evaluates the analytic entry formulas (steering-vector derivatives chained
through the beamformed pilot products), while :func:`fim_5g_numeric`
differentiates the noise-free received grid by central differences and
assembles the same sum.  The two must agree; the numeric route is the
validation oracle for the closed form.

The satellite matrix is diagonal in (biased TOA, Doppler) with entries
driven by the signal's effective squared bandwidth and effective squared
time (centered observation window).

Carrier-to-noise-density ratios are the only power inputs anywhere; the
noise density never appears on its own.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import arrays
from .errors import QuadratureError, SingularCombinerError
from .geometry import ChannelParams5G
from .waveform import (BeamformingConfig, OfdmConfig, PilotSet,
                       apply_ici, apply_ici_derivative, ici_weights)

PARAMS_5G = ("theta_tx", "phi_tx", "theta_rx", "phi_rx", "tau_b", "doppler")
PARAMS_GNSS = ("tau_b", "doppler")

# gram-matrix condition number beyond which the combiner is rejected
_COMBINER_COND_LIMIT = 1e12


@dataclass(frozen=True)
class Fim:
    """Real symmetric information matrix with parameter labels."""

    values: np.ndarray
    labels: tuple[str, ...]

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] != len(self.labels):
            raise ValueError("FIM must be square with one label per row")
        object.__setattr__(self, "values", v)

    def validate(self, rtol: float = 1e-9) -> None:
        """Assert symmetry and positive semidefiniteness (within tolerance)."""
        v = self.values
        scale = max(np.abs(v).max(), 1.0)
        if np.abs(v - v.T).max() > rtol * scale:
            raise ValueError("information matrix is not symmetric")
        eig = np.linalg.eigvalsh(0.5 * (v + v.T))
        floor = -rtol * max(np.trace(v), 1.0)
        if eig.min() < floor:
            raise ValueError(f"information matrix has negative eigenvalue {eig.min():.3e}")


@dataclass(frozen=True)
class Power5GConfig:
    """Received power of one base-station link as a C/N0 ratio in dB-Hz."""

    pn0_db_hz: float

    @property
    def ratio(self) -> float:
        return 10.0 ** (self.pn0_db_hz / 10.0)


@dataclass(frozen=True)
class Link5G:
    """Everything needed to evaluate one base-station downlink."""

    ofdm: OfdmConfig
    tx_array: arrays.AntennaArray
    rx_array: arrays.AntennaArray
    beams: BeamformingConfig
    pilots: PilotSet
    power: Power5GConfig

    def __post_init__(self):
        m, k, s = self.pilots.symbols.shape
        if (m, k, s) != (self.ofdm.n_symbols, self.ofdm.n_subcarriers,
                         self.ofdm.n_streams):
            raise ValueError("pilot tensor shape does not match the OFDM config")

    @property
    def per_sample_snr(self) -> float:
        """SNR of one subcarrier-symbol sample before array gain.

        The carrier-to-noise-density ratio is referred to the occupied
        bandwidth K * delta_f (equivalently, each of the K simultaneous
        subcarriers collects energy P * T_s / K per symbol), which keeps the
        5G and GNSS information commensurable.
        """
        cfg = self.ofdm
        return self.power.ratio * cfg.symbol_duration / cfg.n_subcarriers

    @property
    def snr_scale(self) -> float:
        """Per-sample information weight including the array-size factors."""
        return (self.per_sample_snr
                * self.tx_array.n_elements * self.rx_array.n_elements)


def _beam_grams(link: Link5G) -> list[np.ndarray]:
    """Inverse Gram matrices (W^H W)^-1 for each analog beam."""
    grams = []
    for b in range(link.beams.n_beams):
        w = link.beams.receive_matrix(b + 1)
        gram = w.conj().T @ w
        if np.linalg.cond(gram) > _COMBINER_COND_LIMIT:
            raise SingularCombinerError(f"combiner Gram matrix singular for beam {b}")
        grams.append(np.linalg.inv(gram))
    return grams


def _symbols_by_beam(link: Link5G) -> list[np.ndarray]:
    """1-based symbol indices grouped by analog beam."""
    m_all = np.arange(1, link.ofdm.n_symbols + 1)
    return [m_all[(m_all - 1) % link.beams.n_beams == b]
            for b in range(link.beams.n_beams)]


def fim_5g_closed(link: Link5G, eta: ChannelParams5G) -> Fim:
    """Closed-form 6x6 Fisher information of one base-station link.

    Every entry reduces to gamma0 * sum_(k,m) Re{ conj(s_a) s_b R_ab } where
    s are transmit-side scalars (pilot/beam projections of the steering
    vector or its derivative, delay ramp, Doppler ramp) and R are
    receive-side quadratic forms through the combiner projection.
    """
    cfg = link.ofdm
    k_idx = cfg.subcarrier_indices()
    lam_k = cfg.subcarrier_wavelengths()
    lam_c = cfg.wavelength
    a_tx, da_tx_th, da_tx_ph = arrays.response_grid(
        link.tx_array, eta.theta_tx, eta.phi_tx, lam_k, lam_c, derivatives=True)
    a_rx, da_rx_th, da_rx_ph = arrays.response_grid(
        link.rx_array, eta.theta_rx, eta.phi_rx, lam_k, lam_c, derivatives=True)

    grams = _beam_grams(link)
    groups = _symbols_by_beam(link)
    offsets, weights = ici_weights(cfg.n_subcarriers, cfg.ici_halfwidth)

    alpha_f = -2j * np.pi * cfg.subcarrier_spacing
    t_sym = cfg.symbol_duration
    t_tot = cfg.total_symbol_duration
    # map each parameter to its receive-side vector: a_rx or a derivative
    vmap = np.array([0, 0, 1, 2, 0, 0])

    acc = np.zeros((6, 6), dtype=complex)
    for b in range(link.beams.n_beams):
        m_list = groups[b]
        if m_list.size == 0:
            continue
        f_mat = link.beams.transmit_matrix(b + 1)
        w_mat = link.beams.receive_matrix(b + 1)
        # transmit-side projections, (K, N_s)
        qg0 = a_tx.conj() @ f_mat
        qgt = da_tx_th.conj() @ f_mat
        qgp = da_tx_ph.conj() @ f_mat
        # receive-side quadratic forms through the combiner, (3, 3, K)
        pu = np.stack([a_rx @ w_mat.conj(), da_rx_th @ w_mat.conj(),
                       da_rx_ph @ w_mat.conj()])
        r_forms = np.einsum("aks,st,bkt->abk", pu.conj(), grams[b], pu)
        r_exp = r_forms[vmap][:, vmap]

        x_blk = link.pilots.symbols[m_list - 1]                 # (Mb, K, N_s)
        z_blk = apply_ici(x_blk, eta.doppler, t_sym, offsets, weights)
        zd_blk = apply_ici_derivative(x_blk, t_sym, offsets, weights)
        g0 = np.einsum("ks,mks->mk", qg0, z_blk)
        gt = np.einsum("ks,mks->mk", qgt, z_blk)
        gp = np.einsum("ks,mks->mk", qgp, z_blk)
        h0 = np.einsum("ks,mks->mk", qg0, zd_blk)
        ramp = 2j * np.pi * t_tot * m_list[:, None]
        scal = np.stack([gt, gp, g0, g0, (alpha_f * k_idx)[None, :] * g0,
                         ramp * g0 + h0])                       # (6, Mb, K)
        acc += np.einsum("amk,abk,bmk->ab", scal.conj(), r_exp, scal)

    values = link.snr_scale * acc.real
    return Fim(0.5 * (values + values.T), PARAMS_5G)


def mean_grid(link: Link5G, eta: ChannelParams5G) -> np.ndarray:
    """Noise-free received grid, shape (M, K, N_s)."""
    cfg = link.ofdm
    k_idx = cfg.subcarrier_indices()
    lam_k = cfg.subcarrier_wavelengths()
    lam_c = cfg.wavelength
    a_tx = arrays.response_grid(link.tx_array, eta.theta_tx, eta.phi_tx, lam_k, lam_c)
    a_rx = arrays.response_grid(link.rx_array, eta.theta_rx, eta.phi_rx, lam_k, lam_c)
    offsets, weights = ici_weights(cfg.n_subcarriers, cfg.ici_halfwidth)
    amp = np.sqrt(link.snr_scale)
    delay_ramp = np.exp(-2j * np.pi * k_idx * cfg.subcarrier_spacing * eta.tau_b)

    out = np.empty((cfg.n_symbols, cfg.n_subcarriers, cfg.n_streams), dtype=complex)
    for b, m_list in enumerate(_symbols_by_beam(link)):
        if m_list.size == 0:
            continue
        f_mat = link.beams.transmit_matrix(b + 1)
        w_mat = link.beams.receive_matrix(b + 1)
        qg0 = a_tx.conj() @ f_mat                                # (K, N_s)
        pu0 = a_rx @ w_mat.conj()                                # (K, N_s)
        x_blk = link.pilots.symbols[m_list - 1]
        z_blk = apply_ici(x_blk, eta.doppler, cfg.symbol_duration, offsets, weights)
        tx_scal = np.einsum("ks,mks->mk", qg0, z_blk)
        doppler_ramp = np.exp(2j * np.pi * eta.doppler
                              * cfg.total_symbol_duration * m_list)
        kappa = amp * doppler_ramp[:, None] * delay_ramp[None, :]
        out[m_list - 1] = (kappa * tx_scal)[:, :, None] * pu0[None, :, :]
    return out


def _default_steps(cfg: OfdmConfig) -> dict[str, float]:
    # delay step is a fixed fraction of the delay resolution 1/(K * df)
    delay_res = 1.0 / (cfg.n_subcarriers * cfg.subcarrier_spacing)
    return {"angle": 1e-6, "delay": 1.25e-4 * delay_res, "doppler": 1e-3}


def _perturbed(eta: ChannelParams5G, index: int, delta: float) -> ChannelParams5G:
    vals = list(eta.as_array())
    vals[index] += delta
    return ChannelParams5G(*vals)


def fim_5g_numeric(link: Link5G, eta: ChannelParams5G,
                   steps: dict[str, float] | None = None,
                   refine_threshold: float = 1e-4) -> Fim:
    """Finite-difference 6x6 Fisher information (the oracle route).

    Central differences of the full received grid per parameter, with one
    Richardson refinement whenever the full-step and half-step derivative
    estimates disagree by more than ``refine_threshold`` (relative).
    """
    cfg = link.ofdm
    steps = steps or _default_steps(cfg)
    step_sizes = [steps["angle"]] * 4 + [steps["delay"], steps["doppler"]]

    derivs = []
    for i, h in enumerate(step_sizes):
        d_full = (mean_grid(link, _perturbed(eta, i, h))
                  - mean_grid(link, _perturbed(eta, i, -h))) / (2.0 * h)
        d_half = (mean_grid(link, _perturbed(eta, i, 0.5 * h))
                  - mean_grid(link, _perturbed(eta, i, -0.5 * h))) / h
        scale = np.linalg.norm(d_half.ravel())
        if scale > 0 and np.linalg.norm((d_full - d_half).ravel()) > refine_threshold * scale:
            derivs.append((4.0 * d_half - d_full) / 3.0)
        else:
            derivs.append(d_half)

    grams = _beam_grams(link)
    groups = _symbols_by_beam(link)
    values = np.zeros((6, 6))
    for b, m_list in enumerate(groups):
        if m_list.size == 0:
            continue
        idx = m_list - 1
        for a in range(6):
            da = derivs[a][idx]
            for c in range(a, 6):
                dc = derivs[c][idx]
                val = np.einsum("mks,st,mkt->", da.conj(), grams[b], dc).real
                values[a, c] += val
                values[c, a] += val * (a != c)
    return Fim(values, PARAMS_5G)


@dataclass(frozen=True)
class SampledPulse:
    """Piecewise-constant chip pulse over [0, T_c), given as an amplitude table."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 1 or s.size < 1 or not np.all(np.isfinite(s)):
            raise ValueError("pulse table must be a finite 1-D array")
        if np.allclose(s, 0.0):
            raise ValueError("pulse table cannot be identically zero")
        object.__setattr__(self, "samples", s)


@dataclass(frozen=True)
class GnssSignalConfig:
    """Satellite ranging-signal parameters (L1-style PN code)."""

    cn0_db_hz: float
    bandwidth: float                      # W, Hz
    chip_duration: float                  # T_c, s
    n_chips: int                          # chips per observation
    pulse: str | SampledPulse = "rectangular"

    def __post_init__(self):
        if self.bandwidth <= 0.0 or self.chip_duration <= 0.0 or self.n_chips < 1:
            raise ValueError("bandwidth, chip duration and chip count must be positive")
        if isinstance(self.pulse, str) and self.pulse != "rectangular":
            raise ValueError(f"unknown pulse shape {self.pulse!r}")

    @property
    def observation_time(self) -> float:
        return self.n_chips * self.chip_duration

    @property
    def power_ratio(self) -> float:
        return 10.0 ** (self.cn0_db_hz / 10.0)


def effective_bandwidth_sq(cfg: GnssSignalConfig) -> float:
    """Squared effective bandwidth in Hz^2.

    Rectangular pulses use the closed form W^2 / (2 pi^2); sampled pulses
    integrate f^2 |R(f)|^2 / T_c over the receiver band by adaptive
    quadrature, with the pulse scaled to unit average power over the chip.
    """
    if cfg.pulse == "rectangular":
        return cfg.bandwidth ** 2 / (2.0 * np.pi ** 2)
    a = cfg.pulse.samples
    n = a.size
    dt = cfg.chip_duration / n
    # unit average power over the chip: integral of |r|^2 equals T_c
    a = a * np.sqrt(n / np.sum(a ** 2))
    centers = (np.arange(n) + 0.5) * dt

    def integrand(f: float) -> float:
        spectrum = dt * np.sinc(f * dt) * np.sum(a * np.exp(-2j * np.pi * f * centers))
        return f * f * (spectrum.real ** 2 + spectrum.imag ** 2) / cfg.chip_duration

    # |R| is even for a real pulse table, integrate half the band
    val, err = quad(integrand, 0.0, cfg.bandwidth / 2.0, epsrel=1e-8,
                    epsabs=0.0, limit=400)
    if not np.isfinite(val) or (val > 0 and err > 1e-6 * val):
        raise QuadratureError(f"bandwidth integral unreliable (value {val}, error {err})")
    return 2.0 * val


def effective_time_sq(cfg: GnssSignalConfig) -> float:
    """Squared effective time in s^2, centered observation-window convention.

    Rectangular pulses give T_so^2 / 12 exactly.  Sampled pulses evaluate the
    chip-sum definition: averaging (t + l T_c - T_so/2)^2 over chips reduces
    to the quadratic q(t) = t^2 - T_c t + T_c^2 (N^2 + 2) / 12, which is then
    integrated against |r(t)|^2 segment by segment.
    """
    t_so = cfg.observation_time
    if cfg.pulse == "rectangular":
        return t_so ** 2 / 12.0
    a = cfg.pulse.samples
    n_seg = a.size
    dt = cfg.chip_duration / n_seg
    energy = dt * np.sum(a ** 2)
    t_c = cfg.chip_duration
    const = t_c ** 2 * (cfg.n_chips ** 2 + 2) / 12.0
    edges = np.arange(n_seg + 1) * dt

    def q_antideriv(t: np.ndarray) -> np.ndarray:
        return t ** 3 / 3.0 - t_c * t ** 2 / 2.0 + const * t

    seg = q_antideriv(edges[1:]) - q_antideriv(edges[:-1])
    return float(np.sum(a ** 2 * seg) / energy)


def fim_gnss(cfg: GnssSignalConfig) -> Fim:
    """Diagonal 2x2 Fisher information of (biased TOA, Doppler) for one satellite.

    The TOA/Doppler cross term is exactly zero.
    """
    factor = 4.0 * np.pi ** 2 * cfg.power_ratio * cfg.observation_time
    values = np.diag([factor * effective_bandwidth_sq(cfg),
                      factor * effective_time_sq(cfg)])
    return Fim(values, PARAMS_GNSS)
