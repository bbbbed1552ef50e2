"""Uniform rectangular antenna arrays and their frequency-dependent responses.

Element locations are stored in units of half the carrier wavelength.  The
response on subcarrier k uses the per-subcarrier wavelength, so the wideband
phase progression across the band is retained instead of being approximated
at the carrier.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_BORESIGHTS = ("+x", "-x", "+y", "-y", "+z", "-z")


@dataclass(frozen=True)
class AntennaArray:
    """Antenna element layout.

    locations: (N, 3) element offsets in half carrier wavelengths, phase
    reference at the centroid.  boresight: axis the panel faces.
    """

    locations: np.ndarray
    boresight: str = "+z"

    def __post_init__(self):
        loc = np.atleast_2d(np.asarray(self.locations, dtype=float))
        if loc.ndim != 2 or loc.shape[1] != 3 or loc.shape[0] < 1:
            raise ValueError("locations must be an (N, 3) matrix with N >= 1")
        if not np.all(np.isfinite(loc)):
            raise ValueError("element locations must be finite")
        if self.boresight not in _BORESIGHTS:
            raise ValueError(f"boresight must be one of {_BORESIGHTS}")
        object.__setattr__(self, "locations", loc)

    @property
    def n_elements(self) -> int:
        return self.locations.shape[0]


def boresight_angles(boresight: str) -> tuple[float, float]:
    """(theta, phi) of a boresight axis label."""
    table = {
        "+x": (np.pi / 2, 0.0),
        "-x": (np.pi / 2, np.pi),
        "+y": (np.pi / 2, np.pi / 2),
        "-y": (np.pi / 2, -np.pi / 2),
        "+z": (0.0, 0.0),
        "-z": (np.pi, 0.0),
    }
    return table[boresight]


def build_ura(nx: int, ny: int, boresight: str = "+z") -> AntennaArray:
    """Uniform rectangular array on a half-wavelength grid.

    The nx-by-ny grid lies in the plane orthogonal to ``boresight`` and is
    centered so the centroid (phase reference) sits at the origin.
    """
    if nx < 1 or ny < 1:
        raise ValueError("grid dimensions must be >= 1")
    g1 = np.arange(nx) - (nx - 1) / 2.0
    g2 = np.arange(ny) - (ny - 1) / 2.0
    t1, t2 = np.meshgrid(g1, g2, indexing="ij")
    t1 = t1.ravel()
    t2 = t2.ravel()
    zeros = np.zeros_like(t1)
    axis = boresight[1]
    if axis == "x":
        loc = np.column_stack([zeros, t1, t2])
    elif axis == "y":
        loc = np.column_stack([t1, zeros, t2])
    else:
        loc = np.column_stack([t1, t2, zeros])
    return AntennaArray(loc, boresight)


def unit_direction(theta: float, phi: float) -> np.ndarray:
    """Unit vector toward polar angle theta (from +z) and azimuth phi."""
    st = np.sin(theta)
    return np.array([np.cos(phi) * st, np.sin(phi) * st, np.cos(theta)])


def unit_direction_derivatives(theta: float, phi: float) -> tuple[np.ndarray, np.ndarray]:
    """Partial derivatives of :func:`unit_direction` w.r.t. theta and phi."""
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    du_dtheta = np.array([cp * ct, sp * ct, -st])
    du_dphi = np.array([-sp * st, cp * st, 0.0])
    return du_dtheta, du_dphi


def response_grid(array: AntennaArray, theta: float, phi: float,
                  wavelengths: np.ndarray, carrier_wavelength: float,
                  derivatives: bool = False):
    """Unit-norm steering vectors for a direction, over many wavelengths.

    Element phases are -(2 pi / lambda_k) * (carrier_wavelength / 2) * <L_i, u>,
    i.e. the half-wavelength grid is fixed at the carrier while the phase uses
    the per-subcarrier wavelength.  Returns an array of shape (K, N); with
    ``derivatives=True`` also the analytic theta/phi derivative grids.
    """
    wavelengths = np.atleast_1d(np.asarray(wavelengths, dtype=float))
    if np.any(wavelengths <= 0.0) or carrier_wavelength <= 0.0:
        raise ValueError("wavelengths must be positive")
    u = unit_direction(theta, phi)
    proj = array.locations @ u                       # (N,), half-wavelength units
    ratio = carrier_wavelength / wavelengths         # (K,)
    n = array.n_elements
    phase = -np.pi * np.outer(ratio, proj)           # (K, N)
    a = np.exp(1j * phase) / np.sqrt(n)
    if not derivatives:
        return a
    du_dth, du_dph = unit_direction_derivatives(theta, phi)
    proj_th = array.locations @ du_dth
    proj_ph = array.locations @ du_dph
    fac = -1j * np.pi * ratio[:, None]
    da_dth = a * (fac * proj_th[None, :])
    da_dph = a * (fac * proj_ph[None, :])
    return a, da_dth, da_dph


def response(array: AntennaArray, theta: float, phi: float,
             wavelength: float, carrier_wavelength: float) -> np.ndarray:
    """Single unit-norm steering vector (length N)."""
    return response_grid(array, theta, phi, np.array([wavelength]),
                         carrier_wavelength)[0]


def response_derivatives(array: AntennaArray, theta: float, phi: float,
                         wavelength: float, carrier_wavelength: float
                         ) -> tuple[np.ndarray, np.ndarray]:
    """Analytic angle derivatives of :func:`response`."""
    _, da_dth, da_dph = response_grid(array, theta, phi, np.array([wavelength]),
                                      carrier_wavelength, derivatives=True)
    return da_dth[0], da_dph[0]
