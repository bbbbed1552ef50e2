"""Coordinate handling and line-of-sight observation equations.

Positions are Cartesian ``[x, y, z]`` in meters (right handed, z up),
velocities in m/s.  The polar angle ``theta`` is measured from the +z axis
and the azimuth ``phi`` from +x toward +y.  Azimuths are always produced by
a two-argument arctangent so that all four quadrants are resolved.

The observation functions map the vehicle state (position, velocity, clock
bias, array heading) to the per-anchor channel parameters: departure/arrival
angles, Doppler shift and biased time of arrival.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoincidentPointsError

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact by definition

# Separations below this (meters) are treated as coincident points.
COINCIDENT_EPS = 1e-6


@dataclass(frozen=True)
class ChannelParams5G:
    """Estimable parameters of one base-station downlink: DOD, DOA, biased TOA, Doppler."""

    theta_tx: float  # departure polar angle at the base station, rad
    phi_tx: float    # departure azimuth, rad
    theta_rx: float  # arrival polar angle in the vehicle array frame, rad
    phi_rx: float    # arrival azimuth in the vehicle array frame, rad
    tau_b: float     # biased time of arrival, s
    doppler: float   # Doppler shift, Hz

    def as_array(self) -> np.ndarray:
        return np.array([self.theta_tx, self.phi_tx, self.theta_rx,
                         self.phi_rx, self.tau_b, self.doppler])


@dataclass(frozen=True)
class ChannelParamsGnss:
    """Estimable parameters of one satellite signal: biased TOA and Doppler."""

    tau_b: float
    doppler: float

    def as_array(self) -> np.ndarray:
        return np.array([self.tau_b, self.doppler])


def wrap_angle(phi: float) -> float:
    """Wrap an angle to (-pi, pi].  Idempotent."""
    return np.pi - (np.pi - phi) % (2.0 * np.pi)


def spherical_to_cartesian(rho: float, theta: float, phi: float) -> np.ndarray:
    """Convert (radius, polar angle from +z, azimuth from +x) to Cartesian.

    Returns ``rho * [cos(phi) sin(theta), sin(phi) sin(theta), cos(theta)]``.
    """
    if not (rho > 0.0):
        raise ValueError(f"spherical radius must be positive, got {rho}")
    if not (0.0 <= theta <= np.pi):
        raise ValueError(f"polar angle must lie in [0, pi], got {theta}")
    st = np.sin(theta)
    return rho * np.array([np.cos(phi) * st, np.sin(phi) * st, np.cos(theta)])


def cartesian_to_spherical(p: np.ndarray) -> tuple[float, float, float]:
    """Inverse of :func:`spherical_to_cartesian`; azimuth in (-pi, pi]."""
    p = np.asarray(p, dtype=float)
    rho = float(np.linalg.norm(p))
    if rho <= 0.0:
        raise ValueError("cannot convert the origin to spherical coordinates")
    theta = float(np.arccos(np.clip(p[2] / rho, -1.0, 1.0)))
    phi = wrap_angle(float(np.arctan2(p[1], p[0])))
    return rho, theta, phi


def separation(p: np.ndarray, p_a: np.ndarray) -> tuple[np.ndarray, float]:
    """Difference vector p - p_a and its norm; rejects coincident points."""
    d = np.asarray(p, dtype=float) - np.asarray(p_a, dtype=float)
    if not np.all(np.isfinite(d)):
        raise ValueError("positions must be finite")
    r = float(np.linalg.norm(d))
    if r < COINCIDENT_EPS:
        raise CoincidentPointsError(
            f"points separated by {r:.3e} m (< {COINCIDENT_EPS:.0e} m)")
    return d, r


def los_angles(p: np.ndarray, p_a: np.ndarray) -> tuple[float, float]:
    """Direction of departure at anchor ``p_a`` toward ``p``.

    theta = arccos((p_z - p_a,z) / ||p - p_a||), phi = atan2(dy, dx).
    """
    d, r = separation(p, p_a)
    theta = float(np.arccos(np.clip(d[2] / r, -1.0, 1.0)))
    phi = wrap_angle(float(np.arctan2(d[1], d[0])))
    return theta, phi


def aoa_angles(p: np.ndarray, p_a: np.ndarray, phi0: float) -> tuple[float, float]:
    """Direction of arrival at the vehicle, in the array frame yawed by ``phi0``.

    The arrival ray points from the vehicle toward the anchor, hence the
    polar angle flips (theta = pi - theta_departure) and the azimuth is
    offset by pi before removing the array heading.
    """
    d, r = separation(p, p_a)
    theta = float(np.arccos(np.clip(-d[2] / r, -1.0, 1.0)))
    phi = wrap_angle(float(np.arctan2(d[1], d[0])) - phi0 - np.pi)
    return theta, phi


def doppler(p: np.ndarray, v: np.ndarray, p_a: np.ndarray, v_a: np.ndarray,
            wavelength: float) -> float:
    """Doppler shift in Hz, positive when the range is closing.

    f_d = -(v - v_a) . (p - p_a) / (wavelength * ||p - p_a||)
    """
    if not (wavelength > 0.0):
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    d, r = separation(p, p_a)
    dv = np.asarray(v, dtype=float) - np.asarray(v_a, dtype=float)
    return float(-np.dot(dv, d) / (wavelength * r))


def biased_toa(p: np.ndarray, p_a: np.ndarray, b_u: float = 0.0,
               f_d: float = 0.0, f_c: float | None = None) -> float:
    """Biased time of arrival (1 + f_d/f_c) * b_u + ||p - p_a|| / c.

    With ``f_d = 0`` this reduces to the common approximation b_u + range/c.
    ``f_c`` is only needed when a nonzero Doppler is supplied.
    """
    _, r = separation(p, p_a)
    if f_d != 0.0:
        if f_c is None or not (f_c > 0.0):
            raise ValueError("carrier frequency required for Doppler-corrected TOA")
        scale = 1.0 + f_d / f_c
    else:
        scale = 1.0
    return scale * b_u + r / SPEED_OF_LIGHT


def channel_params_5g(p: np.ndarray, v: np.ndarray, b_u: float, phi0: float,
                      p_a: np.ndarray, v_a: np.ndarray,
                      carrier_freq: float) -> ChannelParams5G:
    """Evaluate all six 5G observation functions for one base station."""
    lam = SPEED_OF_LIGHT / carrier_freq
    th_tx, ph_tx = los_angles(p, p_a)
    th_rx, ph_rx = aoa_angles(p, p_a, phi0)
    f_d = doppler(p, v, p_a, v_a, lam)
    tau = biased_toa(p, p_a, b_u, f_d, carrier_freq)
    return ChannelParams5G(th_tx, ph_tx, th_rx, ph_rx, tau, f_d)


def channel_params_gnss(p: np.ndarray, v: np.ndarray, b_u: float,
                        p_a: np.ndarray, v_a: np.ndarray,
                        carrier_freq: float) -> ChannelParamsGnss:
    """Evaluate the satellite observation functions (biased TOA, Doppler)."""
    lam = SPEED_OF_LIGHT / carrier_freq
    f_d = doppler(p, v, p_a, v_a, lam)
    tau = biased_toa(p, p_a, b_u, f_d, carrier_freq)
    return ChannelParamsGnss(tau, f_d)
