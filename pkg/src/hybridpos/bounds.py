"""State-space information assembly and position/velocity error bounds.

Per-anchor channel-parameter FIMs are pulled back to the 7-dimensional state
(position, velocity, clock bias) through analytic Jacobians of the
observation equations, summed, reduced by a Schur complement over the clock
bias, and inverted to produce the bounds.

Identifiability is judged per quantity: a state FIM may pin down position
while leaving a velocity direction unobserved (e.g. one base station plus
one satellite only yields Doppler along two line-of-sight directions).  Rank
analysis runs on a diagonally equilibrated copy of the matrix so that the
heterogeneous units (seconds vs meters vs m/s) cannot masquerade as rank
deficiency; for estimable quantities the resulting bounds are identical to
the unscaled pseudo-inverse.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateBiasError
from .geometry import SPEED_OF_LIGHT, doppler, separation

STATE_LABELS = ("px", "py", "pz", "vx", "vy", "vz", "clock_bias")

# relative singular-value threshold separating structural rank deficiency
# from mere ill-conditioning
RANK_RTOL = 1e-10

# a unit-norm null-space vector with larger components along a coordinate
# marks that coordinate as unidentifiable
_NULL_COMPONENT_TOL = 1e-8


def _angle_gradients(dp: np.ndarray, r: float) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of the departure polar angle and azimuth w.r.t. position."""
    rho_sq = dp[0] ** 2 + dp[1] ** 2
    rho = np.sqrt(rho_sq)
    if rho < 1e-12 * r:
        raise ValueError("anchor on the vertical axis: azimuth gradient undefined")
    dth = np.array([dp[0] * dp[2], dp[1] * dp[2], -rho_sq]) / (r * r * rho)
    dph = np.array([-dp[1], dp[0], 0.0]) / rho_sq
    return dth, dph


def _doppler_gradients(dp: np.ndarray, dv: np.ndarray, r: float,
                       wavelength: float) -> tuple[np.ndarray, np.ndarray]:
    """Gradients of the Doppler shift w.r.t. position and velocity."""
    dfd_dp = (np.dot(dv, dp) * dp - r * r * dv) / (wavelength * r ** 3)
    dfd_dv = -dp / (wavelength * r)
    return dfd_dp, dfd_dv


def transform_g(p: np.ndarray, v: np.ndarray, b_u: float, p_a: np.ndarray,
                v_a: np.ndarray, carrier_freq: float) -> np.ndarray:
    """7x6 Jacobian of the base-station channel parameters w.r.t. the state.

    Rows follow (px, py, pz, vx, vy, vz, clock bias); columns follow
    (theta_tx, phi_tx, theta_rx, phi_rx, tau_b, doppler).  The biased-TOA
    column differentiates the Doppler-corrected model, which is where the
    clock coupling into velocity originates.
    """
    dp, r = separation(p, p_a)
    dv = np.asarray(v, dtype=float) - np.asarray(v_a, dtype=float)
    lam = SPEED_OF_LIGHT / carrier_freq
    f_d = doppler(p, v, p_a, v_a, lam)
    dth, dph = _angle_gradients(dp, r)
    dfd_dp, dfd_dv = _doppler_gradients(dp, dv, r, lam)
    dtau_dp = dp / (SPEED_OF_LIGHT * r) + (b_u / carrier_freq) * dfd_dp
    dtau_dv = (b_u / carrier_freq) * dfd_dv

    t = np.zeros((7, 6))
    t[0:3, 0] = dth
    t[0:3, 1] = dph
    t[0:3, 2] = -dth
    t[0:3, 3] = dph
    t[0:3, 4] = dtau_dp
    t[0:3, 5] = dfd_dp
    t[3:6, 4] = dtau_dv
    t[3:6, 5] = dfd_dv
    t[6, 4] = 1.0 + f_d / carrier_freq
    return t


def transform_s(p: np.ndarray, v: np.ndarray, b_u: float, p_a: np.ndarray,
                v_a: np.ndarray, carrier_freq: float) -> np.ndarray:
    """7x2 Jacobian of the satellite channel parameters (tau_b, doppler)."""
    dp, r = separation(p, p_a)
    dv = np.asarray(v, dtype=float) - np.asarray(v_a, dtype=float)
    lam = SPEED_OF_LIGHT / carrier_freq
    f_d = doppler(p, v, p_a, v_a, lam)
    dfd_dp, dfd_dv = _doppler_gradients(dp, dv, r, lam)

    t = np.zeros((7, 2))
    t[0:3, 0] = dp / (SPEED_OF_LIGHT * r) + (b_u / carrier_freq) * dfd_dp
    t[0:3, 1] = dfd_dp
    t[3:6, 0] = (b_u / carrier_freq) * dfd_dv
    t[3:6, 1] = dfd_dv
    t[6, 0] = 1.0 + f_d / carrier_freq
    return t


def assemble_total_fim(gnb_terms: Iterable[tuple[np.ndarray, np.ndarray]],
                       sat_terms: Iterable[tuple[np.ndarray, np.ndarray]]
                       ) -> np.ndarray:
    """Sum of transformed per-anchor FIMs: sum T J T^T over all anchors.

    Either iterable may be empty; with no anchors the zero matrix is
    returned.
    """
    total = np.zeros((7, 7))
    for t_mat, j_mat in list(gnb_terms) + list(sat_terms):
        total += t_mat @ np.asarray(j_mat, dtype=float) @ t_mat.T
    return 0.5 * (total + total.T)


def efim_position_velocity(j7: np.ndarray) -> np.ndarray:
    """Schur complement over the clock bias: 6x6 equivalent FIM of (p, v)."""
    j7 = np.asarray(j7, dtype=float)
    j_pv = j7[:6, :6]
    coupling = j7[:6, 6]
    j_b = j7[6, 6]
    if j_b == 0.0:
        return j_pv.copy()
    if j_b < 1e-12 * np.trace(j7):
        raise DegenerateBiasError(
            f"clock-bias information {j_b:.3e} too small to eliminate stably")
    return j_pv - np.outer(coupling, coupling) / j_b


def peb_veb(efim: np.ndarray) -> tuple[float, float]:
    """Bounds from a full-rank 6x6 equivalent FIM: root-sum CRLB variances."""
    c = np.diag(np.linalg.inv(np.asarray(efim, dtype=float)))
    return float(np.sqrt(np.sum(c[0:3]))), float(np.sqrt(np.sum(c[3:6])))


@dataclass(frozen=True)
class BoundReport:
    """Error bounds and identifiability diagnostics for one anchor subset.

    ``rank`` and ``condition_number`` refer to the equilibrated 7x7 state
    FIM.  ``peb_m``/``veb_mps`` are present only when the respective
    coordinates are identifiable; ``feasible`` requires the full rank of 7.
    """

    peb_m: float | None
    veb_mps: float | None
    feasible: bool
    position_feasible: bool
    velocity_feasible: bool
    rank: int
    condition_number: float
    contributions: dict[str, float] = field(default_factory=dict)


def bound_report(j7: np.ndarray, contributions: dict[str, float] | None = None,
                 rank_rtol: float = RANK_RTOL) -> BoundReport:
    """Rank analysis plus bounds for a 7x7 state FIM.

    Works on the diagonally equilibrated matrix; the diagonal CRLB entries
    of identifiable coordinates are invariant under that scaling.
    """
    j7 = 0.5 * (np.asarray(j7, dtype=float) + np.asarray(j7, dtype=float).T)
    diag = np.diag(j7).copy()
    scale = np.where(diag > 0.0, 1.0 / np.sqrt(np.where(diag > 0.0, diag, 1.0)), 1.0)
    j_eq = j7 * np.outer(scale, scale)

    u, sing, _ = np.linalg.svd(j_eq, hermitian=True)
    smax = sing[0] if sing.size else 0.0
    if smax <= 0.0:
        rank = 0
        kept = np.zeros(7, dtype=bool)
    else:
        kept = sing > rank_rtol * smax
        rank = int(np.count_nonzero(kept))
    cond = float(smax / sing[6]) if rank == 7 else float("inf")

    null_basis = u[:, ~kept]
    pos_ok = rank > 0 and np.abs(null_basis[0:3, :]).max(initial=0.0) < _NULL_COMPONENT_TOL
    vel_ok = rank > 0 and np.abs(null_basis[3:6, :]).max(initial=0.0) < _NULL_COMPONENT_TOL

    peb = veb = None
    if pos_ok or vel_ok:
        inv_s = np.where(kept, 1.0 / np.where(kept, sing, 1.0), 0.0)
        crlb_eq = (u * inv_s) @ u.T
        crlb_diag = np.diag(crlb_eq) * scale ** 2
        if pos_ok:
            peb = float(np.sqrt(np.sum(crlb_diag[0:3])))
        if vel_ok:
            veb = float(np.sqrt(np.sum(crlb_diag[3:6])))

    return BoundReport(peb, veb, rank == 7, bool(pos_ok), bool(vel_ok),
                       rank, cond, contributions or {})


def jacobian_fd(func, x0: np.ndarray, steps: Sequence[float],
                wrap: Sequence[bool] | None = None,
                richardson: bool = True) -> np.ndarray:
    """Central-difference Jacobian oracle, optionally wrapping angular outputs.

    ``func`` maps a state vector to a vector of observables; the returned
    matrix has shape (len(x0), len(func(x0))) to match the transform layout.
    With ``richardson`` the two-step extrapolation cancels the leading
    truncation term, which allows steps large enough to keep subtraction
    noise below the verification tolerance.
    """
    x0 = np.asarray(x0, dtype=float)
    f0 = np.asarray(func(x0), dtype=float)

    def central(i: int, h: float) -> np.ndarray:
        xp = x0.copy()
        xm = x0.copy()
        xp[i] += h
        xm[i] -= h
        diff = np.asarray(func(xp), dtype=float) - np.asarray(func(xm), dtype=float)
        if wrap is not None:
            for j, w in enumerate(wrap):
                if w:
                    diff[j] = np.pi - (np.pi - diff[j]) % (2.0 * np.pi)
        return diff / (2.0 * h)

    jac = np.zeros((x0.size, f0.size))
    for i, h in enumerate(steps):
        if richardson:
            jac[i] = (4.0 * central(i, 0.5 * h) - central(i, h)) / 3.0
        else:
            jac[i] = central(i, h)
    return jac
