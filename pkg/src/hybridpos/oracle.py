"""Cross-validation suites pitting analytic paths against independent oracles.

Four checks: closed-form 5G FIM against the finite-difference route,
analytic state Jacobians against central differences of the observation
functions, the Schur-complement EFIM against a full-inverse computation,
and the rectangular-pulse moment closed forms against quadrature on a
sampled pulse.
"""

from __future__ import annotations

import numpy as np

from . import arrays, bounds, fim, geometry, waveform
from .schemas import OracleCheck, OracleReport

_GRIDS = [(1, 2), (2, 2), (2, 3), (2, 4)]


def _random_link(rng: np.random.Generator) -> tuple[fim.Link5G, geometry.ChannelParams5G]:
    """Small random 5G link with nonzero Doppler (exercises the ICI terms)."""
    k = int(rng.choice([4, 8, 16]))
    m = int(rng.choice([2, 4, 8]))
    n_beams = int(rng.choice([1, 2, 4]))
    n_streams = 1 if n_beams == 1 or rng.random() < 0.7 else 2
    cfg = waveform.OfdmConfig(
        n_subcarriers=k, n_symbols=m,
        subcarrier_spacing=float(rng.uniform(60e3, 240e3)),
        carrier_freq=float(rng.uniform(24e9, 40e9)),
        cp_duration=float(rng.choice([0.0, 5e-7])),
        n_beams=n_beams, n_streams=n_streams,
        ici_halfwidth=int(rng.choice([1, 2])),
    )
    tx = arrays.build_ura(*_GRIDS[rng.integers(len(_GRIDS))], boresight="+x")
    rx = arrays.build_ura(*_GRIDS[rng.integers(len(_GRIDS))], boresight="+z")
    tx_sector = waveform.Sector(float(rng.uniform(0.6, 2.5)),
                                float(rng.uniform(-np.pi, np.pi)),
                                float(rng.uniform(0.4, 1.5)))
    rx_sector = waveform.Sector(float(rng.uniform(0.6, 2.5)),
                                float(rng.uniform(-np.pi, np.pi)),
                                float(rng.uniform(0.4, 1.5)))
    beams = waveform.build_codebook(cfg, tx, rx, tx_sector, rx_sector)
    pilots = waveform.generate_pilots(cfg, int(rng.integers(1 << 31)))
    link = fim.Link5G(cfg, tx, rx, beams, pilots,
                      fim.Power5GConfig(float(rng.uniform(20.0, 40.0))))
    doppler_norm = rng.uniform(0.005, 0.05) * rng.choice([-1.0, 1.0])
    eta = geometry.ChannelParams5G(
        theta_tx=float(rng.uniform(0.4, np.pi - 0.4)),
        phi_tx=float(rng.uniform(-np.pi, np.pi)),
        theta_rx=float(rng.uniform(0.4, np.pi - 0.4)),
        phi_rx=float(rng.uniform(-np.pi, np.pi)),
        tau_b=float(rng.uniform(1e-8, 1e-6)),
        doppler=float(doppler_norm / cfg.symbol_duration),
    )
    return link, eta


def check_fim_5g(n_instances: int = 50, seed: int = 1234,
                 tolerance: float = 1e-5) -> OracleCheck:
    """Closed-form vs numeric 5G FIM, relative Frobenius distance."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        link, eta = _random_link(rng)
        closed = fim.fim_5g_closed(link, eta).values
        numeric = fim.fim_5g_numeric(link, eta).values
        worst = max(worst, np.linalg.norm(closed - numeric)
                    / np.linalg.norm(numeric))
    return OracleCheck(name="fim_5g_closed_vs_numeric", max_deviation=float(worst),
                       tolerance=tolerance, passed=bool(worst <= tolerance))


def _random_state(rng: np.random.Generator, kind: str):
    p = np.array([rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(0.5, 5.0)])
    v = rng.uniform(-30, 30, 3)
    b_u = float(rng.uniform(-1e-3, 1e-3))
    if kind == "gnb":
        while True:
            p_a = np.array([rng.uniform(-300, 300), rng.uniform(-300, 300),
                            rng.uniform(3.0, 40.0)])
            d = p - p_a
            if np.linalg.norm(d) > 5.0 and np.hypot(d[0], d[1]) > 0.2 * np.linalg.norm(d):
                break
        v_a = np.zeros(3)
        f_c = float(rng.uniform(24e9, 40e9))
    else:
        while True:
            direction = rng.standard_normal(3)
            direction /= np.linalg.norm(direction)
            if abs(direction[2]) < 0.95:
                break
        p_a = p + direction * rng.uniform(1.5e7, 3e7)
        v_a = rng.standard_normal(3)
        v_a *= rng.uniform(2e3, 4e3) / np.linalg.norm(v_a)
        f_c = float(rng.uniform(1.1e9, 1.7e9))
    return p, v, b_u, p_a, v_a, f_c


def check_transform_jacobians(n_states: int = 1000, seed: int = 777,
                              tolerance: float = 1e-6,
                              magnitude_floor: float = 1e-9) -> OracleCheck:
    """Analytic transforms vs central differences of the observation chain.

    Entries below ``magnitude_floor`` are skipped, as are entries more than
    five decades below their observable's gradient scale: double-precision
    differences of an O(1) observable cannot resolve such entries at the
    requested tolerance.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n_states):
        kind = "gnb" if i % 2 == 0 else "sat"
        p, v, b_u, p_a, v_a, f_c = _random_state(rng, kind)
        lam = geometry.SPEED_OF_LIGHT / f_c

        if kind == "gnb":
            analytic = bounds.transform_g(p, v, b_u, p_a, v_a, f_c)
            wrap = [False, True, False, True, False, False]

            def observed(x):
                th_g, ph_g = geometry.los_angles(x[0:3], p_a)
                th_u, ph_u = geometry.aoa_angles(x[0:3], p_a, 0.0)
                f_d = geometry.doppler(x[0:3], x[3:6], p_a, v_a, lam)
                tau = geometry.biased_toa(x[0:3], p_a, x[6], f_d, f_c)
                return [th_g, ph_g, th_u, ph_u, tau, f_d]
        else:
            analytic = bounds.transform_s(p, v, b_u, p_a, v_a, f_c)
            wrap = [False, False]

            def observed(x):
                f_d = geometry.doppler(x[0:3], x[3:6], p_a, v_a, lam)
                tau = geometry.biased_toa(x[0:3], p_a, x[6], f_d, f_c)
                return [tau, f_d]

        r = np.linalg.norm(p - p_a)
        # Doppler/TOA are linear in velocity and bias, so those steps can be
        # generous; position steps scale with range and rely on Richardson
        # extrapolation for the curvature of the angle observables.
        steps = [1e-3 * r] * 3 + [1.0] * 3 + [1e-6]
        numeric = bounds.jacobian_fd(observed, np.concatenate([p, v, [b_u]]),
                                     steps, wrap)
        col_scale = np.max(np.abs(numeric), axis=0)
        mask = np.abs(numeric) >= np.maximum(magnitude_floor, 1e-5 * col_scale)
        if np.any(mask):
            rel = np.abs(analytic[mask] - numeric[mask]) / np.abs(numeric[mask])
            worst = max(worst, float(rel.max()))
    return OracleCheck(name="transform_jacobians", max_deviation=float(worst),
                       tolerance=tolerance, passed=bool(worst <= tolerance))


def check_efim_schur(n_instances: int = 200, seed: int = 31,
                     tolerance: float = 1e-8) -> OracleCheck:
    """Schur-complement EFIM vs the inverse-of-the-inverse-block oracle."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_instances):
        a = rng.standard_normal((7, 7))
        j7 = a @ a.T + 0.1 * np.eye(7)
        efim = bounds.efim_position_velocity(j7)
        oracle = np.linalg.inv(np.linalg.inv(j7)[:6, :6])
        worst = max(worst, np.linalg.norm(efim - oracle) / np.linalg.norm(oracle))
    return OracleCheck(name="efim_schur_vs_inverse", max_deviation=float(worst),
                       tolerance=tolerance, passed=bool(worst <= tolerance))


def check_pulse_moments(tolerance: float = 0.01) -> OracleCheck:
    """Rectangular closed forms vs the sampled-pulse quadrature path."""
    rect = fim.GnssSignalConfig(cn0_db_hz=40.0, bandwidth=1.023e6,
                                chip_duration=1.0 / 1.023e6, n_chips=306900)
    sampled = fim.GnssSignalConfig(
        cn0_db_hz=40.0, bandwidth=1.023e6, chip_duration=1.0 / 1.023e6,
        n_chips=306900, pulse=fim.SampledPulse(np.ones(48)))
    dev_w = abs(fim.effective_bandwidth_sq(sampled)
                / fim.effective_bandwidth_sq(rect) - 1.0)
    dev_t = abs(fim.effective_time_sq(sampled) / fim.effective_time_sq(rect) - 1.0)
    worst = max(dev_w, dev_t)
    return OracleCheck(name="pulse_moments_quadrature", max_deviation=float(worst),
                       tolerance=tolerance, passed=bool(worst <= tolerance))


def run_oracle_suite(fim_instances: int = 50, jacobian_states: int = 1000,
                     schur_instances: int = 200) -> OracleReport:
    """Run all four cross-checks and bundle the outcome."""
    checks = [
        check_fim_5g(fim_instances),
        check_transform_jacobians(jacobian_states),
        check_efim_schur(schur_instances),
        check_pulse_moments(),
    ]
    return OracleReport(checks=checks, passed=all(c.passed for c in checks))
