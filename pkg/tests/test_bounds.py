import numpy as np
import pytest

from hybridpos import geometry
from hybridpos.bounds import (BoundReport, assemble_total_fim, bound_report,
                              efim_position_velocity, jacobian_fd, peb_veb,
                              transform_g, transform_s)
from hybridpos.errors import DegenerateBiasError
from hybridpos.fim import GnssSignalConfig, fim_gnss

P = np.array([10.0, 0.0, 1.5])
V = np.array([13.9, 0.0, 0.0])
P_G = np.array([0.0, 0.0, 7.0])
P_S = np.array([8.2e6, 8.2e6, 1.65e7])
V_S = np.array([500.0, -3000.0, 2400.0])


class TestTransformG:
    def test_shape_and_zero_blocks(self):
        t = transform_g(P, V, 1e-4, P_G, np.zeros(3), 38e9)
        assert t.shape == (7, 6)
        # angles depend on neither velocity nor clock bias
        assert np.allclose(t[3:, 0:4], 0.0)
        # Doppler has no clock-bias sensitivity
        assert t[6, 5] == 0.0

    def test_no_relative_motion_kills_velocity_coupling(self):
        t = transform_g(P, np.zeros(3), 1e-3, P_G, np.zeros(3), 38e9)
        assert np.allclose(t[3:6, 4], 0.0)  # d tau / d v = (b/f) d f_d / d v != 0
        # with v = v_a the Doppler is zero, so d tau / d b = 1 exactly
        assert t[6, 4] == pytest.approx(1.0, abs=1e-15)

    def test_bias_column_carries_doppler_ratio(self):
        t = transform_g(P, V, 0.0, P_G, np.zeros(3), 38e9)
        lam = geometry.SPEED_OF_LIGHT / 38e9
        f_d = geometry.doppler(P, V, P_G, np.zeros(3), lam)
        assert t[6, 4] == pytest.approx(1.0 + f_d / 38e9, rel=1e-15)

    def test_departure_arrival_opposition(self):
        t = transform_g(P, V, 1e-4, P_G, np.zeros(3), 38e9)
        assert np.allclose(t[0:3, 2], -t[0:3, 0])
        assert np.allclose(t[0:3, 3], t[0:3, 1])


class TestTransformS:
    def test_zero_bias_range_gradient(self):
        t = transform_s(P, V, 0.0, P_S, V_S, 1575.42e6)
        unit = (P - P_S) / np.linalg.norm(P - P_S)
        assert np.allclose(t[0:3, 0], unit / geometry.SPEED_OF_LIGHT, rtol=1e-12)

    def test_co_moving_satellite(self):
        t = transform_s(P, V, 1e-3, P_S, V, 1575.42e6)
        assert np.allclose(t[0:3, 1], 0.0, atol=1e-30)

    def test_finite_difference_agreement(self):
        rng = np.random.default_rng(10)
        lam = geometry.SPEED_OF_LIGHT / 1575.42e6
        for _ in range(20):
            p = rng.uniform(-50, 50, 3)
            v = rng.uniform(-20, 20, 3)
            b_u = rng.uniform(-1e-3, 1e-3)
            direction = rng.standard_normal(3)
            direction /= np.linalg.norm(direction)
            p_s = p + 2.2e7 * direction
            v_s = rng.standard_normal(3) * 1500

            def observed(x):
                f_d = geometry.doppler(x[0:3], x[3:6], p_s, v_s, lam)
                tau = geometry.biased_toa(x[0:3], p_s, x[6], f_d, 1575.42e6)
                return [tau, f_d]

            analytic = transform_s(p, v, b_u, p_s, v_s, 1575.42e6)
            r = np.linalg.norm(p - p_s)
            numeric = jacobian_fd(observed, np.concatenate([p, v, [b_u]]),
                                  [1e-3 * r] * 3 + [1.0] * 3 + [1e-6])
            mask = np.abs(numeric) >= 1e-9
            rel = np.abs(analytic[mask] - numeric[mask]) / np.abs(numeric[mask])
            assert rel.max() < 1e-6


class TestAssemble:
    def test_empty_is_zero(self):
        assert np.array_equal(assemble_total_fim([], []), np.zeros((7, 7)))

    def test_single_satellite_rank(self):
        t = transform_s(P, V, 0.0, P_S, V_S, 1575.42e6)
        j2 = fim_gnss(GnssSignalConfig(40.0, 1.023e6, 1 / 1.023e6, 306900)).values
        total = assemble_total_fim([], [(t, j2)])
        assert np.linalg.matrix_rank(total, tol=1e-12 * np.abs(total).max()) <= 2

    def test_additivity(self):
        rng = np.random.default_rng(1)
        terms = []
        for _ in range(3):
            t = rng.standard_normal((7, 2))
            a = rng.standard_normal((2, 2))
            terms.append((t, a @ a.T))
        full = assemble_total_fim([], terms)
        partial = assemble_total_fim([], terms[:1]) + assemble_total_fim([], terms[1:])
        assert np.allclose(full, partial, atol=1e-12)


class TestEfim:
    def test_block_diagonal_passthrough(self):
        j7 = np.diag([1, 2, 3, 4, 5, 6, 7.0])
        assert np.allclose(efim_position_velocity(j7), np.diag([1, 2, 3, 4, 5, 6.0]))

    def test_identity(self):
        assert np.allclose(efim_position_velocity(np.eye(7)), np.eye(6))

    def test_matches_inverse_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            a = rng.standard_normal((7, 7))
            j7 = a @ a.T + 0.5 * np.eye(7)
            efim = efim_position_velocity(j7)
            oracle = np.linalg.inv(np.linalg.inv(j7)[:6, :6])
            assert np.linalg.norm(efim - oracle) / np.linalg.norm(oracle) < 1e-8

    def test_zero_bias_block(self):
        j7 = np.zeros((7, 7))
        j7[:6, :6] = np.eye(6)
        assert np.allclose(efim_position_velocity(j7), np.eye(6))

    def test_degenerate_bias(self):
        j7 = np.eye(7)
        j7[6, 6] = 1e-15
        j7[0, 6] = j7[6, 0] = 1e-16
        with pytest.raises(DegenerateBiasError):
            efim_position_velocity(j7)


class TestBoundReport:
    def test_identity_efim(self):
        peb, veb = peb_veb(np.eye(6))
        assert peb == pytest.approx(np.sqrt(3.0))
        assert veb == pytest.approx(np.sqrt(3.0))

    def test_full_rank_report(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((7, 7))
        j7 = a @ a.T + 0.5 * np.eye(7)
        rep = bound_report(j7)
        assert rep.feasible and rep.rank == 7
        assert rep.position_feasible and rep.velocity_feasible
        peb, veb = peb_veb(efim_position_velocity(j7))
        assert rep.peb_m == pytest.approx(peb, rel=1e-9)
        assert rep.veb_mps == pytest.approx(veb, rel=1e-9)

    def test_scaling_law(self):
        rng = np.random.default_rng(4)
        a = rng.standard_normal((7, 7))
        j7 = a @ a.T + 0.5 * np.eye(7)
        base = bound_report(j7)
        scaled = bound_report(10.0 * j7)
        assert scaled.peb_m == pytest.approx(base.peb_m / np.sqrt(10.0), rel=1e-12)
        assert scaled.veb_mps == pytest.approx(base.veb_mps / np.sqrt(10.0), rel=1e-12)

    def test_zero_matrix_infeasible(self):
        rep = bound_report(np.zeros((7, 7)))
        assert rep.rank == 0 and not rep.feasible
        assert rep.peb_m is None and rep.veb_mps is None

    def test_velocity_nullspace_detected(self):
        # information in position/bias only: position recoverable, velocity not
        rng = np.random.default_rng(5)
        g = rng.standard_normal((4, 7))
        g[:, 3:6] = 0.0
        j7 = g.T @ g + 0.0
        # add full position information plus bias
        extra = np.zeros((7, 7))
        extra[:3, :3] = np.eye(3)
        extra[6, 6] = 1.0
        rep = bound_report(j7 + extra)
        assert rep.rank < 7
        assert rep.position_feasible and not rep.velocity_feasible
        assert rep.peb_m is not None and rep.veb_mps is None

    def test_mixed_unit_scales_full_rank(self):
        # heterogeneous magnitudes (seconds vs meters) must not fake deficiency
        d = np.diag([1e-2, 1e-2, 1e-2, 1e4, 1e4, 1e4, 1e17])
        rep = bound_report(d)
        assert rep.rank == 7 and rep.feasible
        expected_peb = np.sqrt(3.0 / 1e-2)
        assert rep.peb_m == pytest.approx(expected_peb, rel=1e-12)

    def test_report_is_dataclass_with_contributions(self):
        rep = bound_report(np.eye(7), contributions={"gnb0": 1.0})
        assert isinstance(rep, BoundReport)
        assert rep.contributions == {"gnb0": 1.0}
