import numpy as np
import pytest

from hybridpos.arrays import (build_ura, response, response_derivatives,
                              response_grid, unit_direction)


class TestBuildUra:
    def test_single_element(self):
        arr = build_ura(1, 1, "+z")
        assert arr.n_elements == 1
        assert np.allclose(arr.locations, 0.0)

    def test_centered_square(self):
        arr = build_ura(2, 2, "+z")
        assert arr.n_elements == 4
        assert np.allclose(arr.locations.mean(axis=0), 0.0, atol=1e-15)
        assert len({tuple(r) for r in arr.locations}) == 4

    def test_max_separation(self):
        arr = build_ura(12, 12, "+x")
        dists = np.linalg.norm(arr.locations[:, None] - arr.locations[None, :], axis=2)
        assert dists.max() == pytest.approx(np.sqrt(11 ** 2 + 11 ** 2), rel=1e-12)
        # panel plane orthogonal to the boresight axis
        assert np.allclose(arr.locations[:, 0], 0.0)

    def test_invalid(self):
        with pytest.raises(ValueError):
            build_ura(0, 4)
        with pytest.raises(ValueError):
            build_ura(2, 2, "up")


class TestResponse:
    def test_single_element_is_unity(self):
        arr = build_ura(1, 1)
        a = response(arr, 0.7, -2.0, 0.01, 0.01)
        assert a.shape == (1,)
        assert a[0] == pytest.approx(1.0)

    def test_broadside_equal_phases(self):
        arr = build_ura(4, 4, "+z")
        a = response(arr, 0.0, 0.3, 0.01, 0.01)
        assert np.allclose(a, a[0], atol=1e-14)
        assert np.linalg.norm(a) == pytest.approx(1.0, rel=1e-12)

    def test_unit_norm(self):
        rng = np.random.default_rng(11)
        arr = build_ura(3, 5, "+y")
        for _ in range(100):
            a = response(arr, rng.uniform(0, np.pi), rng.uniform(-np.pi, np.pi),
                         0.0079, 0.0079)
            assert np.linalg.norm(a) == pytest.approx(1.0, rel=1e-12)

    def test_azimuth_periodicity(self):
        arr = build_ura(4, 3, "+x")
        a1 = response(arr, 1.1, 0.4, 0.01, 0.01)
        a2 = response(arr, 1.1, 0.4 + 2 * np.pi, 0.01, 0.01)
        assert np.allclose(a1, a2, atol=1e-12)

    def test_subcarrier_wavelength_matters(self):
        arr = build_ura(8, 8, "+z")
        lam_c = 0.0079
        a_c = response(arr, 1.0, 0.2, lam_c, lam_c)
        a_k = response(arr, 1.0, 0.2, lam_c * 0.999, lam_c)
        assert not np.allclose(a_c, a_k, atol=1e-6)


class TestResponseDerivatives:
    def test_single_element_zero(self):
        arr = build_ura(1, 1)
        d_th, d_ph = response_derivatives(arr, 0.7, 0.3, 0.01, 0.01)
        assert np.allclose(d_th, 0.0) and np.allclose(d_ph, 0.0)

    def test_pole_azimuth_degeneracy(self):
        arr = build_ura(4, 4, "+z")
        _, d_ph = response_derivatives(arr, 0.0, 1.3, 0.01, 0.01)
        assert np.allclose(d_ph, 0.0, atol=1e-14)

    def test_norm_derivative_orthogonality(self):
        rng = np.random.default_rng(12)
        arr = build_ura(5, 3, "+y")
        for _ in range(50):
            th = rng.uniform(0.2, np.pi - 0.2)
            ph = rng.uniform(-np.pi, np.pi)
            a, d_th, d_ph = response_grid(arr, th, ph, np.array([0.011]), 0.01,
                                          derivatives=True)
            assert abs(np.real(np.vdot(a[0], d_th[0]))) < 1e-12
            assert abs(np.real(np.vdot(a[0], d_ph[0]))) < 1e-12

    @pytest.mark.parametrize("boresight,grid", [("+z", (4, 4)), ("+x", (3, 6)),
                                                ("+y", (2, 5))])
    def test_finite_difference_agreement(self, boresight, grid):
        rng = np.random.default_rng(hash(boresight) % 2 ** 31)
        arr = build_ura(*grid, boresight=boresight)
        lam_c = 0.0079
        h = 1e-6
        for _ in range(300):
            th = rng.uniform(0.15, np.pi - 0.15)
            ph = rng.uniform(-np.pi, np.pi)
            lam_k = lam_c * rng.uniform(0.995, 1.005)
            d_th, d_ph = response_derivatives(arr, th, ph, lam_k, lam_c)
            fd_th = (response(arr, th + h, ph, lam_k, lam_c)
                     - response(arr, th - h, ph, lam_k, lam_c)) / (2 * h)
            fd_ph = (response(arr, th, ph + h, lam_k, lam_c)
                     - response(arr, th, ph - h, lam_k, lam_c)) / (2 * h)
            scale = max(np.abs(fd_th).max(), np.abs(fd_ph).max(), 1e-9)
            assert np.abs(d_th - fd_th).max() / scale < 1e-6
            assert np.abs(d_ph - fd_ph).max() / scale < 1e-6


def test_unit_direction_convention():
    u = unit_direction(np.pi / 2, 0.0)
    assert np.allclose(u, [1.0, 0.0, 0.0], atol=1e-15)
    u = unit_direction(0.0, 1.0)
    assert np.allclose(u, [0.0, 0.0, 1.0], atol=1e-15)
