import numpy as np
import pytest

from latspec.errors import ContourError, EigenConvergenceError, OverflowGuardError
from latspec.lattice import Window, build_h0
from latspec.numerics import (
    Contour,
    arcsin_principal,
    contour_quadrature,
    eig_dense,
    mat_exp,
    principal_sqrt,
)


class TestEigDense:
    def test_scalar_case(self):
        lam, vec = eig_dense(np.array([[5.0 + 2.0j]]))
        assert lam[0] == pytest.approx(5.0 + 2.0j)
        assert abs(vec[0, 0]) == pytest.approx(1.0)

    def test_h0_three_sites(self):
        # tridiag(-1, 2, -1) of size 3: char poly roots 2, 2 +- sqrt(2)
        lam, _ = eig_dense(build_h0(Window(1)))
        expected = np.array([2.0 - np.sqrt(2.0), 2.0, 2.0 + np.sqrt(2.0)])
        assert np.allclose(lam, expected, atol=1e-12)

    def test_hermitian_inputs_get_real_sorted_spectrum(self, rng):
        m = rng.standard_normal((30, 30)) + 1j * rng.standard_normal((30, 30))
        m = m + m.conj().T
        lam, vec = eig_dense(m)
        assert np.all(np.isreal(lam))
        assert np.all(np.diff(lam.real) >= 0)
        # orthonormal eigenbasis
        gram = vec.conj().T @ vec
        assert np.max(np.abs(gram - np.eye(30))) < 1e-10

    def test_residual_contract(self, rng):
        m = rng.standard_normal((40, 40)) + 1j * rng.standard_normal((40, 40))
        lam, vec = eig_dense(m)
        resid = np.linalg.norm(m @ vec - vec * lam[None, :], axis=0)
        assert resid.max() <= 1e-10 * np.linalg.norm(m, "fro")

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            eig_dense(np.array([[np.nan, 0.0], [0.0, 1.0]]))


class TestMatExp:
    def test_zero_matrix(self):
        assert np.allclose(mat_exp(np.zeros((4, 4))), np.eye(4))

    def test_diagonal(self):
        out = mat_exp(np.diag([1j * np.pi, 0.0]))
        assert np.allclose(np.diag(out), [-1.0, 1.0], atol=1e-14)

    def test_inverse_property(self, rng):
        for _ in range(5):
            m = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
            m *= 5.0 / np.linalg.norm(m, 2)
            prod = mat_exp(m) @ mat_exp(-m)
            assert np.max(np.abs(prod - np.eye(12))) < 1e-10

    def test_norm_guard(self):
        with pytest.raises(OverflowGuardError):
            mat_exp(400.0 * np.eye(3))


class TestPrincipalSqrt:
    def test_examples(self):
        assert principal_sqrt(-1.0) == pytest.approx(1j)
        assert principal_sqrt(4.0) == pytest.approx(2.0)
        assert principal_sqrt(2j) == pytest.approx(1.0 + 1.0j)

    def test_upper_half_plane_image_and_square(self, rng):
        for _ in range(200):
            z = complex(rng.uniform(-10, 10), rng.uniform(-10, 10))
            r = principal_sqrt(z)
            assert r.imag >= 0.0
            assert abs(r * r - z) <= 1e-15 * abs(z)

    def test_limit_from_above_on_negative_axis(self):
        assert principal_sqrt(complex(-4.0, 0.0)) == pytest.approx(2j)


class TestArcsin:
    def test_examples(self):
        assert arcsin_principal(0.0) == 0.0
        assert arcsin_principal(0.5) == pytest.approx(np.pi / 6)
        assert arcsin_principal(0.25j) == pytest.approx(1j * np.arcsinh(0.25))

    def test_series_near_zero(self):
        w = 1e-3 * (0.3 + 0.4j)
        expected = w + w**3 / 6.0 + 3.0 * w**5 / 40.0
        assert abs(arcsin_principal(w) - expected) < 1e-18

    def test_branch_warning(self):
        with pytest.warns(UserWarning):
            arcsin_principal(0.995)


class TestContourQuadrature:
    def test_residue_of_simple_pole(self):
        c = Contour(0.0, 1.0, 64)
        val = contour_quadrature(lambda z: 1.0 / z, c)
        assert abs(val - 1.0) < 1e-12

    def test_analytic_integrand_vanishes(self):
        c = Contour(0.3 + 0.2j, 2.0, 64)
        val = contour_quadrature(lambda z: 1.0 + 0j, c)
        assert abs(val) < 1e-14

    def test_shifted_pole_with_weight(self):
        c = Contour(0.0, 1.0, 256)
        val = contour_quadrature(lambda z: 2.0 / (z - 0.3), c)
        assert abs(val - 2.0) < 1e-10

    def test_geometric_error_decay(self):
        # pole at distance >= radius/2 off the contour: trapezoid converges geometrically
        errs = []
        for n in (32, 64, 128):
            c = Contour(0.0, 1.0, n)
            val = contour_quadrature(lambda z: 1.0 / (z - 1.5), c)
            errs.append(abs(val))
        assert errs[1] < errs[0] * 0.1
        assert errs[2] < errs[1] * 0.1 or errs[2] < 1e-14

    def test_bad_node_reported(self):
        c = Contour(0.0, 1.0, 16)
        with pytest.raises(ContourError):
            contour_quadrature(lambda z: np.inf, c)

    def test_contour_validation(self):
        with pytest.raises(ValueError):
            Contour(0.0, -1.0, 64)
        with pytest.raises(ValueError):
            Contour(0.0, 1.0, 15)
