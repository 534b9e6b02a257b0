import numpy as np
import pytest

from latspec.errors import LatspecError
from latspec.symbols import (
    affine_t,
    homography_f,
    scaled_symbol,
    spectrum_curve,
    symbol_f,
)


class TestFreeSymbol:
    def test_threshold_values(self):
        assert symbol_f(0.0) == 0.0
        assert symbol_f(np.pi) == pytest.approx(4.0)
        assert symbol_f(np.pi / 2) == pytest.approx(2.0)

    def test_half_angle_identity(self, rng):
        th = rng.uniform(-np.pi, np.pi, 100)
        assert np.allclose(symbol_f(th), 4.0 * np.sin(th / 2) ** 2)


class TestHomography:
    def test_identity_at_zero(self):
        assert homography_f(0.0, 0.37) == pytest.approx(0.37)

    def test_fixed_points(self):
        for theta in (0.1, 0.05j, 0.03 + 0.04j, -0.09):
            assert abs(homography_f(theta, 1.0) - 1.0) <= 1e-13
            assert abs(homography_f(theta, -1.0) + 1.0) <= 1e-13

    def test_group_law_sample(self):
        lhs = homography_f(0.05, homography_f(0.03, 0.5))
        assert abs(lhs - homography_f(0.08, 0.5)) < 1e-13

    def test_group_law_random(self, rng):
        for _ in range(100):
            t1 = complex(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1))
            t2 = complex(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1))
            lam = rng.uniform(-1.0, 1.0)
            lhs = homography_f(t1, homography_f(t2, lam))
            rhs = homography_f(t1 + t2, lam)
            assert abs(lhs - rhs) < 1e-12

    def test_involution(self, rng):
        for _ in range(100):
            t = complex(rng.uniform(-0.1, 0.1), rng.uniform(-0.1, 0.1))
            lam = rng.uniform(-1.0, 1.0)
            assert abs(homography_f(-t, homography_f(t, lam)) - lam) < 1e-12

    def test_angle_bound(self):
        with pytest.raises(LatspecError):
            homography_f(0.5, 0.3)


class TestScaledSymbol:
    def test_reduces_to_free_symbol(self, rng):
        th = rng.uniform(-np.pi, np.pi, 64)
        assert np.allclose(scaled_symbol(0.0, th), symbol_f(th), atol=1e-14)

    def test_quarter_turn_value(self):
        # F_{iy}(0) = -i tan(2y), then T doubles and shifts
        val = scaled_symbol(0.1j, np.pi / 2)
        assert val == pytest.approx(2.0 + 2.0 * np.tan(0.2) * 1j, abs=1e-12)

    def test_imaginary_part_sign(self):
        th = np.linspace(1e-3, 2 * np.pi - 1e-3, 500)
        th = th[np.abs(th - np.pi) > 1e-3]
        vals = scaled_symbol(0.1j, th)
        assert np.all(vals.imag > 0.0)


class TestSpectrumCurve:
    def test_real_theta_gives_segment(self):
        curve = spectrum_curve(0.2)
        assert curve.kind == "segment"
        assert curve.distance(2.0) == 0.0
        assert curve.distance(2.0 + 1.0j) == pytest.approx(1.0)
        assert curve.distance(-3.0) == pytest.approx(3.0)

    def test_reference_circle_parameters(self):
        curve = spectrum_curve(0.1j)
        assert curve.kind == "circle-arc"
        assert curve.center == pytest.approx(2.0 - 4.7304448400782j, abs=1e-10)
        assert curve.radius == pytest.approx(5.1358649110955, abs=1e-10)
        # both thresholds sit on the circle
        for endpoint in (0.0, 4.0):
            assert abs(abs(endpoint - curve.center) - curve.radius) < 1e-10

    def test_depends_only_on_imaginary_part(self):
        c1 = spectrum_curve(0.1j)
        c2 = spectrum_curve(0.05 + 0.1j)
        assert abs(c1.center - c2.center) < 1e-12
        assert abs(c1.radius - c2.radius) < 1e-12

    def test_symbol_range_sits_on_curve(self):
        curve = spectrum_curve(0.07j)
        th = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
        vals = scaled_symbol(0.07j, th)
        dist = np.abs(np.abs(vals - curve.center) - curve.radius)
        assert dist.max() < 1e-10

    def test_arc_distance_excludes_far_side(self):
        # the antipode of the arc midpoint lies on the circle but not the arc
        curve = spectrum_curve(0.1j)
        far = curve.center + (curve.center - curve.midpoint) / abs(curve.center - curve.midpoint) * curve.radius
        d = curve.distance(far)
        assert d > 1.0  # closest approach is one of the endpoints
        assert d == pytest.approx(min(abs(far), abs(far - 4.0)), abs=1e-12)

    def test_sampled_arc_matches_negative_angle(self):
        c_up = spectrum_curve(0.08j)
        pts = c_up.sample(512)
        assert np.all([c_up.distance(p) < 1e-10 for p in pts])
        c_dn = spectrum_curve(-0.08j)
        assert np.all(c_dn.sample(512).imag <= 1e-12)
