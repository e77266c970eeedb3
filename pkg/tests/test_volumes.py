"""Tests for log-space ball volumes."""

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperpack._numerics import adaptive_simpson, log_integral, logsumexp, lsinh
from hyperpack.errors import DomainError
from hyperpack.volumes import (
    LogReal,
    log_ball_volume,
    log_ball_volume_asymptotic,
    log_sphere_surface,
    log_volume_ratio,
    volume_ratio_window,
)

mp.mp.dps = 40


def mp_log_ball_volume(m, r):
    surf = mp.log(2) + mp.mpf(m) / 2 * mp.log(mp.pi) - mp.loggamma(mp.mpf(m) / 2)
    return float(surf + mp.log(mp.quad(lambda t: mp.sinh(t) ** (m - 1), [0, 1, r])))


class TestLsinh:

    @settings(max_examples=200)
    @given(st.floats(1e-12, 700))
    def test_against_mpmath(self, x):
        np.testing.assert_allclose(lsinh(x), float(mp.log(mp.sinh(x))), rtol=1e-14, atol=1e-15)

    def test_large_argument(self):
        np.testing.assert_allclose(lsinh(1e6), 1e6 - math.log(2), rtol=1e-15)


class TestNumerics:

    def test_logsumexp(self):
        np.testing.assert_allclose(logsumexp([1000.0, 1000.0]), 1000.0 + math.log(2), rtol=1e-15)
        assert logsumexp([-math.inf, -math.inf]) == -math.inf

    def test_adaptive_simpson(self):
        val = adaptive_simpson(np.sin, 0.0, math.pi, rtol=1e-12)
        np.testing.assert_allclose(val, 2.0, rtol=1e-11)

    def test_log_integral(self):
        val = log_integral(lambda x: 500.0 * x, 0.0, 2.0, breakpoints=(1.0,))
        want = float(mp.log((mp.exp(1000) - 1) / 500))
        np.testing.assert_allclose(val, want, rtol=1e-12)


class TestLogReal:

    def test_arithmetic(self):
        a, b = LogReal.from_float(3.0), LogReal.from_float(5.0)
        np.testing.assert_allclose(float(a * b), 15.0)
        np.testing.assert_allclose(float(b / a), 5.0 / 3.0)
        np.testing.assert_allclose(float(a + b), 8.0)
        np.testing.assert_allclose(float(a ** 2), 9.0)

    def test_zero(self):
        z = LogReal.zero()
        assert z.is_zero
        assert float(z + LogReal.from_float(2.0)) == pytest.approx(2.0)
        with pytest.raises(ZeroDivisionError):
            LogReal.from_float(1.0) / z

    def test_huge_closed(self):
        a = LogReal(1e14)
        c = (a + a) * LogReal(-1e14)
        # float spacing at 1e14 is 1/64
        np.testing.assert_allclose(c.log, math.log(2), atol=0.02)
        assert math.isfinite((LogReal(4e14) * LogReal(4e14) / LogReal(4e14)).log)
        with pytest.raises(OverflowError):
            LogReal(9e14) * LogReal(9e14)
        with pytest.raises(OverflowError):
            float(a)

    def test_ordering(self):
        assert LogReal(1.0) < LogReal(2.0)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            LogReal.from_float(-1.0)


class TestSphereSurface:

    def test_circle(self):
        np.testing.assert_allclose(log_sphere_surface(2).log, math.log(2 * math.pi), rtol=1e-15)

    def test_two_sphere(self):
        np.testing.assert_allclose(log_sphere_surface(3).log, math.log(4 * math.pi), rtol=1e-15)

    def test_m10(self):
        np.testing.assert_allclose(log_sphere_surface(10).log, math.log(2 * math.pi ** 5 / 24), atol=1e-12)
        np.testing.assert_allclose(math.exp(log_sphere_surface(10).log), 25.50164, atol=1e-5)

    @pytest.mark.parametrize("m", [4, 17, 1000, 10**6])
    def test_against_mpmath(self, m):
        want = float(mp.log(2) + mp.mpf(m) / 2 * mp.log(mp.pi) - mp.loggamma(mp.mpf(m) / 2))
        np.testing.assert_allclose(log_sphere_surface(m).log, want, rtol=1e-12)


class TestBallVolume:

    def test_m2_r1(self):
        want = math.log(2 * math.pi * (math.cosh(1) - 1))
        np.testing.assert_allclose(want, 1.2273795950752364, rtol=1e-15)
        np.testing.assert_allclose(log_ball_volume(2, 1.0).log, want, atol=1e-10)

    def test_m3_r1(self):
        want = math.log(math.pi * (math.sinh(2) - 2))
        np.testing.assert_allclose(want, 1.6313819131387678, rtol=1e-15)
        np.testing.assert_allclose(log_ball_volume(3, 1.0).log, want, atol=1e-10)

    @pytest.mark.parametrize("m", [2, 3, 4, 5, 6])
    def test_flat_limit(self, m):
        r = 1e-4
        euclid = math.log(math.pi) * m / 2 - math.lgamma(m / 2 + 1) + m * math.log(r)
        assert abs(log_ball_volume(m, r).log - euclid) < 1e-6

    @pytest.mark.parametrize("m,r", [(2, 0.3), (5, 2.5), (12, 7.0), (64, 1.0), (200, 12.0)])
    def test_against_mpmath(self, m, r):
        np.testing.assert_allclose(log_ball_volume(m, r).log, mp_log_ball_volume(m, r), rtol=1e-10)

    @pytest.mark.parametrize("m,r", [(10**4, 1.0), (10**6, 0.2), (10**6, 20.0)])
    def test_large_m(self, m, r):
        """Laplace-type check: the integral is dominated by the top of [0, r]."""
        got = log_ball_volume(m, r).log - log_sphere_surface(m).log
        with mp.workdps(30):
            f = lambda t: mp.exp((m - 1) * (mp.log(mp.sinh(t)) - mp.log(mp.sinh(r))))
            want = (m - 1) * float(mp.log(mp.sinh(r))) + float(mp.log(mp.quad(f, [r - 50.0 / m, r])))
            lower = float(mp.log(mp.quad(f, [0, r - 50.0 / m]) + 1e-300))
        assert lower < math.log(1e-12)
        np.testing.assert_allclose(got, want, rtol=1e-9)

    def test_closed_forms_grid(self):
        for r in np.linspace(0.05, 30.0, 60):
            two = math.log(4 * math.pi) + 2 * float(lsinh(r / 2))
            three = math.log(math.pi) + float(lsinh(2 * r)) + math.log1p(-2 * r / math.sinh(2 * r))
            np.testing.assert_allclose(log_ball_volume(2, r).log, two, rtol=1e-9)
            np.testing.assert_allclose(log_ball_volume(3, r).log, three, rtol=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(2, 40), st.floats(0.01, 20), st.floats(1.001, 2.0))
    def test_monotone_in_r(self, m, r, k):
        assert log_ball_volume(m, r * k).log > log_ball_volume(m, r).log

    def test_domain(self):
        with pytest.raises(DomainError):
            log_ball_volume(3, 0.0)
        with pytest.raises(DomainError):
            log_ball_volume(1, 1.0)


class TestAsymptotic:

    def test_m10_r20(self):
        gap = abs(log_ball_volume_asymptotic(10, 20.0).log - log_ball_volume(10, 20.0).log)
        assert gap <= math.log1p(10 * 10 * math.exp(-20.0))

    def test_m3_r30(self):
        gap = abs(log_ball_volume_asymptotic(3, 30.0).log - log_ball_volume(3, 30.0).log)
        assert gap < 1e-6

    def test_huge_m_finite(self):
        m = 10**6
        v = log_ball_volume_asymptotic(m, 5.0).log
        assert math.isfinite(v)
        np.testing.assert_allclose(v, (m - 1) * 5 - m * math.log(2) + log_sphere_surface(m).log,
                                   atol=20)

    def test_domain(self):
        with pytest.raises(DomainError):
            log_ball_volume_asymptotic(2, 1.0)


class TestVolumeRatio:

    def test_m2_closed_form(self):
        want = math.log((math.cosh(1) - 1) / (math.cosh(2) - 1))
        np.testing.assert_allclose(math.exp(want), 0.19661193324148185, rtol=1e-14)
        np.testing.assert_allclose(log_volume_ratio(2, 1.0, 2.0), want, atol=1e-9)

    def test_equal_balls_limit(self):
        assert abs(log_volume_ratio(5, 2.0 - 1e-9, 2.0)) < 1e-7

    @settings(max_examples=200, deadline=None)
    @given(st.integers(2, 50), st.floats(0.05, 5.0), st.floats(1.01, 3.0))
    def test_sandwich(self, m, r, k):
        R = r * k
        v = log_volume_ratio(m, r, R)
        lo, hi = volume_ratio_window(m, r, R)
        assert lo - 1e-9 <= v <= hi + 1e-9

    @pytest.mark.parametrize("m", [100, 1000, 10_000])
    def test_trivial_bound_asymptotic(self, m):
        R = math.log(m) + 5
        err = abs(log_volume_ratio(m, R, 2 * R) + R * (m - 1))
        assert err <= math.log1p(50 * m * math.exp(-R))

    def test_domain(self):
        with pytest.raises(DomainError):
            log_volume_ratio(3, 2.0, 1.0)
        with pytest.raises(DomainError):
            log_volume_ratio(3, 1.0, 1.0)
