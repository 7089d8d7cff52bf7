import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sharpconj.quadrature import (
    QuadratureError,
    integrate_adaptive,
    integrate_endpoint_singular,
    integrate_pv_cotangent,
)


@pytest.mark.parametrize(
    "f, a, b, truth",
    [
        (np.sin, 0, math.pi, 2.0),
        (lambda t: t * np.sin(t), 0, math.pi / 2, 1.0),
        (lambda t: np.ones_like(t), 0, 2 * math.pi, 2 * math.pi),
        (np.exp, -1, 2, math.e**2 - math.exp(-1)),
        (lambda t: 1 / (1 + 25 * t**2), -1, 1, 0.4 * math.atan(5)),
        (np.abs, -1, 2, 2.5),
    ],
)
def test_adaptive_analytic(f, a, b, truth):
    r = integrate_adaptive(f, a, b, rel_tol=1e-10)
    assert r.value == pytest.approx(truth, rel=1e-10, abs=1e-14)
    assert abs(r.value - truth) <= 10 * r.abs_error_estimate + 1e-15
    assert not r.diverged


def test_adaptive_scalar_callable():
    r = integrate_adaptive(lambda t: math.cos(t), 0, 1)
    assert r.value == pytest.approx(math.sin(1), rel=1e-12)


def test_adaptive_nonfinite():
    with pytest.raises(QuadratureError):
        integrate_adaptive(lambda t: 1 / (t - 0.5) ** 0 * np.where(t > 0.7, np.nan, 1.0), 0, 1)


def test_adaptive_rejects_empty_interval():
    with pytest.raises(ValueError):
        integrate_adaptive(np.sin, 1, 1)


def test_panel_budget_is_honest():
    # oscillatory integrand with a tiny budget: the estimate must cover the error
    f = lambda t: np.sin(200 * t)  # noqa: E731
    r = integrate_adaptive(f, 0, 1, rel_tol=1e-14, max_panels=8)
    truth = (1 - math.cos(200)) / 200
    assert not r.diverged
    assert abs(r.value - truth) <= r.abs_error_estimate


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(alpha, beta):
    f, g = np.cos, lambda t: t**2
    rf = integrate_adaptive(f, 0, 2)
    rg = integrate_adaptive(g, 0, 2)
    rh = integrate_adaptive(lambda t: alpha * f(t) + beta * g(t), 0, 2)
    combined = abs(alpha) * rf.abs_error_estimate + abs(beta) * rg.abs_error_estimate + rh.abs_error_estimate
    assert abs(rh.value - (alpha * rf.value + beta * rg.value)) <= combined + 1e-14


class TestEndpointSingular:
    def test_inverse_sqrt(self):
        r = integrate_endpoint_singular(lambda t: t**-0.5, 0, 1, "a", rel_tol=1e-8)
        assert r.value == pytest.approx(2.0, rel=1e-8)
        assert abs(r.value - 2) <= 10 * r.abs_error_estimate

    def test_singular_at_b(self):
        r = integrate_endpoint_singular(lambda t: (1 - t) ** -0.5, 0, 1, "b", rel_tol=1e-8)
        assert r.value == pytest.approx(2.0, rel=1e-7)

    def test_catalan(self, catalan):
        r = integrate_endpoint_singular(lambda t: 2 * t / np.sin(t), 0, math.pi / 2, "a", rel_tol=1e-8)
        assert r.value == pytest.approx(4 * catalan, rel=1e-8)

    def test_log_divergence_flagged(self):
        r = integrate_endpoint_singular(lambda t: (-1 / np.log(t)) / t, 0, 0.5, "a", rel_tol=1e-8)
        assert r.diverged

    def test_slow_power_converges(self):
        # t^-0.9: octave contributions shrink only by 2^0.1 per step
        r = integrate_endpoint_singular(lambda t: t**-0.9, 0, 1, "a", rel_tol=1e-9)
        assert not r.diverged
        assert r.value == pytest.approx(10.0, rel=1e-6)
        assert abs(r.value - 10) <= 10 * r.abs_error_estimate

    def test_local_coordinates(self):
        r = integrate_endpoint_singular(lambda s: s**-0.5, 3, 4, "b", rel_tol=1e-9, local=True)
        assert r.value == pytest.approx(2.0, rel=1e-9)

    def test_zero_integrand(self):
        r = integrate_endpoint_singular(lambda t: 0 * t, 0, 1)
        assert r.value == 0 and r.abs_error_estimate == 0


class TestPrincipalValue:
    def test_cos_at_zero(self):
        r = integrate_pv_cotangent(np.cos, 0.0)
        assert -r.value / math.pi == pytest.approx(0.0, abs=1e-12)

    def test_cos_at_half_pi(self):
        r = integrate_pv_cotangent(np.cos, math.pi / 2)
        assert -r.value / math.pi == pytest.approx(1.0, rel=1e-9)

    @pytest.mark.parametrize("x", [0.0, 1.0, -2.5])
    def test_constant(self, x):
        assert integrate_pv_cotangent(lambda t: 0 * t + 3.0, x).value == 0.0

    @pytest.mark.parametrize("k", [1, 2, 5])
    def test_sin_k(self, k):
        x = 0.7
        r = integrate_pv_cotangent(lambda t: np.sin(k * t), x)
        assert -r.value / math.pi == pytest.approx(-math.cos(k * x), abs=1e-9)

    def test_sample_input(self):
        n = 32
        x = 2 * np.pi * np.arange(n) / n
        r = integrate_pv_cotangent(np.cos(3 * x), 0.4)
        assert -r.value / math.pi == pytest.approx(math.sin(1.2), abs=1e-9)

    @settings(max_examples=20, deadline=None)
    @given(st.floats(-math.pi, math.pi), st.integers(0, 2**31 - 1))
    def test_antisymmetry_under_reflection(self, x, seed):
        rng = np.random.default_rng(seed)
        a, b = rng.normal(size=4), rng.normal(size=4)
        k = np.arange(4)

        def f(t):
            ang = np.multiply.outer(np.asarray(t), k)
            return np.cos(ang) @ a + np.sin(ang) @ b

        direct = integrate_pv_cotangent(f, x).value
        reflected = integrate_pv_cotangent(lambda t: f(2 * x - t), x).value
        assert direct == pytest.approx(-reflected, abs=1e-9)

    def test_dini_continuous_kink(self):
        # |sin t| has a kink at 0; its conjugate at 0 is finite
        f = lambda t: np.abs(np.sin(t))  # noqa: E731
        r = integrate_pv_cotangent(f, 0.3)
        assert not r.diverged and math.isfinite(r.value)
