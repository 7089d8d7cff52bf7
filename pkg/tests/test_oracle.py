import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from sharpconj import constants as C
from sharpconj import modulus as mod
from sharpconj import oracle
from sharpconj.conjugate import GridFunction, conjugate_spectral, conjugation_row, norms


def full_primal_lp(m, c):
    """Maximize c.f with every pairwise constraint written out (small n only)."""
    n = c.size
    W = oracle.modulus_matrix(m, n)
    rows, rhs = [], []
    for i in range(n):
        for j in range(n):
            if i != j:
                row = np.zeros(n)
                row[i], row[j] = 1.0, -1.0
                rows.append(row)
                rhs.append(W[i, j])
    bounds = [(0.0, 0.0)] + [(None, None)] * (n - 1)
    res = linprog(-c, A_ub=np.array(rows), b_ub=np.array(rhs), bounds=bounds, method="highs")
    assert res.status == 0
    return -res.fun


class TestSampling:
    @settings(max_examples=20, deadline=None)
    @given(st.sampled_from(["lip:1", "power:0.5", "capped:0.4", "log"]), st.integers(0, 10**6))
    def test_samples_admissible(self, dsl, seed):
        m = mod.parse(dsl)
        f = oracle.sample_h_omega(m, 64, seed)
        assert oracle.max_violation(f, oracle.modulus_matrix(m, 64)) <= 1e-12

    def test_zero_modulus_gives_constant(self):
        f = oracle.sample_h_omega(mod.zero(), 32, 1)
        assert np.ptp(f.values) == 0.0

    def test_deterministic(self):
        m = mod.power(0.5)
        assert oracle.sample_h_omega(m, 64, 7) == oracle.sample_h_omega(m, 64, 7)
        assert oracle.sample_h_omega(m, 64, 7) != oracle.sample_h_omega(m, 64, 8)

    def test_w_r_sample_derivative_admissible(self):
        m = mod.lipschitz(1)
        f = oracle.sample_w_r_h_omega(m, 128, 2, seed=3)
        g = oracle.sample_h_omega(m, 128, 3).values
        # differentiating twice spectrally recovers the zero-mean sample (up to Nyquist)
        c = np.fft.rfft(f.values)
        k = np.arange(c.size)
        back = np.fft.irfft(c * (1j * k) ** 2, n=128)
        ref = np.fft.rfft(g - g.mean())
        ref[-1] = 0
        np.testing.assert_allclose(back, np.fft.irfft(ref, n=128), atol=1e-10)

    @pytest.mark.parametrize("dsl", ["lip:1", "power:0.5", "capped:1"])
    def test_korneichuk_admissible(self, dsl):
        m = mod.parse(dsl)
        f = oracle.korneichuk_function(m, 128)
        assert oracle.max_violation(f, oracle.modulus_matrix(m, 128)) <= 1e-12

    def test_korneichuk_sine_coefficients(self):
        m = mod.capped_linear(1)
        n = 1024
        f = oracle.korneichuk_function(m, n)
        c = np.fft.rfft(f.values) / (n / 2)
        for k in (1, 3, 5):
            # sine coefficient is -Im of the normalized DFT
            assert -c[k].imag == pytest.approx(4 / math.pi * math.sin(k / 2) / k**2, abs=1e-4)


class TestLinearFunctional:
    def test_zero_weights(self):
        value, f = oracle.maximize_linear_functional(mod.lipschitz(1), np.zeros(16))
        assert value == 0.0 and np.all(f.values == 0)

    def test_zero_modulus(self):
        value, _ = oracle.maximize_linear_functional(mod.zero(), conjugation_row(16))
        assert value == pytest.approx(0.0, abs=1e-14)

    def test_unbalanced_rejected(self):
        with pytest.raises(ValueError):
            oracle.maximize_linear_functional(mod.lipschitz(1), np.ones(16))

    @pytest.mark.parametrize("dsl", ["lip:1", "power:0.5", "capped:0.5"])
    @pytest.mark.parametrize("seed", [0, 1])
    def test_matches_full_primal(self, dsl, seed):
        m = mod.parse(dsl)
        c = np.random.default_rng(seed).normal(size=16)
        c -= c.mean()
        value, f = oracle.maximize_linear_functional(m, c)
        assert value == pytest.approx(full_primal_lp(m, c), rel=1e-8)
        assert oracle.max_violation(f, oracle.modulus_matrix(m, 16)) <= 1e-9
        assert float(np.dot(c, f.values)) == pytest.approx(value, rel=1e-12)

    def test_conjugation_row_value(self):
        m = mod.lipschitz(1)
        value, f = oracle.maximize_linear_functional(m, conjugation_row(32))
        assert conjugate_spectral(f).values[0] == pytest.approx(value, rel=1e-10)


class TestVerify:
    def test_lipschitz_m0(self):
        rep = oracle.verify_constant(mod.lipschitz(1), "m0_c", n=128, restarts=8)
        assert 0 <= rep.gap_relative < 0.03 and rep.within_slack
        assert rep.max_violation <= 1e-9
        assert rep.random_best <= rep.lp_value

    def test_gap_shrinks(self):
        gaps = [oracle.verify_constant(mod.lipschitz(1), "m0_c", n=n, restarts=0).gap_relative for n in (64, 128, 256)]
        assert gaps[0] > gaps[1] > gaps[2] > 0

    @pytest.mark.parametrize("dsl", ["power:0.5", "capped:1"])
    def test_other_moduli_within_slack(self, dsl):
        rep = oracle.verify_constant(mod.parse(dsl), "m0_c", n=128, restarts=4)
        assert rep.within_slack

    def test_shift_difference(self):
        rep = oracle.verify_constant(mod.lipschitz(1), "omega0_diff", n=128, restarts=4, t=math.pi / 2)
        assert rep.within_slack and rep.gap_relative < 0.05

    def test_shift_off_grid_rejected(self):
        with pytest.raises(ValueError):
            oracle.verify_constant(mod.lipschitz(1), "omega0_diff", n=64, t=1.0)

    def test_series_lower_bound(self):
        m = mod.capped_linear(1)
        rep = oracle.verify_constant(m, "m_r_l", n=512, restarts=4, r=2)
        assert rep.within_slack
        assert 0 <= rep.gap_relative < 1e-4
        assert rep.random_best <= rep.empirical_best

    def test_divergent_growth(self):
        rep = oracle.verify_constant(mod.log_modulus(), "m0_c", n=256, restarts=2)
        assert rep.target_constant == math.inf
        vals = [v for _, v in rep.growth]
        assert [n for n, _ in rep.growth] == [64, 128, 256]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_unknown_which(self):
        with pytest.raises(ValueError):
            oracle.verify_constant(mod.lipschitz(1), "nope")

    def test_report_dict(self):
        d = oracle.verify_constant(mod.lipschitz(1), "m0_c", n=64, restarts=2).to_dict()
        assert d["which"] == "m0_c" and len(d["achiever"]) == 64


@pytest.mark.parametrize("dsl", ["lip:1", "power:0.5"])
def test_soundness_of_m0(dsl):
    m = mod.parse(dsl)
    bound = C.m0_c(m).value
    for seed in range(25):
        f = oracle.sample_h_omega(m, 256, seed)
        assert norms(conjugate_spectral(f))[0] <= bound * (1 + oracle.DISCRETIZATION_SLACK)


@pytest.mark.parametrize("dsl", ["lip:1", "capped:1", "power:0.5"])
def test_variation_attained_by_korneichuk_integral(dsl):
    # total variation of the conjugate, measured directly on a fine grid
    m = mod.parse(dsl)
    n, r = 4096, 2
    g = oracle.korneichuk_function(m, n).values
    f = oracle._periodic_integral(g - g.mean(), r)
    variation = norms(conjugate_spectral(GridFunction(f)))[2]
    assert variation == pytest.approx(C.variation_sup(m, r).value, rel=1e-4)
