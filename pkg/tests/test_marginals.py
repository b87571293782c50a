import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

import ordertail as ot
from ordertail.errors import DomainError

PHIBAR_1 = stats.norm.sf(1.0)  # 0.15865525393145707


class TestTailEval:
    def test_exponential_closed_form(self):
        s, ls = ot.tail_eval(ot.Exponential(1.0), 1.0)
        assert s == pytest.approx(math.exp(-1.0), rel=1e-12)
        assert ls == pytest.approx(-1.0, rel=1e-12)

    def test_lognormal_standard_normal_tail(self):
        s, _ = ot.tail_eval(ot.Lognormal(0.0, 1.0), math.e)
        assert s == pytest.approx(PHIBAR_1, rel=1e-12)

    def test_randomized_degenerate_matches_lognormal(self):
        m = ot.RandomizedLognormal(0.0, 1.0, ot.DiscreteAtoms((1.0,), (1.0,)))
        s, _ = ot.tail_eval(m, math.e)
        assert s == pytest.approx(PHIBAR_1, rel=1e-12)

    def test_randomized_beta_quadrature_vs_mc(self):
        # oracle: direct simulation of (W, Y), independent of the quadrature
        m = ot.RandomizedLognormal(0.0, 1.0, ot.ScaledBeta(1.0, 1.0, 1.0))
        s, _ = ot.tail_eval(m, math.e)
        rng = np.random.default_rng(20250809)
        n = 10_000_000
        w = rng.random(n)
        y = rng.standard_normal(n)
        p_hat = np.mean(w * y > 1.0)
        se = math.sqrt(p_hat * (1.0 - p_hat) / n)
        assert abs(s - p_hat) < 3.0 * se

    def test_below_support_gives_one(self):
        for m in [ot.Pareto(2.0, 1.0), ot.Exponential(1.0), ot.HeavyWeibull(1.0, 0.5)]:
            s, ls = ot.tail_eval(m, -3.0)
            assert s == 1.0 and ls == 0.0

    def test_log_and_linear_consistent(self):
        ms = [
            ot.Exponential(0.7),
            ot.Pareto(2.5, 1.3),
            ot.Lognormal(0.2, 1.1),
            ot.HeavyWeibull(0.9, 0.4),
            ot.RandomizedLognormal(0.0, 1.0, ot.ScaledBeta(2.0, 1.0, 1.0)),
        ]
        for m in ms:
            for x in [1.5, 4.0, 20.0, 300.0]:
                s, ls = ot.tail_eval(m, x)
                if s > 1e-300:
                    assert math.exp(ls) == pytest.approx(s, rel=1e-12)


class TestQuantile:
    def test_pareto_99(self):
        assert ot.quantile(ot.Pareto(1.0, 1.0), 0.99) == pytest.approx(100.0, rel=1e-12)

    def test_exponential_unit(self):
        q = 1.0 - math.exp(-1.0)
        assert ot.quantile(ot.Exponential(1.0), q) == pytest.approx(1.0, rel=1e-12)

    def test_randomized_vs_empirical_quantile(self):
        from oracles import binom_quantile_ci

        m = ot.RandomizedLognormal(0.0, 1.0, ot.ScaledBeta(1.0, 1.0, 1.0))
        q = ot.quantile(m, 0.999)
        rng = np.random.default_rng(77)
        draws = np.sort(ot.sample_marginal(m, rng, 10_000_000))
        lo, hi = binom_quantile_ci(draws, 0.999)
        assert lo <= q <= hi

    def test_quantile_survival_roundtrip(self):
        models = [
            ot.Exponential(1.0),
            ot.Pareto(2.0, 1.0),
            ot.Lognormal(0.0, 1.0),
            ot.HeavyWeibull(1.0, 0.5),
            ot.RandomizedLognormal(0.0, 1.0, ot.ScaledBeta(2.0, 1.0, 1.0)),
        ]
        for m in models:
            for q in (0.5, 0.9, 0.99, 0.999):
                s = float(np.exp(m.log_survival(ot.quantile(m, q))))
                assert abs(s - (1.0 - q)) <= 1e-9

    def test_rejects_bad_level(self):
        with pytest.raises(DomainError):
            ot.quantile(ot.Exponential(1.0), 1.0)


class TestSampling:
    def test_exponential_ks(self):
        rng = np.random.default_rng(11)
        draws = ot.sample_marginal(ot.Exponential(1.0), rng, 100_000)
        stat = stats.kstest(draws, stats.expon.cdf).statistic
        assert stat < 1.628 / math.sqrt(100_000)  # 1% critical value

    def test_pareto_mean(self):
        rng = np.random.default_rng(5)
        draws = ot.sample_marginal(ot.Pareto(2.0, 1.0), rng, 1_000_000)
        se = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean() - 2.0) < 3.0 * se

    def test_deterministic_given_seed(self):
        for m in [ot.Lognormal(0.0, 1.0), ot.RandomizedLognormal(0.0, 1.0, ot.ScaledBeta(2, 1, 1))]:
            a = ot.sample_marginal(m, np.random.default_rng(123), 10)
            b = ot.sample_marginal(m, np.random.default_rng(123), 10)
            np.testing.assert_array_equal(a, b)


class TestScaling:
    def test_lognormal_substitution(self):
        h = ot.LognormalScaling(2.0, 0.0)
        assert ot.scaling_eval(h, math.e**2) == pytest.approx(2.0 * math.e**2, rel=1e-12)

    def test_constant(self):
        assert ot.scaling_eval(ot.ConstantScaling(1.0), 1000.0) == 1.0

    def test_power_of(self):
        h = ot.PowerOfScaling(ot.LognormalScaling(1.0, 0.0), 0.5)
        assert ot.scaling_eval(h, math.e**2) == pytest.approx(math.sqrt(math.e**2 / 2.0), rel=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            ot.scaling_eval(ot.LognormalScaling(1.0, 0.0), 1.0)  # needs x > e^mu
        with pytest.raises(DomainError):
            ot.PowerOfScaling(ot.PowerOfScaling(ot.ConstantScaling(1.0), 0.5), 0.5)
        with pytest.raises(DomainError):
            ot.PowerScaling(1.0, 1.0)

    def test_small_o_at_extreme_x(self):
        # h(x)/x = 1/log x drops under 1% beyond x = e^(100 sigma^2 + mu)
        h = ot.LognormalScaling(1.0, 0.0)
        x = math.exp(101.0)
        assert ot.scaling_eval(h, x) / x < 0.01


class TestClassTags:
    def test_family_tags(self):
        assert ot.Pareto(2, 1).tags == {"L", "D", "R_minus_alpha"}
        assert ot.Lognormal(0, 1).tags == {"L", "GMDA"}
        assert ot.HeavyWeibull(1, 0.5).tags == {"L", "GMDA"}
        assert ot.Exponential(1).tags == {"GMDA"}
        assert "L" not in ot.Exponential(1).tags
        rl = ot.RandomizedLognormal(0, 1, ot.ScaledBeta(1, 1, 1))
        assert rl.tags == {"L"}


class TestInvariants:
    def test_log_survival_monotone(self):
        grid = np.geomspace(0.5, 500.0, 60)
        for m in [
            ot.Exponential(1.0),
            ot.Pareto(2.0, 1.0),
            ot.Lognormal(0.0, 1.0),
            ot.HeavyWeibull(1.0, 0.5),
            ot.RandomizedLognormal(0.0, 1.0, ot.ScaledBeta(2.0, 1.0, 1.0)),
        ]:
            ls = np.asarray(m.log_survival(grid), dtype=float)
            assert np.all(np.diff(ls) <= 1e-12)

    def test_exponential_gumbel_limit_exact(self):
        # with h = 1/rate the shifted survival ratio is e^{-y} for every x, y
        m = ot.Exponential(2.0)
        h = m.gmda_scaling()
        assert isinstance(h, ot.ConstantScaling) and h.c == 0.5
        for x in [1.0, 5.0, 40.0]:
            for y in [-1.0, 0.5, 2.0, 7.0]:
                ratio = math.exp(float(m.log_survival(x + y * h.c)) - float(m.log_survival(x)))
                assert ratio == pytest.approx(math.exp(-y), rel=1e-12)

    def test_randomized_tail_dominates_endpoint_bound(self):
        # mixture tail >= normal-tail bound at every interior weight level
        m = ot.RandomizedLognormal(0.0, 1.0, ot.ScaledBeta(1.0, 1.0, 1.0))
        for x in [3.0, 10.0, 50.0]:
            s, _ = ot.tail_eval(m, x)
            for w in [0.3, 0.5, 0.7, 0.9, 0.99]:
                bound = stats.norm.sf(math.log(x) / w) * (1.0 - w)
                assert s >= bound

    def test_weight_atoms_validation(self):
        with pytest.raises(DomainError):
            ot.DiscreteAtoms((0.5, 1.0), (0.6, 0.6))
        with pytest.raises(DomainError):
            ot.DiscreteAtoms((-0.5,), (1.0,))
        with pytest.raises(DomainError):
            ot.ScaledBeta(0.0, 1.0, 1.0)


@given(
    q=st.floats(min_value=0.01, max_value=0.99),
    alpha=st.floats(min_value=0.5, max_value=4.0),
    xmin=st.floats(min_value=0.1, max_value=5.0),
)
@settings(max_examples=60, deadline=None)
def test_pareto_quantile_inverts_survival(q, alpha, xmin):
    m = ot.Pareto(alpha, xmin)
    x = ot.quantile(m, q)
    s, _ = ot.tail_eval(m, x)
    assert s == pytest.approx(1.0 - q, rel=1e-9)


@given(
    rate=st.floats(min_value=0.1, max_value=5.0),
    shape=st.floats(min_value=0.05, max_value=0.95),
    q1=st.floats(min_value=0.05, max_value=0.9),
    dq=st.floats(min_value=0.01, max_value=0.09),
)
@settings(max_examples=60, deadline=None)
def test_heavy_weibull_quantile_monotone(rate, shape, q1, dq):
    m = ot.HeavyWeibull(rate, shape)
    assert ot.quantile(m, q1 + dq) > ot.quantile(m, q1)
