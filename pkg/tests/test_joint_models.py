import math

import numpy as np
import pytest
from scipy import stats

import ordertail as ot
from ordertail.errors import DomainError, InvalidModelError
from oracles import fgm_bivariate_survival_quad


def fgm_pareto(n=2, theta=0.5, alpha=1.0, xmin=1.0, triple=None):
    thetas = {(i, j): theta for i in range(1, n + 1) for j in range(i + 1, n + 1)}
    if triple is not None:
        thetas[tuple(range(1, n + 1))] = triple
    return ot.FGMModel(tuple(ot.Pareto(alpha, xmin) for _ in range(n)), thetas)


class TestValidation:
    def test_fgm_theta_one_valid(self):
        assert ot.validate_model(fgm_pareto(theta=1.0)).ok

    def test_fgm_theta_too_large_invalid(self):
        rep = ot.validate_model(fgm_pareto(theta=1.5))
        assert not rep.ok
        assert "theta" in rep.first_violation or "corner" in rep.first_violation

    def test_fgm_corner_negativity(self):
        # |theta| <= 1 individually but the corner sum dips negative
        m = ot.FGMModel(
            (ot.Pareto(2, 1), ot.Pareto(2, 1), ot.Pareto(2, 1)),
            {(1, 2): -0.8, (1, 3): -0.8, (2, 3): -0.8},
        )
        rep = ot.validate_model(m)
        assert not rep.ok and "corner" in rep.first_violation

    def test_fgm_mixed_alpha_rejected(self):
        m = ot.FGMModel((ot.Pareto(2, 1), ot.Pareto(3, 1)), {(1, 2): 0.5})
        rep = ot.validate_model(m)
        assert not rep.ok and "tail index" in rep.first_violation

    def test_gauss_rho_one_invalid(self):
        m = ot.GaussLognormalW((0, 0), (1, 1), ((1.0, 1.0), (1.0, 1.0)), (1.0, 1.0))
        rep = ot.validate_model(m)
        assert not rep.ok
        assert "rho" in rep.first_violation or "correlation" in rep.first_violation

    def test_gauss_non_pd_invalid(self):
        rho = ((1.0, 0.9, -0.9), (0.9, 1.0, 0.9), (-0.9, 0.9, 1.0))
        m = ot.GaussLognormalW((0, 0, 0), (1, 1, 1), rho, (1.0, 1.0, 1.0))
        rep = ot.validate_model(m)
        assert not rep.ok and "positive definite" in rep.first_violation

    def test_sampling_invalid_model_raises(self):
        m = fgm_pareto(theta=1.5)
        with pytest.raises(InvalidModelError):
            ot.sample_joint(m, np.random.default_rng(0), 10)

    def test_validate_never_raises_on_garbage(self):
        m = ot.GaussLognormalW((0, 0), (1, 1), ((1.0, 0.2),), (1.0, 1.0))
        assert not ot.validate_model(m).ok


class TestSampling:
    def test_gauss_zero_correlation(self):
        m = ot.GaussLognormalW((0, 0), (1, 1), ((1, 0), (0, 1)), (1.0, 1.0))
        x = ot.sample_joint(m, np.random.default_rng(10), 1_000_000)
        logs = np.log(x)
        r = np.corrcoef(logs[:, 0], logs[:, 1])[0, 1]
        assert abs(r) < 3.0 / math.sqrt(1_000_000)

    def test_gauss_respects_rho(self):
        m = ot.GaussLognormalW((0, 0), (1, 2), ((1, 0.6), (0.6, 1)), (1.0, 1.0))
        x = ot.sample_joint(m, np.random.default_rng(11), 500_000)
        logs = np.log(x)
        r = np.corrcoef(logs[:, 0], logs[:, 1])[0, 1]
        assert r == pytest.approx(0.6, abs=0.01)

    def test_fgm_independence_product(self):
        m = fgm_pareto(theta=0.0)
        x = ot.sample_joint(m, np.random.default_rng(12), 1_000_000)
        p = np.mean((x[:, 0] > 2.0) & (x[:, 1] > 2.0))
        se = math.sqrt(0.25 * 0.75 / 1_000_000)
        assert abs(p - 0.25) < 3.0 * se

    def test_fgm_dependent_joint_tail(self):
        m = fgm_pareto(theta=0.5)
        x = ot.sample_joint(m, np.random.default_rng(13), 1_000_000)
        p = np.mean((x[:, 0] > 2.0) & (x[:, 1] > 2.0))
        se = math.sqrt(0.28125 * (1 - 0.28125) / 1_000_000)
        assert abs(p - 0.28125) < 3.0 * se

    def test_fgm_acceptance_rate(self):
        m = fgm_pareto(n=3, theta=0.5, alpha=2.0, triple=0.5)
        rng = np.random.default_rng(14)
        u = rng.random((200_000, 3))
        accept = rng.random(200_000)
        rate = np.mean(accept * m.envelope <= m.copula_density(u))
        assert rate >= 1.0 / m.envelope - 0.01

    def test_component_marginals_match(self):
        # KS of each sampled component against its marginal law
        m = ot.GaussLognormalW(
            (0.0, 0.5),
            (1.0, 0.8),
            ((1, 0.3), (0.3, 1)),
            (1.0, ot.ScaledBeta(2.0, 1.0, 1.0)),
        )
        x = ot.sample_joint(m, np.random.default_rng(15), 100_000)
        margs = m.marginals()
        crit = 1.628 / math.sqrt(100_000)
        for i, marg in enumerate(margs):
            cdf = lambda v, marg=marg: 1.0 - np.asarray(marg.survival(v), dtype=float)
            assert stats.kstest(x[:, i], cdf).statistic < crit

    def test_comonotone_weights_shared_uniform(self):
        spec = ot.DiscreteAtoms((0.5, 1.0), (0.5, 0.5))
        m = ot.GaussLognormalW(
            (0, 0), (1, 1), ((1, 0), (0, 1)), (spec, spec), w_coupling="comonotone"
        )
        x = ot.sample_joint(m, np.random.default_rng(16), 50_000)
        # same atom picked on both coordinates: |log X_i| <= 0.5*|Y| happens jointly
        rng = np.random.default_rng(16)
        z = rng.standard_normal((50_000, 2))
        u = rng.random(50_000)
        w = np.where(u <= 0.5, 0.5, 1.0)
        np.testing.assert_allclose(np.log(x), w[:, None] * z, rtol=1e-12, atol=1e-12)


class TestPairwiseJointSurvival:
    def test_fgm_closed_form_vs_quadrature(self):
        m = fgm_pareto(theta=0.5)
        got = ot.pairwise_joint_survival(m, 1, 2, 2.0, 2.0)
        assert got == pytest.approx(0.28125, rel=1e-12)
        oracle = fgm_bivariate_survival_quad(0.5, 0.5, 0.5)
        assert got == pytest.approx(oracle, rel=1e-9)

    def test_fgm_theta_zero_is_product(self):
        m = fgm_pareto(theta=0.0, alpha=2.0)
        for xi, xj in [(1.5, 2.0), (3.0, 10.0)]:
            got = ot.pairwise_joint_survival(m, 1, 2, xi, xj)
            assert got == pytest.approx((xi**-2) * (xj**-2), rel=1e-12)

    def test_gauss_independent_factorizes(self):
        m = ot.GaussLognormalW((0, 0), (1, 1), ((1, 0), (0, 1)), (1.0, 1.0))
        got = ot.pairwise_joint_survival(m, 1, 2, math.e, math.e)
        assert got == pytest.approx(stats.norm.sf(1.0) ** 2, rel=1e-10)

    def test_gauss_correlated_vs_scipy_mvn(self):
        m = ot.GaussLognormalW((0, 0), (1, 1), ((1, 0.6), (0.6, 1)), (1.0, 1.0))
        a, b = 0.5, 0.3
        got = ot.pairwise_joint_survival(m, 1, 2, math.exp(a), math.exp(b))
        mvn = stats.multivariate_normal(mean=[0, 0], cov=[[1, 0.6], [0.6, 1]])
        expect = 1.0 - stats.norm.cdf(a) - stats.norm.cdf(b) + mvn.cdf([a, b])
        assert got == pytest.approx(expect, rel=1e-8)

    def test_unsupported_returns_none(self):
        m = ot.GaussLognormalW(
            (0, 0), (1, 1), ((1, 0), (0, 1)), (ot.ScaledBeta(1, 1, 1), 1.0)
        )
        assert ot.pairwise_joint_survival(m, 1, 2, 2.0, 2.0) is None

    def test_fgm_sampler_agrees_over_theta_grid(self):
        # the closed form is the sampler's law: MC agreement at several points
        for theta in (-0.5, 0.0, 0.5, 1.0):
            m = fgm_pareto(theta=theta, alpha=2.0)
            x = ot.sample_joint(m, np.random.default_rng(100 + int(theta * 2)), 400_000)
            for xi, xj in [(1.5, 1.5), (2.0, 3.0)]:
                p = ot.pairwise_joint_survival(m, 1, 2, xi, xj)
                p_hat = np.mean((x[:, 0] > xi) & (x[:, 1] > xj))
                se = math.sqrt(p * (1 - p) / 400_000)
                assert abs(p_hat - p) < 3.5 * se

    def test_same_index_rejected(self):
        with pytest.raises(DomainError):
            ot.pairwise_joint_survival(fgm_pareto(), 1, 1, 2.0, 2.0)


class TestMaxSurvival:
    def test_independent_stable(self):
        m = ot.IndependentModel((ot.Pareto(2, 1), ot.Pareto(2, 1)))
        assert m.max_survival(10.0) == pytest.approx(0.02 - 1e-4, rel=1e-12)

    def test_fgm_inclusion_exclusion_vs_mc(self):
        m = fgm_pareto(n=3, theta=0.5, alpha=2.0, triple=0.5)
        x = ot.sample_joint(m, np.random.default_rng(21), 1_000_000)
        mx = x.max(axis=1)
        for lvl in (3.0, 6.0):
            p = m.max_survival(lvl)
            p_hat = np.mean(mx > lvl)
            se = math.sqrt(p * (1 - p) / 1_000_000)
            assert abs(p_hat - p) < 3.5 * se

    def test_gauss_trivariate_vs_mc(self):
        m = ot.GaussLognormalW(
            (0, 0, 0),
            (1, 1, 0.5),
            ((1, 0.3, 0.3), (0.3, 1, 0.3), (0.3, 0.3, 1)),
            (1.0, 1.0, 1.0),
        )
        x = ot.sample_joint(m, np.random.default_rng(22), 1_000_000)
        mx = x.max(axis=1)
        for lvl in (2.0, 6.0):
            p = m.max_survival(lvl)
            p_hat = np.mean(mx > lvl)
            se = math.sqrt(p * (1 - p) / 1_000_000)
            assert abs(p_hat - p) < 3.5 * se


class TestDominatingSet:
    def test_sigma_then_mu(self):
        m = ot.GaussLognormalW(
            (0.0, 1.0, 5.0), (2.0, 2.0, 1.0), np.eye(3).tolist(), (1.0, 1.0, 1.0)
        )
        lam = ot.dominating_set(m)
        assert lam.indices == (2,)
        assert lam.sigma == 2.0 and lam.mu == 1.0

    def test_all_equal(self):
        m = ot.GaussLognormalW((0, 0, 0), (1, 1, 1), np.eye(3).tolist(), (1.0, 1.0, 1.0))
        assert ot.dominating_set(m).indices == (1, 2, 3)

    def test_tie_tolerance(self):
        m = ot.GaussLognormalW(
            (0.0, 1.0, 0.0), (1.0, 1.0 + 1e-15, 1.0), np.eye(3).tolist(), (1.0, 1.0, 1.0)
        )
        lam = ot.dominating_set(m)
        assert lam.indices == (2,)  # sigma tie within tolerance, mu decides

    def test_weight_endpoint_folded(self):
        # component 2 has smaller sigma but a larger weight endpoint
        m = ot.GaussLognormalW(
            (0.0, 0.0),
            (1.0, 0.8),
            ((1, 0), (0, 1)),
            (1.0, ot.DiscreteAtoms((2.0,), (1.0,))),
        )
        lam = ot.dominating_set(m)
        assert lam.indices == (2,) and lam.sigma == pytest.approx(1.6)

    def test_permutation_invariance_of_nondominant(self):
        rho = np.eye(4).tolist()
        a = ot.GaussLognormalW((0, 1, 2, 0), (2, 1, 1, 1), rho, (1.0,) * 4)
        b = ot.GaussLognormalW((0, 2, 1, 0), (2, 1, 1, 1), rho, (1.0,) * 4)
        assert ot.dominating_set(a) == ot.dominating_set(b)

    def test_requires_gauss_model(self):
        with pytest.raises(DomainError):
            ot.dominating_set(fgm_pareto())


class TestOrthant:
    def test_deep_tail_positive_and_monotone(self):
        vals = [ot.bivariate_orthant_survival(a, a, 0.5) for a in (2.0, 4.0, 6.0, 8.0)]
        assert all(v > 0 for v in vals)
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_negative_correlation(self):
        got = ot.bivariate_orthant_survival(0.0, 0.0, -0.5)
        mvn = stats.multivariate_normal(mean=[0, 0], cov=[[1, -0.5], [-0.5, 1]])
        expect = 1.0 - 0.5 - 0.5 + mvn.cdf([0.0, 0.0])
        assert got == pytest.approx(expect, rel=1e-8)

    def test_comonotone_limit(self):
        assert ot.bivariate_orthant_survival(1.0, 2.0, 1.0) == pytest.approx(
            stats.norm.sf(2.0), rel=1e-12
        )
