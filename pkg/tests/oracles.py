"""Independent reference computations used by the tests.

Everything here is written against scipy/numpy directly, without touching the
library's own evaluation paths, so a test comparing the two is a genuine
cross-check.
"""

import numpy as np
from scipy import integrate, stats


def lognormal_sum_tail(x, mu=0.0, sigma=1.0):
    """P(X1 + X2 > x) for iid lognormals by exact decomposition.

    P(S > x) = 2 * int_0^{x/2} sf(x-y) pdf(y) dy + sf(x/2)^2; both summands
    stay far from underflow at the levels probed here.
    """

    def sf(v):
        return stats.norm.sf((np.log(v) - mu) / sigma)

    def pdf(v):
        z = (np.log(v) - mu) / sigma
        return np.exp(-0.5 * z * z) / (v * sigma * np.sqrt(2.0 * np.pi))

    inner, err = integrate.quad(
        lambda y: sf(x - y) * pdf(y), 0.0, x / 2.0, epsabs=0.0, epsrel=1e-11, limit=400
    )
    return 2.0 * inner + sf(x / 2.0) ** 2


def fgm_bivariate_survival_quad(theta, ui, uj):
    """P(U > ui, V > uj) under a bivariate FGM copula by 2-D quadrature."""
    val, _ = integrate.dblquad(
        lambda v, u: 1.0 + theta * (1.0 - 2.0 * u) * (1.0 - 2.0 * v),
        ui,
        1.0,
        lambda _: uj,
        lambda _: 1.0,
        epsabs=1e-12,
        epsrel=1e-10,
    )
    return val


def binom_quantile_ci(sorted_values, q, confidence=0.99):
    """Distribution-free CI for the q-quantile from an ordered sample."""
    n = len(sorted_values)
    alpha = 1.0 - confidence
    lo = int(stats.binom.ppf(alpha / 2.0, n, q))
    hi = int(stats.binom.ppf(1.0 - alpha / 2.0, n, q)) + 1
    lo = min(max(lo, 1), n)
    hi = min(max(hi, 1), n)
    return sorted_values[lo - 1], sorted_values[hi - 1]
