"""Univariate tail models with numerically stable survival evaluation.

Five parametric families are provided. Each knows its survival function (in
linear and log space), its quantile function, an exact sampler, and, where one
exists, a scaling-function descriptor for the Gumbel max-domain of attraction.

Class membership tags:

``L``
    long-tailed: survival insensitive to bounded shifts.
``D``
    dominatedly varying survival.
``R_minus_alpha``
    pure power tail with index ``-alpha``.
``GMDA``
    Gumbel max-domain of attraction with a known scaling function.

The exponential family is deliberately tagged GMDA but not L (its survival is
not shift-insensitive); it serves as the negative control throughout the
diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import stats as _stats
from scipy.special import log_ndtr, ndtr, ndtri

from .errors import BracketingError, DomainError, QuadratureError

TAG_L = "L"
TAG_D = "D"
TAG_R = "R_minus_alpha"
TAG_GMDA = "GMDA"

# Tolerances for the randomized-lognormal mixture quadrature: survival values
# down to ~1e-12 are needed on tail grids, so the absolute floor sits well
# below that.
_QUAD_EPSABS = 1e-14
_QUAD_EPSREL = 1e-10

# Relative tolerance (on log x) of the generic quantile bisection.
_QUANTILE_LOG_RTOL = 1e-10


def norm_log_sf(z):
    """log of the standard normal survival, stable for large ``z``."""
    return log_ndtr(-np.asarray(z, dtype=float))


def norm_sf(z):
    return ndtr(-np.asarray(z, dtype=float))


# ---------------------------------------------------------------------------
# weight-variable specifications (the W in X = exp(W*Y))
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteAtoms:
    """Finite support on [0, upper]; atoms are sorted by value."""

    values: tuple
    probs: tuple

    def __post_init__(self):
        v = tuple(float(x) for x in self.values)
        p = tuple(float(x) for x in self.probs)
        if len(v) == 0 or len(v) != len(p):
            raise DomainError("atoms need matching nonempty values and probs")
        if any(x < 0 for x in v):
            raise DomainError("atom values must be nonnegative")
        if any(q < 0 for q in p) or abs(sum(p) - 1.0) > 1e-12:
            raise DomainError("atom probabilities must be nonnegative and sum to 1")
        if max(v) <= 0:
            raise DomainError("upper endpoint must be positive")
        order = sorted(range(len(v)), key=lambda i: v[i])
        object.__setattr__(self, "values", tuple(v[i] for i in order))
        object.__setattr__(self, "probs", tuple(p[i] for i in order))

    @property
    def upper(self):
        return self.values[-1]

    @property
    def is_degenerate(self):
        return len(self.values) == 1

    def quantile(self, u):
        cum = np.cumsum(self.probs)
        idx = np.searchsorted(cum, np.asarray(u, dtype=float), side="left")
        idx = np.minimum(idx, len(self.values) - 1)
        return np.asarray(self.values, dtype=float)[idx]

    def to_dict(self):
        return {"type": "atoms", "values": list(self.values), "probs": list(self.probs)}

    def sample(self, rng, size=None):
        return self.quantile(rng.random(size))

    def expect_survival(self, t, mu, sigma):
        """E_W P(w*Y > t) for Y ~ N(mu, sigma^2)."""
        total = 0.0
        for w, p in zip(self.values, self.probs):
            if p == 0.0:
                continue
            if w == 0.0:
                total += p if t < 0 else 0.0
            else:
                total += p * float(ndtr(-(t - w * mu) / (w * sigma)))
        return total


@dataclass(frozen=True)
class ScaledBeta:
    """Beta(a, b) stretched onto [0, upper]."""

    a: float
    b: float
    upper: float

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0 or self.upper <= 0:
            raise DomainError("ScaledBeta requires a > 0, b > 0, upper > 0")

    @property
    def is_degenerate(self):
        return False

    def to_dict(self):
        return {"type": "beta", "a": self.a, "b": self.b, "upper": self.upper}

    def quantile(self, u):
        return self.upper * _stats.beta.ppf(np.asarray(u, dtype=float), self.a, self.b)

    def sample(self, rng, size=None):
        return self.quantile(rng.random(size))

    def pdf(self, w):
        w = np.asarray(w, dtype=float)
        return _stats.beta.pdf(w / self.upper, self.a, self.b) / self.upper

    def expect_survival(self, t, mu, sigma):
        def integrand(w):
            return float(ndtr(-(t - w * mu) / (w * sigma))) * float(self.pdf(w))

        val, err = integrate.quad(
            integrand, 0.0, self.upper, epsabs=_QUAD_EPSABS, epsrel=_QUAD_EPSREL, limit=200
        )
        if err > _QUAD_EPSABS + 10.0 * _QUAD_EPSREL * max(abs(val), 1e-300):
            raise QuadratureError(
                f"mixture survival quadrature stalled (error estimate {err:.3e})",
                achieved=err,
            )
        return min(max(val, 0.0), 1.0)

    def log_expect_survival(self, t, mu, sigma):
        """Deep-tail fallback: fixed-order Gauss-Legendre in log space."""
        nodes, weights = np.polynomial.legendre.leggauss(400)
        w = 0.5 * self.upper * (nodes + 1.0)
        halfwidth = 0.5 * self.upper
        with np.errstate(divide="ignore"):
            log_pdf = np.log(self.pdf(w))
        log_tail = norm_log_sf((t - w * mu) / (w * sigma))
        log_terms = log_tail + log_pdf + np.log(weights * halfwidth)
        finite = np.isfinite(log_terms)
        if not np.any(finite):
            return -np.inf
        m = np.max(log_terms[finite])
        return m + math.log(np.sum(np.exp(log_terms[finite] - m)))


# ---------------------------------------------------------------------------
# scaling functions (auxiliary functions of the Gumbel limit)
# ---------------------------------------------------------------------------


class ScalingFunction:
    """Base for auxiliary-function descriptors; subclasses define evaluate()."""

    form = "base"
    x_lo = 0.0

    def evaluate(self, x):  # pragma: no cover - overridden
        raise NotImplementedError

    def __call__(self, x):
        return scaling_eval(self, x)

    def to_dict(self):  # pragma: no cover - overridden
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantScaling(ScalingFunction):
    c: float
    form = "constant"

    def __post_init__(self):
        if self.c <= 0:
            raise DomainError("constant scaling must be positive")

    def evaluate(self, x):
        return np.full_like(np.asarray(x, dtype=float), self.c)

    def to_dict(self):
        return {"form": "constant", "c": self.c}


@dataclass(frozen=True)
class PowerScaling(ScalingFunction):
    coef: float
    exponent: float
    form = "power"

    def __post_init__(self):
        if self.coef <= 0 or not 0.0 < self.exponent < 1.0:
            raise DomainError("power scaling needs coef > 0 and exponent in (0,1)")

    def evaluate(self, x):
        return self.coef * np.asarray(x, dtype=float) ** self.exponent

    def to_dict(self):
        return {"form": "power", "coef": self.coef, "exponent": self.exponent}


@dataclass(frozen=True)
class LognormalScaling(ScalingFunction):
    """h(x) = sigma^2 x / (log x - mu), defined for x > e^mu."""

    sigma: float
    mu: float
    form = "lognormal"

    def __post_init__(self):
        if self.sigma <= 0:
            raise DomainError("lognormal scaling needs sigma > 0")
        object.__setattr__(self, "x_lo", math.exp(self.mu))

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return self.sigma**2 * x / (np.log(x) - self.mu)

    def to_dict(self):
        return {"form": "lognormal", "sigma": self.sigma, "mu": self.mu}


@dataclass(frozen=True)
class WeibullScaling(ScalingFunction):
    """h(x) = x^(1-shape) / (rate * shape), the reciprocal Weibull hazard."""

    rate: float
    shape: float
    form = "weibull"

    def __post_init__(self):
        if self.rate <= 0 or not 0.0 < self.shape < 1.0:
            raise DomainError("weibull scaling needs rate > 0 and shape in (0,1)")

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return x ** (1.0 - self.shape) / (self.rate * self.shape)

    def to_dict(self):
        return {"form": "weibull", "rate": self.rate, "shape": self.shape}


@dataclass(frozen=True)
class PowerOfScaling(ScalingFunction):
    """h(x) = base(x)^p for p in (0,1); nesting depth is capped at one."""

    base: ScalingFunction
    p: float
    form = "power_of"

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise DomainError("power_of needs p in (0,1)")
        if isinstance(self.base, PowerOfScaling):
            raise DomainError("power_of may not nest another power_of")
        object.__setattr__(self, "x_lo", self.base.x_lo)

    def evaluate(self, x):
        return self.base.evaluate(x) ** self.p

    def to_dict(self):
        return {"form": "power_of", "base": self.base.to_dict(), "p": self.p}


def scaling_eval(h, x):
    """Evaluate a scaling function, rejecting points outside its domain."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= h.x_lo):
        raise DomainError(f"scaling function '{h.form}' requires x > {h.x_lo}")
    out = h.evaluate(arr)
    if np.isscalar(x) or arr.ndim == 0:
        return float(out)
    return out


# ---------------------------------------------------------------------------
# marginal families
# ---------------------------------------------------------------------------


class Marginal:
    """Base class: immutable after construction, safe to share across workers."""

    tags = frozenset()
    nonnegative = True

    def log_survival(self, x):  # pragma: no cover - overridden
        raise NotImplementedError

    def survival(self, x):
        return np.exp(self.log_survival(x))

    def quantile(self, q):  # pragma: no cover - overridden
        raise NotImplementedError

    def sample(self, rng, size=None):  # pragma: no cover - overridden
        raise NotImplementedError

    def gmda_scaling(self):
        return None

    def to_dict(self):  # pragma: no cover - overridden
        raise NotImplementedError


def _check_q(q):
    if not 0.0 < q < 1.0:
        raise DomainError("quantile level must lie strictly between 0 and 1")


@dataclass(frozen=True)
class Exponential(Marginal):
    rate: float
    tags = frozenset({TAG_GMDA})

    def __post_init__(self):
        if self.rate <= 0:
            raise DomainError("exponential rate must be positive")

    def log_survival(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, -self.rate * x, 0.0)

    def quantile(self, q):
        _check_q(q)
        return -math.log1p(-q) / self.rate

    def sample(self, rng, size=None):
        return -np.log1p(-rng.random(size)) / self.rate

    def gmda_scaling(self):
        return ConstantScaling(1.0 / self.rate)

    def to_dict(self):
        return {"family": "exponential", "rate": self.rate}


@dataclass(frozen=True)
class Pareto(Marginal):
    """Survival (xmin/x)^alpha for x >= xmin."""

    alpha: float
    xmin: float
    tags = frozenset({TAG_L, TAG_D, TAG_R})

    def __post_init__(self):
        if self.alpha <= 0 or self.xmin <= 0:
            raise DomainError("pareto needs alpha > 0 and xmin > 0")

    def log_survival(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            ls = -self.alpha * (np.log(x) - math.log(self.xmin))
        return np.where(x > self.xmin, ls, 0.0)

    def quantile(self, q):
        _check_q(q)
        return self.xmin * (1.0 - q) ** (-1.0 / self.alpha)

    def sample(self, rng, size=None):
        return self.xmin * (1.0 - rng.random(size)) ** (-1.0 / self.alpha)

    def to_dict(self):
        return {"family": "pareto", "alpha": self.alpha, "xmin": self.xmin}


@dataclass(frozen=True)
class Lognormal(Marginal):
    mu: float
    sigma: float
    tags = frozenset({TAG_L, TAG_GMDA})

    def __post_init__(self):
        if self.sigma <= 0:
            raise DomainError("lognormal needs sigma > 0")

    def log_survival(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (np.log(x) - self.mu) / self.sigma
            ls = log_ndtr(-z)
        return np.where(x > 0, ls, 0.0)

    def quantile(self, q):
        _check_q(q)
        return math.exp(self.mu + self.sigma * float(ndtri(q)))

    def sample(self, rng, size=None):
        return np.exp(self.mu + self.sigma * rng.standard_normal(size))

    def gmda_scaling(self):
        return LognormalScaling(self.sigma, self.mu)

    def to_dict(self):
        return {"family": "lognormal", "mu": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class HeavyWeibull(Marginal):
    """Survival exp(-rate * x^shape) with shape in (0,1): heavy-tailed Weibull."""

    rate: float
    shape: float
    tags = frozenset({TAG_L, TAG_GMDA})

    def __post_init__(self):
        if self.rate <= 0 or not 0.0 < self.shape < 1.0:
            raise DomainError("heavy weibull needs rate > 0 and shape in (0,1)")

    def log_survival(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x > 0, -self.rate * np.abs(x) ** self.shape, 0.0)

    def quantile(self, q):
        _check_q(q)
        return (-math.log1p(-q) / self.rate) ** (1.0 / self.shape)

    def sample(self, rng, size=None):
        return (-np.log1p(-rng.random(size)) / self.rate) ** (1.0 / self.shape)

    def gmda_scaling(self):
        return WeibullScaling(self.rate, self.shape)

    def to_dict(self):
        return {"family": "heavy_weibull", "rate": self.rate, "shape": self.shape}


@dataclass(frozen=True)
class RandomizedLognormal(Marginal):
    """X = exp(W*Y) with Y ~ N(mu, sigma^2) and W an independent weight on [0, wbar].

    The survival at x is the mixture integral of normal tails over the weight
    law, evaluated by adaptive quadrature (or an exact sum over atoms). The
    scaling descriptor folds the weight's upper endpoint into the lognormal
    parameters.
    """

    mu: float
    sigma: float
    w_spec: object
    tags = frozenset({TAG_L})

    def __post_init__(self):
        if self.sigma <= 0:
            raise DomainError("randomized lognormal needs sigma > 0")
        if not isinstance(self.w_spec, (DiscreteAtoms, ScaledBeta)):
            raise DomainError("w_spec must be DiscreteAtoms or ScaledBeta")

    def _survival_scalar(self, x):
        if x <= 0:
            return 1.0
        t = math.log(x)
        return self.w_spec.expect_survival(t, self.mu, self.sigma)

    def survival(self, x):
        if np.isscalar(x) or np.asarray(x).ndim == 0:
            return self._survival_scalar(float(x))
        return np.array([self._survival_scalar(float(v)) for v in np.asarray(x)])

    def log_survival(self, x):
        def one(v):
            s = self._survival_scalar(v)
            if s > 0.0:
                return math.log(s)
            if isinstance(self.w_spec, ScaledBeta):
                return self.w_spec.log_expect_survival(math.log(v), self.mu, self.sigma)
            return -math.inf

        if np.isscalar(x) or np.asarray(x).ndim == 0:
            return one(float(x))
        return np.array([one(float(v)) for v in np.asarray(x)])

    def quantile(self, q):
        _check_q(q)
        # Bracket by doubling from the endpoint-lognormal median, then bisect
        # on log x: robust for heavy tails.
        seed = math.exp(self.w_spec.upper * self.mu)
        return _bisect_quantile(self._survival_scalar, q, seed)

    def sample(self, rng, size=None):
        w = self.w_spec.sample(rng, size)
        y = self.mu + self.sigma * rng.standard_normal(size)
        return np.exp(w * y)

    def gmda_scaling(self):
        wbar = self.w_spec.upper
        return LognormalScaling(wbar * self.sigma, wbar * self.mu)

    def to_dict(self):
        return {
            "family": "randomized_lognormal",
            "mu": self.mu,
            "sigma": self.sigma,
            "w": self.w_spec.to_dict(),
        }


def _bisect_quantile(survival, q, seed, max_doublings=200):
    """inf{x > 0 : survival(x) <= 1-q} by doubling bracket + log-x bisection."""
    target = 1.0 - q
    lo = hi = max(seed, 1e-300)
    if survival(hi) > target:
        for _ in range(max_doublings):
            lo, hi = hi, hi * 2.0
            if survival(hi) <= target:
                break
        else:
            raise BracketingError("quantile bracket: no upper bound found")
    else:
        for _ in range(max_doublings):
            hi, lo = lo, lo / 2.0
            if survival(lo) > target:
                break
        else:
            # survival <= target arbitrarily close to 0: the quantile is at
            # the lower end of the support.
            return lo
    while math.log(hi / lo) > _QUANTILE_LOG_RTOL * max(1.0, abs(math.log(hi))):
        mid = math.sqrt(lo * hi)
        if survival(mid) <= target:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# operations (free-function surface over the classes above)
# ---------------------------------------------------------------------------


def tail_eval(m, x):
    """Survival and log-survival of a marginal at ``x``.

    Returns the pair ``(P(X > x), log P(X > x))``. The two are consistent by
    construction (the closed-form families derive the linear value from the
    stable log form; the mixture family derives the log from the quadrature
    value until it underflows, then switches to a log-space rule).
    """
    ls = m.log_survival(x)
    if isinstance(m, RandomizedLognormal):
        s = m.survival(x)
    else:
        s = np.exp(ls)
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return float(s), float(ls)
    return np.asarray(s, dtype=float), np.asarray(ls, dtype=float)


def quantile(m, q):
    """Generalized inverse inf{x : P(X <= x) >= q} for 0 < q < 1."""
    return m.quantile(q)


def sample_marginal(m, rng, size=None):
    """Draw from a marginal; deterministic given the generator state."""
    return m.sample(rng, size)


__all__ = [
    "TAG_L",
    "TAG_D",
    "TAG_R",
    "TAG_GMDA",
    "DiscreteAtoms",
    "ScaledBeta",
    "ScalingFunction",
    "ConstantScaling",
    "PowerScaling",
    "LognormalScaling",
    "WeibullScaling",
    "PowerOfScaling",
    "scaling_eval",
    "Marginal",
    "Exponential",
    "Pareto",
    "Lognormal",
    "HeavyWeibull",
    "RandomizedLognormal",
    "tail_eval",
    "quantile",
    "sample_marginal",
    "norm_log_sf",
    "norm_sf",
]
