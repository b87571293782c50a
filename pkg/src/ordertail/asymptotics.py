"""Closed-form first-order tail approximations and derived risk measures.

The approximation underlying everything here: for weights (c0, c1, ..) in a
box [a,b] x [0,d]^(n-1) with a > 0, the weighted order-statistic sum
c0*X(n) + c1*X(n-1) + ... has the same first-order tail as c0 * max_i X_i,

    P(sum_i c_i X_(n-i)) > x)  ~  sum_i P(c0 * X_i > x),    x -> infinity,

so the approximation depends on the weights only through c0. Random bounded
weights C0 independent of the risks enter through an expectation over c0.
The VaR plug-in inverts the approximation; the group-share bounds (u, U) and
the Davis-Resnick margin check support the conditional-tail-expectation
analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy import stats as _stats

from .errors import BracketingError, DomainError, QuadratureError
from .joint_models import JointRiskModel
from .marginals import ScalingFunction

_BISECT_LOG_RTOL = 1e-10  # tail probabilities near 1e-8 need ~10 digits in x


# ---------------------------------------------------------------------------
# weight specifications
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FixedWeights:
    """Deterministic weights (c0, ..., c_{n-1}) with an optional declared box.

    c0 multiplies the sample maximum and must be positive. Trailing weights
    may be negative only when every marginal is nonnegative (all implemented
    families are); the declared box defaults to the tightest one containing
    ``c``.
    """

    c: tuple
    c0_range: tuple = None
    rest_bound: float = None

    def __post_init__(self):
        c = tuple(float(v) for v in self.c)
        if not c:
            raise DomainError("weights must be nonempty")
        if c[0] <= 0:
            raise DomainError("the weight on the maximum must be positive")
        object.__setattr__(self, "c", c)
        rng = self.c0_range or (c[0], c[0])
        rng = (float(rng[0]), float(rng[1]))
        if not 0 < rng[0] <= rng[1]:
            raise DomainError("c0 range must satisfy 0 < a <= b")
        if not rng[0] <= c[0] <= rng[1]:
            raise DomainError("c0 lies outside its declared range")
        object.__setattr__(self, "c0_range", rng)
        rest = c[1:]
        bound = self.rest_bound if self.rest_bound is not None else (max((abs(v) for v in rest), default=0.0))
        if any(abs(v) > bound + 1e-15 for v in rest):
            raise DomainError("a trailing weight exceeds its declared bound")
        object.__setattr__(self, "rest_bound", float(bound))

    @property
    def c0(self):
        return self.c[0]

    @property
    def rest(self):
        return self.c[1:]

    def to_dict(self):
        return {"type": "fixed", "c": list(self.c)}


@dataclass(frozen=True)
class AtomC0:
    """Discrete law for a random weight on the maximum, support in (0, inf)."""

    values: tuple
    probs: tuple

    def __post_init__(self):
        v = tuple(float(x) for x in self.values)
        p = tuple(float(x) for x in self.probs)
        if not v or len(v) != len(p):
            raise DomainError("atom weight law needs matching nonempty values/probs")
        if min(v) <= 0:
            raise DomainError("random c0 must be bounded away from 0")
        if any(q < 0 for q in p) or abs(sum(p) - 1.0) > 1e-12:
            raise DomainError("atom probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probs", p)

    @property
    def support(self):
        return (min(self.values), max(self.values))

    def quantile(self, u):
        order = np.argsort(self.values)
        vals = np.asarray(self.values, dtype=float)[order]
        cum = np.cumsum(np.asarray(self.probs, dtype=float)[order])
        idx = np.minimum(np.searchsorted(cum, np.asarray(u, dtype=float), side="left"), len(vals) - 1)
        return vals[idx]

    def expect(self, fn):
        return sum(p * fn(v) for v, p in zip(self.values, self.probs) if p > 0)

    def to_dict(self):
        return {"type": "atoms", "values": list(self.values), "probs": list(self.probs)}


@dataclass(frozen=True)
class BetaC0:
    """Beta(a, b) law stretched onto [lo, hi] for the random maximum weight."""

    lo: float
    hi: float
    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not 0 < self.lo < self.hi:
            raise DomainError("beta weight law needs 0 < lo < hi")
        if self.a <= 0 or self.b <= 0:
            raise DomainError("beta weight law needs positive shape parameters")

    @property
    def support(self):
        return (self.lo, self.hi)

    def quantile(self, u):
        return self.lo + (self.hi - self.lo) * _stats.beta.ppf(
            np.asarray(u, dtype=float), self.a, self.b
        )

    def pdf(self, v):
        width = self.hi - self.lo
        return _stats.beta.pdf((np.asarray(v, dtype=float) - self.lo) / width, self.a, self.b) / width

    def expect(self, fn):
        val, err = integrate.quad(
            lambda v: fn(v) * float(self.pdf(v)),
            self.lo,
            self.hi,
            epsabs=1e-14,
            epsrel=1e-10,
            limit=200,
        )
        if err > 1e-14 + 1e-8 * max(abs(val), 1e-300):
            raise QuadratureError(
                f"random-weight quadrature stalled (error estimate {err:.3e})", achieved=err
            )
        return val

    def to_dict(self):
        return {"type": "beta", "lo": self.lo, "hi": self.hi, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class RandomWeights:
    """Random weight on the maximum, fixed trailing weights.

    The tail approximation only feels the law of C0; the trailing weights
    enter the simulated statistic but not the approximation.
    """

    c0_spec: object
    rest: tuple = ()

    def __post_init__(self):
        if not isinstance(self.c0_spec, (AtomC0, BetaC0)):
            raise DomainError("c0_spec must be AtomC0 or BetaC0")
        object.__setattr__(self, "rest", tuple(float(v) for v in self.rest))

    def to_dict(self):
        return {"type": "random", "c0": self.c0_spec.to_dict(), "rest": list(self.rest)}


def validate_weights(model, weights):
    """Check a weight spec against a model's dimension and sign constraints."""
    n = model.n
    if isinstance(weights, FixedWeights):
        if len(weights.c) != n:
            raise DomainError(f"weights have length {len(weights.c)}, model dimension is {n}")
        if any(v < 0 for v in weights.rest) and not all(
            m.nonnegative for m in model.marginals()
        ):
            raise DomainError("negative trailing weights require nonnegative risks")
    elif isinstance(weights, RandomWeights):
        if len(weights.rest) != n - 1:
            raise DomainError(f"random weights need {n - 1} trailing values")
        if any(v < 0 for v in weights.rest) and not all(
            m.nonnegative for m in model.marginals()
        ):
            raise DomainError("negative trailing weights require nonnegative risks")
    else:
        raise DomainError("weights must be FixedWeights or RandomWeights")


# ---------------------------------------------------------------------------
# tail approximation and its inverse
# ---------------------------------------------------------------------------


def _component_survival_sum(model, y):
    """sum_i P(X_i > y)."""
    return float(sum(float(np.exp(m.log_survival(y))) for m in model.marginals()))


def approx_tail(model, weights, x):
    """First-order approximation sum_i P(c0 X_i > x) of the weighted-sum tail.

    By design this depends on ``weights`` only through the weight on the
    maximum.
    """
    if isinstance(weights, RandomWeights):
        return approx_tail_random_weights(model, weights, x)
    c0 = weights.c0 if isinstance(weights, FixedWeights) else float(weights)
    return _component_survival_sum(model, x / c0)


def approx_tail_random_weights(model, weights, x):
    """sum_i E P(C0 X_i > x) for a bounded random weight on the maximum."""
    spec = weights.c0_spec if isinstance(weights, RandomWeights) else weights
    return float(spec.expect(lambda c0: _component_survival_sum(model, x / c0)))


def asymptotic_var(model, q, c0=1.0):
    """Solve sum_i P(X_i > x/c0) = 1 - q for x.

    Monotone bracketing by doubling from the largest component quantile, then
    bisection on log x to relative tolerance 1e-10. This is the first-order
    plug-in for the q-quantile of both the aggregate and the maximum.
    """
    if not 0.0 < q < 1.0:
        raise DomainError("q must lie strictly between 0 and 1")
    if c0 <= 0:
        raise DomainError("c0 must be positive")
    target = 1.0 - q

    def g(x):
        return _component_survival_sum(model, x / c0) - target

    x0 = c0 * max(m.quantile(q) for m in model.marginals())
    if x0 <= 0 or not math.isfinite(x0):
        raise BracketingError("component quantile did not give a usable start point")
    lo = hi = x0
    if g(hi) > 0:
        for _ in range(200):
            lo, hi = hi, hi * 2.0
            if g(hi) <= 0:
                break
        else:
            raise BracketingError("no upper bracket for the tail-sum inverse")
    else:
        for _ in range(200):
            if g(lo) > 0:
                break
            hi, lo = lo, lo / 2.0
        else:
            raise BracketingError("no lower bracket for the tail-sum inverse")
    while math.log(hi / lo) > _BISECT_LOG_RTOL * max(1.0, abs(math.log(hi))):
        mid = math.sqrt(lo * hi)
        if g(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return hi


# ---------------------------------------------------------------------------
# group-share bounds for the conditional tail expectation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CteBounds:
    """Grid surrogate for the liminf/limsup of the group tail share.

    ``ratios[k] = sum_{i in omega} P(X_i > x_k) / sum_i P(X_i > x_k)``;
    ``u``/``U`` are the min/max over the designated tail segment (the upper
    half of the grid), with a convergence flag from the spread of the last
    few points.
    """

    omega: tuple
    x_grid: tuple
    ratios: tuple
    u: float
    U: float
    tail_start: int
    converged: bool

    def tail_ratios(self):
        return self.ratios[self.tail_start :]


def cte_bounds(model, omega, x_grid, last_k=3, converge_tol=0.01):
    """Evaluate the group tail share on a grid and report its envelope.

    ``omega`` holds 1-based component indices. The grid must be increasing
    with at least 8 points.
    """
    xs = [float(v) for v in x_grid]
    if len(xs) < 8:
        raise DomainError("cte_bounds needs a grid of at least 8 points")
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise DomainError("x grid must be strictly increasing")
    n = model.n
    om = tuple(sorted(set(int(i) for i in omega)))
    if not om or om[0] < 1 or om[-1] > n:
        raise DomainError("omega must be a nonempty subset of 1..n")
    margs = model.marginals()
    ratios = []
    for x in xs:
        surv = [float(np.exp(m.log_survival(x))) for m in margs]
        total = sum(surv)
        if total <= 0:
            raise DomainError(f"all component tails vanish at x={x:g}; shrink the grid")
        ratios.append(sum(surv[i - 1] for i in om) / total)
    tail_start = len(xs) // 2
    tail = ratios[tail_start:]
    u, cap = min(tail), max(tail)
    spread = max(ratios[-last_k:]) - min(ratios[-last_k:])
    return CteBounds(
        omega=om,
        x_grid=tuple(xs),
        ratios=tuple(ratios),
        u=u,
        U=cap,
        tail_start=tail_start,
        converged=spread <= converge_tol,
    )


# ---------------------------------------------------------------------------
# Davis-Resnick margin check
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DavisResnickReport:
    x: float
    epsilon: float
    s_grid: tuple
    lhs: tuple
    rhs: tuple
    margins: tuple

    @property
    def all_positive(self):
        return all(m > 0 for m in self.margins)

    @property
    def min_margin(self):
        return min(self.margins)


# the bound is asymptotic; by default it is probed at the far tail
DR_DEFAULT_QUANTILE = 1.0 - 1e-6


def davis_resnick_check(marginal, h, epsilon, s_grid, x=None):
    """Margins of the Gumbel-domain tail-ratio bound.

    For each s >= 0 compares the survival ratio
    ``P(X > x + h(x) s) / P(X > x)`` against ``(1+eps) (1+eps*s)^(-1/eps)``
    and reports rhs - lhs. Negative margins at large x flag a scaling
    function inconsistent with the marginal's Gumbel behaviour. ``x``
    defaults to the (1 - 1e-6) quantile.
    """
    if epsilon <= 0:
        raise DomainError("epsilon must be positive")
    from .marginals import TAG_GMDA

    if TAG_GMDA not in marginal.tags:
        raise DomainError("the margin bound applies to marginals with the GMDA tag")
    if x is None:
        x = marginal.quantile(DR_DEFAULT_QUANTILE)
    s = np.asarray(list(s_grid), dtype=float)
    if np.any(s < 0):
        raise DomainError("s grid must be nonnegative")
    hx = float(h(x))
    base = float(marginal.log_survival(x))
    lhs = np.exp(np.asarray(marginal.log_survival(x + hx * s), dtype=float) - base)
    rhs = (1.0 + epsilon) * np.exp(-np.log1p(epsilon * s) / epsilon)
    return DavisResnickReport(
        x=float(x),
        epsilon=float(epsilon),
        s_grid=tuple(float(v) for v in s),
        lhs=tuple(float(v) for v in lhs),
        rhs=tuple(float(v) for v in rhs),
        margins=tuple(float(r - l) for r, l in zip(rhs, lhs)),
    )


__all__ = [
    "FixedWeights",
    "RandomWeights",
    "AtomC0",
    "BetaC0",
    "approx_tail",
    "approx_tail_random_weights",
    "asymptotic_var",
    "CteBounds",
    "cte_bounds",
    "DavisResnickReport",
    "davis_resnick_check",
    "DR_DEFAULT_QUANTILE",
]
