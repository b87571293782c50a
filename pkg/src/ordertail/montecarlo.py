"""Seeded, chunk-parallel Monte Carlo estimators: the oracle side of every
closed-form approximation in the package.

Reproducibility contract
------------------------
A plan's total sample count is split into chunks of ``chunk_size``; chunk k
draws from the k-th child of ``SeedSequence(seed)``. Per-chunk reductions are
merged in chunk order, so results are bit-identical for any worker count.
``ORDERTAIL_WORKERS`` selects the thread count and must not (and does not)
affect numbers; the kernel backend flag is equally numerics-neutral because
both backends are bit-identical.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats as _stats
from scipy.special import ndtri

from . import kernels
from .asymptotics import (
    FixedWeights,
    RandomWeights,
    approx_tail,
    validate_weights,
)
from .errors import DomainError, PlanError, SimulationError

_MIN_CTE_EXCEEDANCES = 30


@dataclass(frozen=True)
class SimulationPlan:
    """Total draw count, chunking, base seed and CI level for one estimate."""

    n_samples: int
    seed: int
    chunk_size: int = 1 << 18
    confidence: float = 0.95
    x_grid: tuple = None

    def __post_init__(self):
        if self.n_samples < 1 or self.chunk_size < 1 or self.n_samples < self.chunk_size:
            raise PlanError("need n_samples >= chunk_size >= 1")
        if not 0.0 < self.confidence < 1.0:
            raise PlanError("confidence must lie in (0, 1)")
        if self.x_grid is not None:
            object.__setattr__(self, "x_grid", tuple(float(v) for v in self.x_grid))

    @property
    def z_value(self):
        return float(ndtri(0.5 + self.confidence / 2.0))

    def chunk_sizes(self):
        full, rem = divmod(self.n_samples, self.chunk_size)
        sizes = [self.chunk_size] * full
        if rem:
            sizes.append(rem)
        return sizes


@dataclass(frozen=True)
class TailEstimate:
    """Binomial tail-probability estimate with a two-sided normal CI.

    A zero hit count switches to the one-sided rule-of-three bound and sets
    ``rare_event``.
    """

    estimate: float
    se: float
    ci_lo: float
    ci_hi: float
    n_samples: int
    hits: int
    confidence: float
    rare_event: bool


@dataclass(frozen=True)
class QuantileEstimate:
    """Empirical quantile with a distribution-free order-statistic CI."""

    q: float
    estimate: float
    ci_lo: float
    ci_hi: float
    n_samples: int
    confidence: float


@dataclass(frozen=True)
class CteRatioEstimate:
    """Two-pass conditional-tail-expectation ratio with a delta-method CI."""

    q: float
    omega: tuple
    ratio: float
    ci_lo: float
    ci_hi: float
    var_estimate: QuantileEstimate
    group_mean: float
    exceedances: int
    confidence: float


@dataclass(frozen=True)
class RatioCurvePoint:
    x: float
    estimate: TailEstimate
    approx: float
    ratio: float
    ratio_ci_lo: float
    ratio_ci_hi: float

    @property
    def rare_event(self):
        return self.estimate.rare_event


@dataclass(frozen=True)
class RatioCurve:
    points: tuple

    def ratios(self):
        return np.array([p.ratio for p in self.points])

    def xs(self):
        return np.array([p.x for p in self.points])


# ---------------------------------------------------------------------------
# chunk engine
# ---------------------------------------------------------------------------


def worker_count():
    raw = os.environ.get("ORDERTAIL_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _run_chunks(root_seq, sizes, task):
    """Run ``task(rng, size)`` per chunk, returning results in chunk order."""
    children = root_seq.spawn(len(sizes))
    jobs = [(np.random.default_rng(ss), m) for ss, m in zip(children, sizes)]
    workers = worker_count()
    if workers == 1 or len(jobs) == 1:
        return [task(rng, m) for rng, m in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(task, rng, m) for rng, m in jobs]
        return [f.result() for f in futures]


def _statistic_batch(model, weights, rng, size):
    """Draw a chunk and return the weighted order-statistic values.

    The joint sample is drawn first, then any random weights, so fixed- and
    random-weight runs with one plan share the identical joint sample.
    """
    x = model.sample(rng, size)
    if isinstance(weights, FixedWeights):
        return kernels.weighted_sums(x, np.asarray(weights.c))
    c0 = np.asarray(weights.c0_spec.quantile(rng.random(size)), dtype=float)
    return kernels.weighted_sums_varying_c0(x, c0, np.asarray(weights.rest, dtype=float))


def _binomial_estimate(hits, n, confidence, z):
    p = hits / n
    se = math.sqrt(p * (1.0 - p) / n)
    if hits == 0:
        bound = min(1.0, -math.log1p(-confidence) / n)
        return TailEstimate(0.0, 0.0, 0.0, bound, n, 0, confidence, True)
    if hits == n:
        bound = max(0.0, 1.0 + math.log1p(-confidence) / n)
        return TailEstimate(1.0, 0.0, bound, 1.0, n, n, confidence, False)
    lo = max(0.0, p - z * se)
    hi = min(1.0, p + z * se)
    return TailEstimate(p, se, lo, hi, n, int(hits), confidence, False)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def weighted_order_sum(sample, c):
    """Sort one sample in descending order and dot it with the weights.

    ``c[0]`` multiplies the sample maximum. Permutation-invariant in the
    sample by construction.
    """
    s = np.sort(np.asarray(sample, dtype=float))[::-1]
    c = np.asarray(c, dtype=float)
    if s.shape != c.shape:
        raise DomainError("sample and weights must have equal length")
    total = 0.0
    for j in range(s.shape[0]):
        total += s[j] * c[j]
    return float(total)


def estimate_tail_grid(model, weights, x_grid, plan):
    """Tail estimates at every grid point from one shared simulation pass."""
    model._require_valid()
    validate_weights(model, weights)
    grid = np.asarray(list(x_grid), dtype=float)

    def task(rng, size):
        stat = np.sort(_statistic_batch(model, weights, rng, size))
        return size - np.searchsorted(stat, grid, side="right")

    per_chunk = _run_chunks(np.random.SeedSequence(plan.seed), plan.chunk_sizes(), task)
    hits = np.zeros(len(grid), dtype=np.int64)
    for h in per_chunk:
        hits += h
    z = plan.z_value
    return [
        _binomial_estimate(int(h), plan.n_samples, plan.confidence, z) for h in hits
    ]


def estimate_tail(model, weights, x, plan):
    """P(weighted order-statistic sum > x) by crude Monte Carlo."""
    return estimate_tail_grid(model, weights, [x], plan)[0]


def _collect_statistics(model, weights, plan, root_seq):
    def task(rng, size):
        return _statistic_batch(model, weights, rng, size)

    parts = _run_chunks(root_seq, plan.chunk_sizes(), task)
    return np.concatenate(parts)


def _order_stat_ci(values, q, confidence):
    n = values.shape[0]
    alpha = 1.0 - confidence
    lo_rank = int(_stats.binom.ppf(alpha / 2.0, n, q))
    hi_rank = int(_stats.binom.ppf(1.0 - alpha / 2.0, n, q)) + 1
    lo_rank = min(max(lo_rank, 1), n)
    hi_rank = min(max(hi_rank, 1), n)
    k = int(math.ceil(n * q))
    k = min(max(k, 1), n)
    idx = np.unique([lo_rank - 1, k - 1, hi_rank - 1])
    picked = np.partition(values, idx)
    return picked[k - 1], picked[lo_rank - 1], picked[hi_rank - 1]


def estimate_quantile(model, weights, q, plan):
    """Empirical q-quantile of the weighted sum with an order-statistic CI."""
    model._require_valid()
    validate_weights(model, weights)
    if not 0.0 < q < 1.0:
        raise DomainError("q must lie strictly between 0 and 1")
    if plan.n_samples * (1.0 - q) < 100.0:
        raise PlanError(
            f"need n_samples*(1-q) >= 100 for a stable quantile; got {plan.n_samples * (1 - q):.1f}"
        )
    values = _collect_statistics(model, weights, plan, np.random.SeedSequence(plan.seed))
    est, lo, hi = _order_stat_ci(values, q, plan.confidence)
    return QuantileEstimate(q, float(est), float(lo), float(hi), plan.n_samples, plan.confidence)


def estimate_cte_ratio(model, omega, q, plan):
    """E(sum_{i in omega} X_i | S_n > VaR_q(S_n)) / VaR_q(S_n), two-pass.

    Pass 1 estimates the aggregate VaR empirically; pass 2, on a fresh
    substream, averages the group sum over aggregate exceedances. Requires
    nonnegative risks and n_samples*(1-q) >= 1000.
    """
    model._require_valid()
    n = model.n
    om = tuple(sorted(set(int(i) for i in omega)))
    if not om or om[0] < 1 or om[-1] > n:
        raise DomainError("omega must be a nonempty subset of 1..n")
    if not all(m.nonnegative for m in model.marginals()):
        raise DomainError("the CTE ratio is defined for nonnegative risks")
    if not 0.0 < q < 1.0:
        raise DomainError("q must lie strictly between 0 and 1")
    if plan.n_samples * (1.0 - q) < 1000.0:
        raise PlanError(
            f"need n_samples*(1-q) >= 1000 for the two-pass CTE; got {plan.n_samples * (1 - q):.1f}"
        )
    root = np.random.SeedSequence(plan.seed)
    pass1_seq, pass2_seq = root.spawn(2)
    ones = FixedWeights(tuple([1.0] * n))
    values = _collect_statistics(model, ones, plan, pass1_seq)
    var_est, var_lo, var_hi = _order_stat_ci(values, q, plan.confidence)
    var_estimate = QuantileEstimate(
        q, float(var_est), float(var_lo), float(var_hi), plan.n_samples, plan.confidence
    )
    cols = np.asarray([i - 1 for i in om], dtype=np.int64)

    def task(rng, size):
        x = model.sample(rng, size)
        s = kernels.weighted_sums(x, np.ones(n))
        mask = s > var_est
        g = np.zeros(int(np.count_nonzero(mask)))
        sub = x[mask]
        for c in cols:
            g += sub[:, c]
        return np.array([g.shape[0], g.sum(), np.square(g).sum()])

    parts = _run_chunks(pass2_seq, plan.chunk_sizes(), task)
    m_exc, s1, s2 = np.sum(np.stack(parts), axis=0)
    m_exc = int(m_exc)
    if m_exc < _MIN_CTE_EXCEEDANCES:
        raise SimulationError(
            f"only {m_exc} aggregate exceedances in pass 2; raise n_samples or lower q"
        )
    mean_g = s1 / m_exc
    var_g = max(s2 / m_exc - mean_g**2, 0.0) * m_exc / max(m_exc - 1, 1)
    ratio = mean_g / var_est
    z = plan.z_value
    # independent passes: Var(ratio) ~ Var(mean)/v^2 + mean^2 Var(v)/v^4
    var_v = ((var_hi - var_lo) / (2.0 * z)) ** 2 if var_hi > var_lo else 0.0
    se = math.sqrt(var_g / (m_exc * var_est**2) + (mean_g**2) * var_v / var_est**4)
    return CteRatioEstimate(
        q=q,
        omega=om,
        ratio=float(ratio),
        ci_lo=float(ratio - z * se),
        ci_hi=float(ratio + z * se),
        var_estimate=var_estimate,
        group_mean=float(mean_g),
        exceedances=m_exc,
        confidence=plan.confidence,
    )


def ratio_curve(model, weights, x_grid, plan):
    """Empirical-to-approximate tail ratio over a grid, CIs propagated.

    Rare-event points (zero hits) are flagged on the point, never fatal.
    """
    grid = [float(v) for v in x_grid]
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise DomainError("x grid must be strictly increasing")
    estimates = estimate_tail_grid(model, weights, grid, plan)
    points = []
    for x, est in zip(grid, estimates):
        ap = approx_tail(model, weights, x)
        if ap <= 0:
            raise DomainError(f"approximation vanishes at x={x:g}")
        points.append(
            RatioCurvePoint(
                x=x,
                estimate=est,
                approx=ap,
                ratio=est.estimate / ap,
                ratio_ci_lo=est.ci_lo / ap,
                ratio_ci_hi=est.ci_hi / ap,
            )
        )
    return RatioCurve(tuple(points))


__all__ = [
    "SimulationPlan",
    "TailEstimate",
    "QuantileEstimate",
    "CteRatioEstimate",
    "RatioCurve",
    "RatioCurvePoint",
    "weighted_order_sum",
    "estimate_tail",
    "estimate_tail_grid",
    "estimate_quantile",
    "estimate_cte_ratio",
    "ratio_curve",
    "worker_count",
]
