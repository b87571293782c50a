"""Empirical checks of the dependence and scaling assumptions.

Each check produces ratio curves over an x grid together with a trend verdict.
Closed-form joint survivals are used whenever the model provides them (the
curves are then deterministic); otherwise the curves are estimated by the
chunked Monte Carlo engine and carry confidence intervals.

The three dependence regimes assessed by :func:`assumption_report`:

``gumbel``
    the maximum lies in the Gumbel max-domain with scaling h, and both
    smallness conditions below hold for that h.
``longtail``
    the maximum is long-tailed and h is an admissible auxiliary function
    (properties (i)-(iii)) under which both smallness conditions hold.
``longtail_dv``
    the maximum is long-tailed with dominatedly varying survival and a
    power-form h satisfies the cross-exceedance condition.

Smallness conditions (ratios against P(max > x)):

* cross exceedance: P(|X_i| > t h(x), X_j > x) / P(max > x) -> 0 for every
  ordered pair and every t > 0 (probed on a finite t set);
* scaled exceedance: P(X_i > L h(x), X_j > L h(x)) / P(max > x) -> 0 for some
  L > 0 (probed existentially over a log-spaced L grid).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .asymptotics import asymptotic_var
from .errors import DomainError
from .joint_models import GaussLognormalW, _scaling_close
from .marginals import (
    TAG_D,
    TAG_GMDA,
    TAG_L,
    TAG_R,
    ConstantScaling,
    Marginal,
    PowerScaling,
    scaling_eval,
)
from .montecarlo import SimulationPlan, _run_chunks

VERDICT_ZERO = "converging-to-zero"
VERDICT_POSITIVE = "converging-to-positive"
VERDICT_DIVERGING = "diverging"
VERDICT_INCONCLUSIVE = "inconclusive"

_DEFAULT_T = (0.5, 1.0, 2.0)
_DEFAULT_L = (0.25, 0.5, 1.0, 2.0, 4.0)
_DEFAULT_Y = (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0)


@dataclass(frozen=True)
class DiagnosticThresholds:
    """Fixed but adjustable cutoffs behind the trend verdicts."""

    zero_ci: float = 0.02  # final upper CI below this counts as vanished
    slope_tol: float = 0.05  # log-log slope window for "flat"
    target_tol: float = 0.05  # closeness to 1 for the scaling-property ratios
    bounded_cap: float = 10.0  # weak self-neglect cap
    min_denominator_hits: int = 100  # fewer conditioning hits flags the point


@dataclass(frozen=True)
class DiagnosticCurve:
    """Ratio values over an x grid with a trend verdict.

    ``converging-to-zero`` requires the last three estimates to decrease
    strictly and the final upper CI to sit below the configured threshold.
    """

    label: str
    x_grid: tuple
    values: tuple
    ci_lo: tuple
    ci_hi: tuple
    deterministic: bool
    rare: tuple
    trend_slope: float
    verdict: str


def _trend_slope(xs, vals):
    xs = np.asarray(xs, dtype=float)
    vals = np.asarray(vals, dtype=float)
    start = len(xs) // 2
    x_t, v_t = xs[start:], vals[start:]
    good = np.isfinite(v_t) & (v_t > 0)
    if np.count_nonzero(good) < 2:
        return float("nan")
    return float(np.polyfit(np.log(x_t[good]), np.log(v_t[good]), 1)[0])


def _classify(xs, vals, ci_hi, ci_lo, thresholds):
    t = thresholds
    vals = np.asarray(vals, dtype=float)
    ok = np.isfinite(vals)
    if np.count_nonzero(ok) < 3:
        return float("nan"), VERDICT_INCONCLUSIVE
    slope = _trend_slope(xs, vals)
    last3 = vals[ok][-3:]
    hi_final = np.asarray(ci_hi, dtype=float)[ok][-1]
    lo_final = np.asarray(ci_lo, dtype=float)[ok][-1]
    if last3[0] > last3[1] > last3[2] and hi_final < t.zero_ci:
        return slope, VERDICT_ZERO
    if np.isfinite(slope) and slope > t.slope_tol and last3[0] < last3[1] < last3[2]:
        return slope, VERDICT_DIVERGING
    if (not np.isfinite(slope) or abs(slope) <= t.slope_tol) and lo_final > t.zero_ci:
        return slope, VERDICT_POSITIVE
    return slope, VERDICT_INCONCLUSIVE


def _curve(label, xs, vals, ci_lo, ci_hi, deterministic, rare, thresholds):
    slope, verdict = _classify(xs, vals, ci_hi, ci_lo, thresholds)
    return DiagnosticCurve(
        label=label,
        x_grid=tuple(float(v) for v in xs),
        values=tuple(float(v) for v in vals),
        ci_lo=tuple(float(v) for v in ci_lo),
        ci_hi=tuple(float(v) for v in ci_hi),
        deterministic=deterministic,
        rare=tuple(bool(r) for r in rare),
        trend_slope=slope,
        verdict=verdict,
    )


# ---------------------------------------------------------------------------
# shared ratio machinery
# ---------------------------------------------------------------------------


def _default_plan():
    return SimulationPlan(n_samples=400_000, seed=987654321, chunk_size=1 << 17)


def default_tail_grid(model, levels=None):
    """x grid at which the summed component tails hit the given levels."""
    if levels is None:
        levels = np.geomspace(1e-1, 1e-4, 8)
    return tuple(asymptotic_var(model, 1.0 - lvl) for lvl in levels)


def _deterministic_available(model, xs):
    return model.max_survival(xs[0]) is not None


def _det_ratio_curve(label, xs, num_fn, den_fn, thresholds):
    vals = []
    for x in xs:
        den = den_fn(x)
        num = num_fn(x)
        vals.append(num / den if den > 0 else float("nan"))
    return _curve(label, xs, vals, vals, vals, True, [False] * len(xs), thresholds)


def _mc_ratio_curves(model, plan, xs, combos, thresholds):
    """Estimate conditional ratios for many (numerator, label) combos at once.

    ``combos`` maps keys to callables ``event(X, x) -> bool array``; the
    denominator event is always {max > x}. Returns key -> DiagnosticCurve.
    """
    grid = np.asarray(xs, dtype=float)
    keys = list(combos.keys())

    def task(rng, size):
        x_mat = model.sample(rng, size)
        mx = np.max(x_mat, axis=1)
        den = mx[:, None] > grid[None, :]
        out = np.empty((len(keys), len(grid), 3), dtype=np.int64)
        for ki, key in enumerate(keys):
            a = combos[key](x_mat, grid)
            out[ki, :, 0] = np.count_nonzero(a, axis=0)
            out[ki, :, 1] = np.count_nonzero(den, axis=0)
            out[ki, :, 2] = np.count_nonzero(a & den, axis=0)
        return out

    parts = _run_chunks(np.random.SeedSequence(plan.seed), plan.chunk_sizes(), task)
    counts = np.sum(np.stack(parts), axis=0)
    n = plan.n_samples
    z = plan.z_value
    curves = {}
    for ki, key in enumerate(keys):
        vals, lo, hi, rare = [], [], [], []
        for gi in range(len(grid)):
            c1, c2, c12 = counts[ki, gi]
            if c2 == 0:
                vals.append(float("nan"))
                lo.append(float("nan"))
                hi.append(float("nan"))
                rare.append(True)
                continue
            p1, p2, p12 = c1 / n, c2 / n, c12 / n
            r = p1 / p2
            if c1 == 0:
                bound = -math.log1p(-plan.confidence) / c2
                vals.append(0.0)
                lo.append(0.0)
                hi.append(min(1.0, bound))
                rare.append(True)
                continue
            var = (r**2 / n) * (
                (1.0 - p1) / p1 + (1.0 - p2) / p2 - 2.0 * (p12 - p1 * p2) / (p1 * p2)
            )
            se = math.sqrt(max(var, 0.0))
            vals.append(r)
            lo.append(max(r - z * se, 0.0))
            hi.append(r + z * se)
            rare.append(bool(c2 < thresholds.min_denominator_hits))
        curves[key] = _curve(str(key), grid, vals, lo, hi, False, rare, thresholds)
    return curves


# ---------------------------------------------------------------------------
# the individual checks
# ---------------------------------------------------------------------------


def check_cross_exceedance(model, h, t, x_grid=None, plan=None, thresholds=None, deterministic=None):
    """P(|X_i| > t h(x), X_j > x) / P(max > x) per ordered pair (1-based keys)."""
    if t <= 0:
        raise DomainError("t must be positive")
    thresholds = thresholds or DiagnosticThresholds()
    xs = tuple(x_grid) if x_grid is not None else default_tail_grid(model)
    n = model.n
    pairs = [(i, j) for i in range(1, n + 1) for j in range(1, n + 1) if i != j]
    hs = {x: t * scaling_eval(h, x) for x in xs}
    if deterministic is None:
        deterministic = _deterministic_available(model, xs)
    if deterministic:
        out = {}
        for i, j in pairs:
            out[(i, j)] = _det_ratio_curve(
                f"cross-exceedance i={i} j={j} t={t:g}",
                xs,
                lambda x, i=i, j=j: model.pairwise_joint_survival(i - 1, j - 1, hs[x], x),
                model.max_survival,
                thresholds,
            )
        return out
    plan = plan or _default_plan()
    grid_h = np.asarray([hs[x] for x in xs])
    combos = {
        (i, j): (
            lambda X, grid, i=i, j=j: (np.abs(X[:, i - 1])[:, None] > grid_h[None, :])
            & (X[:, j - 1][:, None] > grid[None, :])
        )
        for i, j in pairs
    }
    return _mc_ratio_curves(model, plan, xs, combos, thresholds)


def check_scaled_exceedance(model, h, L_values=_DEFAULT_L, x_grid=None, plan=None, thresholds=None, deterministic=None):
    """P(X_i > L h(x), X_j > L h(x)) / P(max > x) per pair i<j and per L.

    The condition is existential in L: a pair passes when some L in the grid
    yields a vanishing curve (the ratio is monotone in L, so a finite grid
    witnesses existence).
    """
    thresholds = thresholds or DiagnosticThresholds()
    xs = tuple(x_grid) if x_grid is not None else default_tail_grid(model)
    n = model.n
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    if deterministic is None:
        deterministic = _deterministic_available(model, xs)
    if deterministic:
        out = {}
        for L in L_values:
            lev = {x: L * scaling_eval(h, x) for x in xs}
            for i, j in pairs:
                out[(i, j, L)] = _det_ratio_curve(
                    f"scaled-exceedance i={i} j={j} L={L:g}",
                    xs,
                    lambda x, i=i, j=j: model.pairwise_joint_survival(
                        i - 1, j - 1, lev[x], lev[x]
                    ),
                    model.max_survival,
                    thresholds,
                )
        return out
    plan = plan or _default_plan()
    combos = {}
    for L in L_values:
        grid_h = np.asarray([L * scaling_eval(h, x) for x in xs])
        for i, j in pairs:
            combos[(i, j, L)] = (
                lambda X, grid, i=i, j=j, gh=grid_h: (X[:, i - 1][:, None] > gh[None, :])
                & (X[:, j - 1][:, None] > gh[None, :])
            )
    return _mc_ratio_curves(model, plan, xs, combos, thresholds)


def check_joint_exceedance(model, x_grid=None, plan=None, thresholds=None, deterministic=None):
    """P(X_i > x, X_j > x) / P(max > x) per pair i<j; the inheritance premise."""
    thresholds = thresholds or DiagnosticThresholds()
    xs = tuple(x_grid) if x_grid is not None else default_tail_grid(model)
    n = model.n
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    if deterministic is None:
        deterministic = _deterministic_available(model, xs)
    if deterministic:
        return {
            (i, j): _det_ratio_curve(
                f"joint-exceedance i={i} j={j}",
                xs,
                lambda x, i=i, j=j: model.pairwise_joint_survival(i - 1, j - 1, x, x),
                model.max_survival,
                thresholds,
            )
            for i, j in pairs
        }
    plan = plan or _default_plan()
    combos = {
        (i, j): (
            lambda X, grid, i=i, j=j: (X[:, i - 1][:, None] > grid[None, :])
            & (X[:, j - 1][:, None] > grid[None, :])
        )
        for i, j in pairs
    }
    return _mc_ratio_curves(model, plan, xs, combos, thresholds)


def check_conditional_smallness(model, h, k, t, x_grid=None, plan=None, thresholds=None):
    """P(|X_(k:n)| > t h(x) | max > x) by rejection on the conditioning event.

    ``k`` is the 1-based rank, 1 <= k <= n-1. Grid points whose conditioning
    count falls under the threshold are flagged rare rather than failing.
    """
    n = model.n
    if not 1 <= k <= n - 1:
        raise DomainError("rank k must satisfy 1 <= k <= n-1")
    if t <= 0:
        raise DomainError("t must be positive")
    thresholds = thresholds or DiagnosticThresholds()
    xs = tuple(x_grid) if x_grid is not None else default_tail_grid(model)
    plan = plan or _default_plan()
    grid_h = np.asarray([t * scaling_eval(h, x) for x in xs])
    combos = {
        (k,): (
            lambda X, grid: (
                np.abs(np.sort(X, axis=1)[:, k - 1])[:, None] > grid_h[None, :]
            )
        )
    }
    curves = _mc_ratio_curves(model, plan, xs, combos, thresholds)
    curve = curves[(k,)]
    return DiagnosticCurve(
        label=f"conditional-smallness k={k} t={t:g}",
        x_grid=curve.x_grid,
        values=curve.values,
        ci_lo=curve.ci_lo,
        ci_hi=curve.ci_hi,
        deterministic=False,
        rare=curve.rare,
        trend_slope=curve.trend_slope,
        verdict=curve.verdict,
    )


# ---------------------------------------------------------------------------
# scaling-function properties
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HPropertyReport:
    """Grid evaluation of the auxiliary-function properties.

    ``small_o``: h(x)/x (target 0); ``shift_ratio``: survival ratio under
    shifts y*h(x) (target 1); ``scale_ratio``: h(x+y h(x))/h(x) (bounded for
    weak self-neglect, target 1 for full self-neglect); ``gumbel_ratio``:
    survival ratio times e^y (target 1 under the Gumbel limit).

    A property passes when its deviation from target is already inside the
    tolerance at the grid end, or decays along the grid with a clearly
    negative log-log slope (limits are not computable; the trend is the
    testable surrogate).
    """

    x_grid: tuple
    y_grid: tuple
    small_o: tuple
    shift_ratio: dict
    scale_ratio: dict
    gumbel_ratio: dict
    small_o_ok: bool
    shift_ok: bool
    weakly_self_neglecting_ok: bool
    self_neglecting_ok: bool
    gumbel_ok: bool

    @property
    def admissible(self):
        """Properties (i)-(iii): the h belongs to the auxiliary class."""
        return self.small_o_ok and self.shift_ok and self.weakly_self_neglecting_ok


def _as_log_sf(tail):
    if isinstance(tail, Marginal):
        return lambda x: float(tail.log_survival(x))
    return tail


_DEV_SLOPE_CUT = -0.1  # deviation decay slower than this is treated as stalling


def _toward_target(xs, devs, tol, slope_cut=_DEV_SLOPE_CUT):
    """True when deviations are inside ``tol`` or decay at a clear power rate."""
    pts = [(x, d) for x, d in zip(xs, devs) if math.isfinite(d)]
    if len(pts) < 2:
        return False
    final = pts[-1][1]
    if final < tol:
        return True
    good = [(x, d) for x, d in pts[len(pts) // 2 :] if d > 0]
    if len(good) < 2:
        return False
    lx = np.log([x for x, _ in good])
    ld = np.log([d for _, d in good])
    slope = float(np.polyfit(lx, ld, 1)[0])
    return slope < slope_cut and good[-1][1] < good[0][1]


def check_h_properties(tail, h, y_grid=_DEFAULT_Y, x_grid=None, thresholds=None, model=None):
    """Evaluate the auxiliary-function properties against a tail evaluator.

    ``tail`` is a marginal or a callable returning log survival of the
    maximum; Monte Carlo tails are too noisy at these ratios, so only
    closed-form or quadrature evaluators belong here.
    """
    thresholds = thresholds or DiagnosticThresholds()
    log_sf = _as_log_sf(tail)
    if x_grid is None:
        if model is None:
            raise DomainError("need an explicit x grid or a model to derive one")
        x_grid = default_tail_grid(model)
    xs = [float(v) for v in x_grid if v > h.x_lo]
    if len(xs) < 3:
        raise DomainError("x grid leaves fewer than 3 points in the scaling domain")
    ys = tuple(float(y) for y in y_grid)
    small = [scaling_eval(h, x) / x for x in xs]
    shift, scale, gum = {}, {}, {}
    for y in ys:
        sr, sc, gr = [], [], []
        for x in xs:
            hx = scaling_eval(h, x)
            xp = x + y * hx
            if xp <= max(h.x_lo, 0.0):
                sr.append(float("nan"))
                sc.append(float("nan"))
                gr.append(float("nan"))
                continue
            ratio = math.exp(log_sf(xp) - log_sf(x))
            sr.append(ratio)
            sc.append(scaling_eval(h, xp) / hx)
            gr.append(ratio * math.exp(y))
        shift[y] = tuple(sr)
        scale[y] = tuple(sc)
        gum[y] = tuple(gr)

    t = thresholds

    def ratios_ok(d):
        return all(
            _toward_target(xs, [abs(v - 1.0) for v in vals], t.target_tol)
            for vals in d.values()
        )

    small_ok = _toward_target(xs, small, t.target_tol, slope_cut=-0.05)
    shift_ok = ratios_ok(shift)
    scale_all = [v for vals in scale.values() for v in vals if math.isfinite(v)]
    weak_ok = bool(scale_all) and max(scale_all) < t.bounded_cap
    self_ok = ratios_ok(scale)
    gum_ok = ratios_ok(gum)
    return HPropertyReport(
        x_grid=tuple(xs),
        y_grid=ys,
        small_o=tuple(small),
        shift_ratio=shift,
        scale_ratio=scale,
        gumbel_ratio=gum,
        small_o_ok=bool(small_ok),
        shift_ok=bool(shift_ok),
        weakly_self_neglecting_ok=bool(weak_ok),
        self_neglecting_ok=bool(self_ok),
        gumbel_ok=bool(gum_ok),
    )


# ---------------------------------------------------------------------------
# aggregate report
# ---------------------------------------------------------------------------

STATUS_SUPPORTED = "supported"
STATUS_NOT_SUPPORTED = "not-supported"
STATUS_INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class CandidateRecord:
    h: object
    cross_status: str
    scaled_status: str
    h_props: object
    gumbel_match: bool
    empirical_gumbel: bool


@dataclass(frozen=True)
class AssumptionReport:
    """Which dependence regimes the data supports, with curves attached."""

    verdicts: dict
    supported: tuple
    joint_pass: bool
    max_tags: frozenset
    candidates: tuple
    joint_curves: dict
    cross_curves: dict
    scaled_curves: dict
    max_tail_share: float
    max_tail_slope: float


def _status_all(curves):
    verdicts = [c.verdict for c in curves]
    if all(v == VERDICT_ZERO for v in verdicts):
        return STATUS_SUPPORTED
    if any(v in (VERDICT_DIVERGING, VERDICT_POSITIVE) for v in verdicts):
        return STATUS_NOT_SUPPORTED
    return STATUS_INCONCLUSIVE


def _status_existential(curves_by_key, pairs, L_values):
    statuses = []
    for i, j in pairs:
        pair_verdicts = [curves_by_key[(i, j, L)].verdict for L in L_values]
        if any(v == VERDICT_ZERO for v in pair_verdicts):
            statuses.append(STATUS_SUPPORTED)
        elif all(v in (VERDICT_DIVERGING, VERDICT_POSITIVE) for v in pair_verdicts):
            statuses.append(STATUS_NOT_SUPPORTED)
        else:
            statuses.append(STATUS_INCONCLUSIVE)
    if all(s == STATUS_SUPPORTED for s in statuses):
        return STATUS_SUPPORTED
    if any(s == STATUS_NOT_SUPPORTED for s in statuses):
        return STATUS_NOT_SUPPORTED
    return STATUS_INCONCLUSIVE


def _combine(*ingredients):
    """supported iff all supported; not-supported if anything failed."""
    if any(s == STATUS_NOT_SUPPORTED or s is False for s in ingredients):
        return STATUS_NOT_SUPPORTED
    if all(s == STATUS_SUPPORTED or s is True for s in ingredients):
        return STATUS_SUPPORTED
    return STATUS_INCONCLUSIVE


def assumption_report(
    model,
    candidates,
    x_grid=None,
    plan=None,
    t_values=_DEFAULT_T,
    L_values=_DEFAULT_L,
    thresholds=None,
):
    """Run the dependence and scaling checks and combine them into verdicts.

    ``candidates`` is a nonempty list of scaling functions to try. Verdict
    values are "supported", "not-supported" or "inconclusive"; inconclusive
    outcomes are legal (Monte Carlo curves may simply not settle).
    """
    if not candidates:
        raise DomainError("need at least one scaling-function candidate")
    thresholds = thresholds or DiagnosticThresholds()
    xs = tuple(x_grid) if x_grid is not None else default_tail_grid(model)
    margs = model.marginals()
    n = model.n
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]

    joint = check_joint_exceedance(model, xs, plan, thresholds)
    joint_status = _status_all(joint.values())
    joint_pass = joint_status == STATUS_SUPPORTED

    # class tags of the maximum, inherited from the components when the joint
    # exceedances vanish relative to the max tail
    tags = set()
    if joint_pass:
        if all(TAG_L in m.tags for m in margs):
            tags.add(TAG_L)
        if all(TAG_D in m.tags for m in margs):
            tags.add(TAG_D)
        alphas = [m.alpha for m in margs if TAG_R in m.tags]
        if len(alphas) == n and max(alphas) - min(alphas) <= 1e-9 * max(alphas):
            tags.add(TAG_R)

    inherited = model.gmda_candidates()
    det_max = model.max_survival(xs[0]) is not None

    def max_log_sf(x):
        v = model.max_survival(x)
        return math.log(v) if v > 0 else -math.inf

    share = float("nan")
    slope = float("nan")
    if det_max:
        x_last = xs[-1]
        comp_sum = sum(float(np.exp(m.log_survival(x_last))) for m in margs)
        share = model.max_survival(x_last) / comp_sum
        half = len(xs) // 2
        lx = np.log(np.asarray(xs[half:]))
        lv = np.array([math.log(model.max_survival(x)) for x in xs[half:]])
        slope = float(np.polyfit(lx, lv, 1)[0])

    cross_curves = {}
    scaled_curves = {}
    records = []
    best = {"gumbel": STATUS_NOT_SUPPORTED, "longtail": STATUS_NOT_SUPPORTED, "longtail_dv": STATUS_NOT_SUPPORTED}
    if not joint_pass and joint_status == STATUS_INCONCLUSIVE:
        best = {k: STATUS_INCONCLUSIVE for k in best}

    for h in candidates:
        cc = {}
        for t in t_values:
            for key, curve in check_cross_exceedance(model, h, t, xs, plan, thresholds).items():
                cc[key + (t,)] = curve
        cross_status = _status_all(cc.values())
        sc = check_scaled_exceedance(model, h, L_values, xs, plan, thresholds)
        scaled_status = _status_existential(sc, pairs, L_values)
        cross_curves[h] = cc
        scaled_curves[h] = sc

        props = None
        if det_max:
            try:
                props = check_h_properties(max_log_sf, h, x_grid=xs, thresholds=thresholds)
            except DomainError:
                props = None

        gumbel_match = joint_pass and any(_h_equivalent(h, h0, xs) for h0 in inherited)
        empirical_gumbel = bool(props and props.gumbel_ok)

        gumbel_status = _combine(
            STATUS_SUPPORTED if (gumbel_match or empirical_gumbel) else STATUS_NOT_SUPPORTED,
            cross_status,
            scaled_status,
        )
        if props is not None:
            admissible = props.admissible
        else:
            admissible = None
        longtail_status = _combine(
            STATUS_SUPPORTED if TAG_L in tags else STATUS_NOT_SUPPORTED,
            STATUS_INCONCLUSIVE if admissible is None else admissible,
            cross_status,
            scaled_status,
        )
        dv_form = isinstance(h, (PowerScaling, ConstantScaling))
        dv_status = _combine(
            STATUS_SUPPORTED if (TAG_L in tags and TAG_D in tags) else STATUS_NOT_SUPPORTED,
            STATUS_SUPPORTED if dv_form else STATUS_NOT_SUPPORTED,
            STATUS_INCONCLUSIVE if admissible is None else admissible,
            cross_status,
        )
        records.append(
            CandidateRecord(
                h=h,
                cross_status=cross_status,
                scaled_status=scaled_status,
                h_props=props,
                gumbel_match=gumbel_match,
                empirical_gumbel=empirical_gumbel,
            )
        )
        for key, status in (
            ("gumbel", gumbel_status),
            ("longtail", longtail_status),
            ("longtail_dv", dv_status),
        ):
            best[key] = _better(best[key], status)

    supported = tuple(k for k, v in best.items() if v == STATUS_SUPPORTED)
    return AssumptionReport(
        verdicts=dict(best),
        supported=supported,
        joint_pass=joint_pass,
        max_tags=frozenset(tags),
        candidates=tuple(records),
        joint_curves=joint,
        cross_curves=cross_curves,
        scaled_curves=scaled_curves,
        max_tail_share=share,
        max_tail_slope=slope,
    )


def _better(a, b):
    rank = {STATUS_SUPPORTED: 2, STATUS_INCONCLUSIVE: 1, STATUS_NOT_SUPPORTED: 0}
    return a if rank[a] >= rank[b] else b


def _h_equivalent(h, h0, xs, tol=0.05):
    """Numeric asymptotic-equivalence check on the grid tail."""
    if _scaling_close(h, h0):
        return True
    x = xs[-1]
    if x <= max(h.x_lo, h0.x_lo):
        return False
    return abs(scaling_eval(h, x) / scaling_eval(h0, x) - 1.0) < tol


__all__ = [
    "DiagnosticThresholds",
    "DiagnosticCurve",
    "HPropertyReport",
    "AssumptionReport",
    "CandidateRecord",
    "check_cross_exceedance",
    "check_scaled_exceedance",
    "check_joint_exceedance",
    "check_conditional_smallness",
    "check_h_properties",
    "assumption_report",
    "default_tail_grid",
    "VERDICT_ZERO",
    "VERDICT_POSITIVE",
    "VERDICT_DIVERGING",
    "VERDICT_INCONCLUSIVE",
    "STATUS_SUPPORTED",
    "STATUS_NOT_SUPPORTED",
    "STATUS_INCONCLUSIVE",
]
