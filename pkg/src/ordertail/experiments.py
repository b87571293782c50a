"""Config-driven experiment runner.

A single JSON file describes the model, the weights, the evaluation grids,
the simulation plan and the pipelines to run. Numbers are parsed as 64-bit
floats; CSV numeric columns are written with 17 significant digits so a rerun
with the same seed reproduces them byte for byte (only the manifest carries
timestamps).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__ as _pkg_version
from .asymptotics import (
    AtomC0,
    BetaC0,
    FixedWeights,
    RandomWeights,
    approx_tail,
    asymptotic_var,
    cte_bounds,
)
from .diagnostics import assumption_report, default_tail_grid
from .errors import ConfigError, OrdertailError
from .joint_models import FGMModel, GaussLognormalW, IndependentModel, validate_model
from .marginals import (
    ConstantScaling,
    DiscreteAtoms,
    Exponential,
    HeavyWeibull,
    Lognormal,
    LognormalScaling,
    Pareto,
    PowerOfScaling,
    PowerScaling,
    RandomizedLognormal,
    ScaledBeta,
    WeibullScaling,
)
from .montecarlo import (
    SimulationPlan,
    estimate_cte_ratio,
    estimate_quantile,
    ratio_curve,
)

PIPELINES = ("approx", "simulate", "curve", "var", "cte", "diagnose")
_CSV_FMT = "%.17g"


# ---------------------------------------------------------------------------
# building blocks from JSON dicts
# ---------------------------------------------------------------------------


def _require(d, key, context):
    if key not in d:
        raise ConfigError(f"missing '{key}' in {context}")
    return d[key]


def build_wspec(spec):
    if isinstance(spec, (int, float)):
        return DiscreteAtoms(values=(float(spec),), probs=(1.0,))
    kind = _require(spec, "type", "weight-variable spec")
    if kind == "atoms":
        return DiscreteAtoms(tuple(spec["values"]), tuple(spec["probs"]))
    if kind == "beta":
        return ScaledBeta(float(spec["a"]), float(spec["b"]), float(spec["upper"]))
    raise ConfigError(f"unknown weight-variable type '{kind}'")


def build_marginal(spec):
    family = _require(spec, "family", "marginal spec")
    if family == "exponential":
        return Exponential(float(spec["rate"]))
    if family == "pareto":
        return Pareto(float(spec["alpha"]), float(spec["xmin"]))
    if family == "lognormal":
        return Lognormal(float(spec["mu"]), float(spec["sigma"]))
    if family == "heavy_weibull":
        return HeavyWeibull(float(spec["rate"]), float(spec["shape"]))
    if family == "randomized_lognormal":
        return RandomizedLognormal(
            float(spec["mu"]), float(spec["sigma"]), build_wspec(spec["w"])
        )
    raise ConfigError(f"unknown marginal family '{family}'")


def build_model(spec):
    kind = _require(spec, "type", "model spec")
    if kind == "independent":
        return IndependentModel(tuple(build_marginal(m) for m in spec["marginals"]))
    if kind == "gauss_lognormal_w":
        mu = [float(v) for v in spec["mu"]]
        sigma = [float(v) for v in spec["sigma"]]
        n = len(mu)
        rho_spec = spec.get("rho", 0.0)
        if isinstance(rho_spec, (int, float)):
            r = float(rho_spec)
            rho = [[1.0 if i == j else r for j in range(n)] for i in range(n)]
        else:
            rho = [[float(v) for v in row] for row in rho_spec]
        w = spec.get("w", 1.0)
        if isinstance(w, list):
            specs = tuple(build_wspec(v) for v in w)
        else:
            specs = tuple(build_wspec(w) for _ in range(n))
        return GaussLognormalW(
            mu=tuple(mu),
            sigma=tuple(sigma),
            rho=tuple(tuple(row) for row in rho),
            w_specs=specs,
            w_coupling=spec.get("w_coupling", "independent"),
        )
    if kind == "fgm":
        alpha = float(_require(spec, "alpha", "fgm model"))
        xmin = spec.get("xmin", 1.0)
        theta = _require(spec, "theta", "fgm model")
        if isinstance(xmin, list):
            xmins = [float(v) for v in xmin]
        else:
            n = spec.get("n")
            if n is None:
                n = max(int(i) for key in theta for i in str(key).split(","))
            xmins = [float(xmin)] * int(n)
        thetas = {}
        for key, val in theta.items():
            subset = tuple(int(i) for i in str(key).split(","))
            thetas[subset] = float(val)
        comps = tuple(Pareto(alpha, xm) for xm in xmins)
        return FGMModel(components=comps, thetas=thetas)
    raise ConfigError(f"unknown model type '{kind}'")


def build_weights(spec):
    kind = _require(spec, "type", "weights spec")
    if kind == "fixed":
        return FixedWeights(tuple(float(v) for v in spec["c"]))
    if kind == "random":
        c0 = spec["c0"]
        c0_kind = _require(c0, "type", "random c0 spec")
        if c0_kind == "atoms":
            c0_spec = AtomC0(tuple(c0["values"]), tuple(c0["probs"]))
        elif c0_kind == "beta":
            c0_spec = BetaC0(
                float(c0["lo"]), float(c0["hi"]), float(c0.get("a", 1.0)), float(c0.get("b", 1.0))
            )
        else:
            raise ConfigError(f"unknown random c0 type '{c0_kind}'")
        return RandomWeights(c0_spec, tuple(float(v) for v in spec.get("rest", ())))
    raise ConfigError(f"unknown weights type '{kind}'")


def build_scaling(spec):
    form = _require(spec, "form", "scaling spec")
    if form == "constant":
        return ConstantScaling(float(spec["c"]))
    if form == "power":
        return PowerScaling(float(spec.get("coef", 1.0)), float(spec["exponent"]))
    if form == "lognormal":
        return LognormalScaling(float(spec["sigma"]), float(spec["mu"]))
    if form == "weibull":
        return WeibullScaling(float(spec["rate"]), float(spec["shape"]))
    if form == "power_of":
        return PowerOfScaling(build_scaling(spec["base"]), float(spec["p"]))
    raise ConfigError(f"unknown scaling form '{form}'")


def _build_grid(spec):
    if isinstance(spec, list):
        return tuple(float(v) for v in spec)
    lo, hi, n = float(spec["lo"]), float(spec["hi"]), int(spec["n"])
    if spec.get("spacing", "log") == "log":
        return tuple(np.geomspace(lo, hi, n))
    return tuple(np.linspace(lo, hi, n))


# ---------------------------------------------------------------------------
# experiment config
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    model: object
    weights: object
    plan: SimulationPlan
    pipelines: tuple
    x_grid: tuple
    q_values: tuple
    omega: tuple
    h_candidates: tuple
    t_values: tuple
    L_values: tuple
    y_values: tuple
    output_dir: str

    def to_dict(self):
        return {
            "model": self.model.to_dict(),
            "weights": self.weights.to_dict(),
            "plan": {
                "n_samples": self.plan.n_samples,
                "chunk_size": self.plan.chunk_size,
                "seed": self.plan.seed,
                "confidence": self.plan.confidence,
            },
            "pipeline": list(self.pipelines),
            "grids": {
                "x": list(self.x_grid),
                "q": list(self.q_values),
                "t": list(self.t_values),
                "L": list(self.L_values),
                "y": list(self.y_values),
            },
            "omega": list(self.omega),
            "h": [h.to_dict() for h in self.h_candidates],
            "output_dir": self.output_dir,
        }

    def config_hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def parse_config(raw):
    """Build an ExperimentConfig from a JSON-style dict."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    model = build_model(_require(raw, "model", "config"))
    rep = validate_model(model)
    if not rep.ok:
        raise ConfigError(f"invalid model: {rep.first_violation}")
    weights = build_weights(raw.get("weights", {"type": "fixed", "c": [1.0] * model.n}))
    plan_spec = _require(raw, "plan", "config")
    if "seed" not in plan_spec:
        raise ConfigError("plan.seed is mandatory for reproducibility")
    n_samples = int(plan_spec.get("n_samples", 100_000))
    plan = SimulationPlan(
        n_samples=n_samples,
        seed=int(plan_spec["seed"]),
        chunk_size=int(plan_spec.get("chunk_size", min(1 << 18, n_samples))),
        confidence=float(plan_spec.get("confidence", 0.95)),
    )
    pipe = raw.get("pipeline", "full")
    if isinstance(pipe, str):
        pipelines = PIPELINES if pipe == "full" else (pipe,)
    else:
        pipelines = tuple(pipe)
    for p in pipelines:
        if p not in PIPELINES:
            raise ConfigError(f"unknown pipeline '{p}'")
    grids = raw.get("grids", {})
    x_grid = _build_grid(grids["x"]) if "x" in grids else tuple(default_tail_grid(model))
    if not x_grid:
        raise ConfigError("x grid must be nonempty")
    q_values = tuple(float(q) for q in grids.get("q", (0.99,)))
    t_values = tuple(float(t) for t in grids.get("t", (0.5, 1.0, 2.0)))
    L_values = tuple(float(v) for v in grids.get("L", (0.25, 0.5, 1.0, 2.0, 4.0)))
    y_values = tuple(float(v) for v in grids.get("y", (-2.0, -1.0, -0.5, 0.5, 1.0, 2.0)))
    omega = tuple(int(i) for i in raw.get("omega", (1,)))
    if any(i < 1 or i > model.n for i in omega):
        raise ConfigError("omega indices must lie in 1..n")
    h_specs = raw.get("h", [])
    h_candidates = tuple(build_scaling(s) for s in h_specs)
    if not h_candidates:
        h_candidates = tuple(model.gmda_candidates()) or (PowerScaling(1.0, 0.75),)
    return ExperimentConfig(
        model=model,
        weights=weights,
        plan=plan,
        pipelines=pipelines,
        x_grid=x_grid,
        q_values=q_values,
        omega=omega,
        h_candidates=h_candidates,
        t_values=t_values,
        L_values=L_values,
        y_values=y_values,
        output_dir=raw.get("output_dir", "ordertail-out"),
    )


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(json.load(fh))


# ---------------------------------------------------------------------------
# builtin configs
# ---------------------------------------------------------------------------


def builtin_configs():
    """Ready-made experiment configs, keyed by name."""
    return {
        "lognormal-randvar": {
            "model": {
                "type": "gauss_lognormal_w",
                "mu": [0.0, 0.0, 0.0],
                "sigma": [1.0, 1.0, 0.5],
                "rho": 0.3,
                "w": {"type": "beta", "a": 2.0, "b": 1.0, "upper": 1.0},
                "w_coupling": "independent",
            },
            "weights": {"type": "fixed", "c": [1.0, 0.5, 0.5]},
            "grids": {"x": {"lo": 2.0, "hi": 40.0, "n": 8, "spacing": "log"}, "q": [0.99, 0.999]},
            "omega": [1, 2],
            "h": [{"form": "lognormal", "sigma": 1.0, "mu": 0.0}],
            "plan": {"n_samples": 400000, "seed": 20240811, "chunk_size": 131072},
            "pipeline": "full",
        },
        "fgm-pareto": {
            "model": {
                "type": "fgm",
                "alpha": 2.0,
                "xmin": [1.0, 1.0, 1.0],
                "theta": {"1,2": 0.5, "1,3": 0.5, "2,3": 0.5, "1,2,3": 0.5},
            },
            "weights": {"type": "fixed", "c": [1.0, 1.0, 1.0]},
            "grids": {"x": {"lo": 5.0, "hi": 60.0, "n": 8, "spacing": "log"}, "q": [0.99, 0.999]},
            "omega": [1],
            "h": [{"form": "power", "coef": 1.0, "exponent": 0.75}],
            "plan": {"n_samples": 1000000, "seed": 20240812, "chunk_size": 262144},
            "pipeline": "full",
        },
        "negcontrol-exp": {
            "model": {
                "type": "independent",
                "marginals": [
                    {"family": "exponential", "rate": 1.0},
                    {"family": "exponential", "rate": 1.0},
                ],
            },
            "weights": {"type": "fixed", "c": [1.0, 1.0]},
            "grids": {"x": {"lo": 1.0, "hi": 12.0, "n": 8, "spacing": "log"}, "q": [0.99]},
            "omega": [1],
            "h": [{"form": "constant", "c": 1.0}],
            "plan": {"n_samples": 1000000, "seed": 20240813, "chunk_size": 262144},
            "pipeline": "full",
        },
        "pareto-iid": {
            "model": {
                "type": "independent",
                "marginals": [
                    {"family": "pareto", "alpha": 2.0, "xmin": 1.0},
                    {"family": "pareto", "alpha": 2.0, "xmin": 1.0},
                    {"family": "pareto", "alpha": 2.0, "xmin": 1.0},
                ],
            },
            "weights": {"type": "fixed", "c": [1.0, 0.0, 0.0]},
            "grids": {"x": {"lo": 5.0, "hi": 100.0, "n": 8, "spacing": "log"}, "q": [0.99]},
            "omega": [1],
            "h": [{"form": "power", "coef": 1.0, "exponent": 0.75}],
            "plan": {"n_samples": 1000000, "seed": 20240814, "chunk_size": 262144},
            "pipeline": "full",
        },
    }


# ---------------------------------------------------------------------------
# output writers
# ---------------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, bool):
        return "1" if v else "0"
    return _CSV_FMT % float(v)


def _write_csv(path, description, columns):
    """columns: list of (name, iterable). First line is a '#' description."""
    names = [name for name, _ in columns]
    rows = zip(*[list(vals) for _, vals in columns])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {description}\n")
        fh.write(",".join(names) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")
    return path


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _slug(value):
    return str(value).replace(".", "p").replace("-", "m").replace(" ", "")


# ---------------------------------------------------------------------------
# pipelines
# ---------------------------------------------------------------------------


def _run_approx(cfg, out):
    xs = cfg.x_grid
    vals = [approx_tail(cfg.model, cfg.weights, x) for x in xs]
    path = _write_csv(
        os.path.join(out, "approx.csv"),
        "first-order tail approximation: sum_i P(c0*X_i > x); "
        "x in loss units, probabilities dimensionless",
        [("x", xs), ("approx_tail", vals)],
    )
    return [path]


def _curve_csv(cfg, out, name):
    curve = ratio_curve(cfg.model, cfg.weights, cfg.x_grid, cfg.plan)
    cols = [
        ("x", [p.x for p in curve.points]),
        ("estimate", [p.estimate.estimate for p in curve.points]),
        ("se", [p.estimate.se for p in curve.points]),
        ("ci_lo", [p.estimate.ci_lo for p in curve.points]),
        ("ci_hi", [p.estimate.ci_hi for p in curve.points]),
        ("approx", [p.approx for p in curve.points]),
        ("ratio", [p.ratio for p in curve.points]),
    ]
    path = _write_csv(
        os.path.join(out, name),
        "Monte Carlo tail estimate of the weighted order-statistic sum vs the "
        "first-order approximation sum_i P(c0*X_i > x); ratio = estimate/approx",
        cols,
    )
    return [path]


def _run_var(cfg, out):
    records = []
    for q in cfg.q_values:
        est = estimate_quantile(cfg.model, cfg.weights, q, cfg.plan)
        c0 = cfg.weights.c0 if isinstance(cfg.weights, FixedWeights) else 1.0
        records.append(
            {
                "q": q,
                "estimate": est.estimate,
                "ci_lo": est.ci_lo,
                "ci_hi": est.ci_hi,
                "n_samples": est.n_samples,
                "confidence": est.confidence,
                "asymptotic": asymptotic_var(cfg.model, q, c0),
            }
        )
    return [_write_json(os.path.join(out, "var.json"), records)]


def _run_cte(cfg, out):
    bounds = cte_bounds(cfg.model, cfg.omega, cfg.x_grid) if len(cfg.x_grid) >= 8 else None
    records = []
    for q in cfg.q_values:
        est = estimate_cte_ratio(cfg.model, cfg.omega, q, cfg.plan)
        rec = {
            "q": q,
            "omega": list(est.omega),
            "ratio": est.ratio,
            "ci_lo": est.ci_lo,
            "ci_hi": est.ci_hi,
            "group_mean": est.group_mean,
            "var_estimate": est.var_estimate.estimate,
            "exceedances": est.exceedances,
        }
        if bounds is not None:
            rec["share_bounds"] = {"u": bounds.u, "U": bounds.U, "converged": bounds.converged}
        records.append(rec)
    return [_write_json(os.path.join(out, "cte.json"), records)]


def _curve_to_csv(curve, path_base, out):
    cols = [
        ("x", curve.x_grid),
        ("value", curve.values),
        ("ci_lo", curve.ci_lo),
        ("ci_hi", curve.ci_hi),
        ("rare", [int(r) for r in curve.rare]),
    ]
    return _write_csv(
        os.path.join(out, path_base),
        f"diagnostic ratio curve '{curve.label}'; verdict={curve.verdict}; "
        f"trend slope (log-log, tail half)={curve.trend_slope:.6g}",
        cols,
    )


def _run_diagnose(cfg, out):
    report = assumption_report(
        cfg.model,
        list(cfg.h_candidates),
        x_grid=cfg.x_grid,
        plan=cfg.plan,
        t_values=cfg.t_values,
        L_values=cfg.L_values,
    )
    files = []
    for (i, j), curve in report.joint_curves.items():
        files.append(_curve_to_csv(curve, f"joint_exceedance_{i}_{j}.csv", out))
    for hi, h in enumerate(cfg.h_candidates):
        for key, curve in report.cross_curves[h].items():
            i, j, t = key
            files.append(
                _curve_to_csv(curve, f"cross_exceedance_h{hi}_{i}_{j}_t{_slug(t)}.csv", out)
            )
        for (i, j, L), curve in report.scaled_curves[h].items():
            files.append(
                _curve_to_csv(curve, f"scaled_exceedance_h{hi}_{i}_{j}_L{_slug(L)}.csv", out)
            )
    verdict = {
        "verdicts": report.verdicts,
        "supported": list(report.supported),
        "joint_exceedance_pass": report.joint_pass,
        "max_tags": sorted(report.max_tags),
        "max_tail_share": report.max_tail_share,
        "max_tail_slope": report.max_tail_slope,
        "candidates": [
            {
                "h": rec.h.to_dict(),
                "cross_status": rec.cross_status,
                "scaled_status": rec.scaled_status,
                "gumbel_match": rec.gumbel_match,
                "empirical_gumbel": rec.empirical_gumbel,
                "h_admissible": (None if rec.h_props is None else rec.h_props.admissible),
            }
            for rec in report.candidates
        ],
    }
    files.append(_write_json(os.path.join(out, "verdicts.json"), verdict))
    return files


_PIPELINE_RUNNERS = {
    "approx": _run_approx,
    "simulate": lambda cfg, out: _curve_csv(cfg, out, "simulate.csv"),
    "curve": lambda cfg, out: _curve_csv(cfg, out, "curve.csv"),
    "var": _run_var,
    "cte": _run_cte,
    "diagnose": _run_diagnose,
}


@dataclass
class RunManifest:
    config_hash: str
    seed: int
    version: str
    pipelines: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.errors

    def to_dict(self):
        return {
            "config_hash": self.config_hash,
            "seed": self.seed,
            "version": self.version,
            "pipelines": self.pipelines,
            "errors": list(self.errors),
        }


def run_experiment(cfg, output_dir=None):
    """Execute the configured pipelines in dependency order, write outputs.

    Validation failures abort before any sampling; pipeline errors are
    recorded in the manifest (and reflected in the process exit status by the
    CLI). The manifest is written exactly once per run.
    """
    out = output_dir or cfg.output_dir
    os.makedirs(out, exist_ok=True)
    manifest = RunManifest(
        config_hash=cfg.config_hash(), seed=cfg.plan.seed, version=_pkg_version
    )
    # dependency order: approx before curves, var before cte
    order = [p for p in PIPELINES if p in cfg.pipelines]
    for name in order:
        started = time.perf_counter()
        try:
            files = _PIPELINE_RUNNERS[name](cfg, out)
            manifest.pipelines[name] = {
                "files": [os.path.basename(f) for f in files],
                "duration_s": time.perf_counter() - started,
            }
        except OrdertailError as exc:
            manifest.errors.append(f"{name}: {exc}")
            manifest.pipelines[name] = {
                "files": [],
                "duration_s": time.perf_counter() - started,
                "error": str(exc),
            }
    _write_json(os.path.join(out, "manifest.json"), manifest.to_dict())
    return manifest


__all__ = [
    "ExperimentConfig",
    "RunManifest",
    "parse_config",
    "load_config",
    "builtin_configs",
    "run_experiment",
    "build_model",
    "build_marginal",
    "build_weights",
    "build_scaling",
    "build_wspec",
    "PIPELINES",
]
