"""Command-line entry point.

    ordertail <subcommand> --config <path-or-builtin> [--seed S] [--samples N] [--out DIR]

Subcommands select the pipeline (approx, simulate, curve, var, cte, diagnose,
full); ``list-builtins`` prints the shipped configs. ``--config`` accepts a
file path or a builtin name. Exit status is 0 only when every pipeline
completed. ``ORDERTAIL_WORKERS`` picks the worker-thread count and never
changes numeric output.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .errors import OrdertailError
from .experiments import PIPELINES, builtin_configs, parse_config, run_experiment

_SUBCOMMANDS = PIPELINES + ("full",)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="ordertail",
        description="Tail approximations and Monte Carlo oracles for weighted "
        "sums of order statistics of dependent heavy-tailed risks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the '{name}' pipeline")
        p.add_argument("--config", required=True, help="config file path or builtin name")
        p.add_argument("--seed", type=int, default=None, help="override plan seed")
        p.add_argument("--samples", type=int, default=None, help="override plan sample count")
        p.add_argument("--out", default=None, help="output directory")
    sub.add_parser("list-builtins", help="list the shipped experiment configs")
    return parser


def _load_raw_config(ref):
    builtins = builtin_configs()
    if ref in builtins:
        return json.loads(json.dumps(builtins[ref]))
    with open(ref, "r", encoding="utf-8") as fh:
        return json.load(fh)


def main(argv=None):
    args = _build_parser().parse_args(argv)
    if args.command == "list-builtins":
        for name in sorted(builtin_configs()):
            print(name)
        return 0
    try:
        raw = _load_raw_config(args.config)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    if args.command != "full":
        raw["pipeline"] = args.command
    if args.seed is not None:
        raw.setdefault("plan", {})["seed"] = args.seed
    if args.samples is not None:
        raw.setdefault("plan", {})["n_samples"] = args.samples
    try:
        cfg = parse_config(raw)
    except OrdertailError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    manifest = run_experiment(cfg, output_dir=args.out)
    for name, info in manifest.pipelines.items():
        status = "error: " + info["error"] if "error" in info else "ok"
        print(f"{name}: {status} ({info['duration_s']:.2f}s, {len(info['files'])} files)")
    if not manifest.ok:
        for err in manifest.errors:
            print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
