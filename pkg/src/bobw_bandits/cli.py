"""Command-line entry points.

Exit codes: 0 success, 1 invariant violation, 2 config error, 3 solver
failure.  Top-level scalar config keys can be overridden through environment
variables prefixed with ``BOBW_`` (e.g. BOBW_HORIZON=1000).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np
import yaml

from . import diagnostics
from .environments import InvalidConfig
from .ftrl import NonConvergence
from .harness import ExperimentConfig, run_experiment, write_csv
from .scheduler import SchedulerError

ENV_PREFIX = "BOBW_"

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}")
    if not isinstance(data, dict):
        raise InvalidConfig(f"config {path} must be a mapping")
    for key in list(data):
        override = os.environ.get(ENV_PREFIX + key.upper())
        if override is not None and not isinstance(data[key], dict):
            data[key] = yaml.safe_load(override)
    return data


def _apply_common_overrides(data: dict, args) -> dict:
    if args.seeds:
        data["seeds"] = [int(s) for s in args.seeds.split(",")]
    if args.out:
        data["out"] = args.out
    if getattr(args, "verify", False):
        data["verify"] = True
    return data


def cmd_run(args) -> int:
    data = _apply_common_overrides(_load_config(args.config), args)
    config = ExperimentConfig.from_dict(data)
    trace = run_experiment(config, parallel=args.parallel)
    out = config.out or "results.csv"
    write_csv(trace, out)
    print(f"wrote {out}: {len(config.seeds)} seeds x {len(config.checkpoints)} checkpoints")
    if config.verify:
        for res in trace.results:
            report = diagnostics.run_invariant_suite(res.history)
            print(f"seed {res.seed}:")
            print(report.render())
            if not report.passed:
                return EXIT_INVARIANT
    return EXIT_OK


def cmd_diagnose(args) -> int:
    data = _apply_common_overrides(_load_config(args.config), args)
    data["collect_history"] = True
    config = ExperimentConfig.from_dict(data)
    trace = run_experiment(config, parallel=args.parallel)
    wanted = set(args.checks.split(","))
    unknown = wanted - {"drift", "rearrange", "lambda", "skips"}
    if unknown:
        raise InvalidConfig(f"unknown checks: {sorted(unknown)}")
    failed = False
    for res in trace.results:
        history = res.history
        print(f"seed {res.seed}:")
        if "skips" in wanted:
            report = diagnostics.run_invariant_suite(history)
            print(report.render())
            failed |= not report.passed
        if "drift" in wanted:
            check = diagnostics.check_drift(history, budget=args.budget)
            print(check.line())
            failed |= not check.passed
        if "rearrange" in wanted:
            result = diagnostics.greedy_rearrangement(history.waits)
            sigma = diagnostics.waiting_sigma_series(history.waits, history.horizon)
            report = diagnostics.check_rearrangement(result, np.maximum.accumulate(sigma))
            print(report.render())
            failed |= not report.passed
        if "lambda" in wanted:
            total, smax, ratio = diagnostics.lambda_sum_report(history)
            print(f"lambda_sum: total={total:.6g} sigma_hat_max={smax} ratio={ratio:.6g}")
    return EXIT_INVARIANT if failed else EXIT_OK


def cmd_minimize_skips(args) -> int:
    delays = np.loadtxt(args.delays, dtype=np.int64, ndmin=1)
    result = diagnostics.skip_set_minimizer(delays, args.arms)
    print(json.dumps({
        "skip_count": result.skip_count,
        "value": result.value,
        "sqrt_total_delay": result.sqrt_total_delay,
        "sqrt_d_inequality_ok": result.sqrt_d_inequality_ok,
    }))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bobw",
        description="Delayed-feedback best-of-both-worlds bandit simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a regret experiment")
    run_p.add_argument("--config", required=True)
    run_p.add_argument("--seeds", help="comma-separated seed list override")
    run_p.add_argument("--out", help="output CSV path override")
    run_p.add_argument("--parallel", type=int, default=1)
    run_p.add_argument("--verify", action="store_true",
                       help="run in-loop invariant checks (~2x slowdown)")
    run_p.set_defaults(func=cmd_run)

    diag_p = sub.add_parser("diagnose", help="run lemma-level diagnostics")
    diag_p.add_argument("--config", required=True)
    diag_p.add_argument("--checks", default="drift,rearrange,lambda,skips")
    diag_p.add_argument("--budget", type=int, default=100_000)
    diag_p.add_argument("--seeds", help="comma-separated seed list override")
    diag_p.add_argument("--out")
    diag_p.add_argument("--parallel", type=int, default=1)
    diag_p.set_defaults(func=cmd_diagnose)

    min_p = sub.add_parser("minimize-skips", help="offline optimal skip set")
    min_p.add_argument("--delays", required=True, help="delay file, one integer per line")
    min_p.add_argument("--arms", type=int, required=True)
    min_p.set_defaults(func=cmd_minimize_skips)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidConfig as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonConvergence as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except SchedulerError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
