"""Command-line interface.

Subcommands:
  list    print the benchmark experiments, one per line
  run     run a benchmark by id, write artifacts, evaluate its checks
  solve   solve a problem described by a JSON config file

Exit codes: 0 all checks passed, 1 the run completed but at least one
check failed, 2 configuration or model mismatch, 3 solver failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from vmsdg.linsolve import SingularSystemError
from vmsdg.runner.artifacts import write_artifacts
from vmsdg.runner.experiments import (
    ExperimentConfig,
    apply_overrides,
    config_for,
    config_from_mapping,
    list_rows,
    run_experiment,
)
from vmsdg.runner.expressions import ExpressionError
from vmsdg.weakforms import ConfigError

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vmsdg",
        description="discontinuous Galerkin solver with fine-scale closures",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("list", help="list the benchmark experiments")
    run_p = sub.add_parser("run", help="run a benchmark experiment")
    run_p.add_argument("--experiment", required=True, metavar="ID", help="experiment id, e.g. E4")
    run_p.add_argument("--out", metavar="DIR", help="artifact directory (default artifacts/<ID>)")
    run_p.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config field; VALUE parses as JSON when possible",
    )
    solve_p = sub.add_parser("solve", help="solve a problem from a JSON config file")
    solve_p.add_argument("--config", required=True, metavar="FILE")
    solve_p.add_argument("--out", required=True, metavar="DIR")
    return parser


def _execute(cfg: ExperimentConfig, out_dir: Path) -> int:
    try:
        result = run_experiment(cfg)
    except (ConfigError, ExpressionError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SingularSystemError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    csv_path, report_path = write_artifacts(result, out_dir)
    print(f"{result.experiment}: {len(result.runs)} run(s) -> {csv_path}, {report_path}")
    for check in result.checks:
        status = "pass" if check.passed else "FAIL"
        print(
            f"  [{status}] {check.name}: value = {check.value:.6g}, "
            f"threshold = {check.threshold:.6g}"
        )
    for note in result.notes:
        print(f"  note: {note}")
    if not result.checks:
        return EXIT_OK
    failed = sum(1 for c in result.checks if not c.passed)
    if failed:
        print(f"{failed} of {len(result.checks)} checks failed", file=sys.stderr)
        return EXIT_CHECKS_FAILED
    print(f"all {len(result.checks)} checks passed")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for row in list_rows():
            print(row)
        return EXIT_OK
    if args.command == "run":
        try:
            cfg = apply_overrides(config_for(args.experiment), args.override)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        out_dir = Path(args.out) if args.out else Path("artifacts") / args.experiment
        return _execute(cfg, out_dir)
    try:
        data = json.loads(Path(args.config).read_text())
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg = config_from_mapping(data)
    except (OSError, json.JSONDecodeError, ConfigError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return _execute(cfg, Path(args.out))


if __name__ == "__main__":
    sys.exit(main())
