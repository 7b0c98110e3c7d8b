#!/usr/bin/env python3
"""Run every registered benchmark, write artifacts, print a pass/fail table.

Usage: python3 scripts/run_all_experiments.py [--out-root DIR]

Exits nonzero if any experiment's checks fail.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from vmsdg.runner import EXPERIMENTS, config_for, run_experiment, write_artifacts


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out-root", default="artifacts", metavar="DIR")
    args = parser.parse_args(argv)
    root = Path(args.out_root)

    failures = 0
    for experiment_id in EXPERIMENTS:
        result = run_experiment(config_for(experiment_id))
        write_artifacts(result, root / experiment_id)
        n_pass = sum(1 for c in result.checks if c.passed)
        status = "pass" if result.passed else "FAIL"
        print(f"{experiment_id:<4} [{status}] {n_pass:2d}/{len(result.checks):2d} checks,"
              f" {len(result.runs)} run(s)")
        for check in result.checks:
            if not check.passed:
                failures += 1
                print(f"     FAIL {check.name}: value = {check.value:.6g},"
                      f" threshold = {check.threshold:.6g}")
    print(f"artifacts under {root}/")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
