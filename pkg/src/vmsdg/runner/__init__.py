"""Experiment runner: expression language, benchmark configs, artifacts, CLI."""
from __future__ import annotations

from vmsdg.runner.artifacts import build_report, write_artifacts
from vmsdg.runner.experiments import (
    EXPERIMENTS,
    Check,
    ExperimentConfig,
    ExperimentDef,
    ExperimentResult,
    RunArtifact,
    apply_overrides,
    config_for,
    config_from_mapping,
    exact_solution_from,
    list_rows,
    run_custom,
    run_experiment,
    scalar_field_from,
)
from vmsdg.runner.expressions import (
    ExpressionError,
    differentiate,
    evaluate,
    parse_expression,
    to_source,
)

__all__ = [
    "EXPERIMENTS",
    "Check",
    "ExperimentConfig",
    "ExperimentDef",
    "ExperimentResult",
    "ExpressionError",
    "RunArtifact",
    "apply_overrides",
    "build_report",
    "config_for",
    "config_from_mapping",
    "differentiate",
    "evaluate",
    "exact_solution_from",
    "list_rows",
    "parse_expression",
    "run_custom",
    "run_experiment",
    "scalar_field_from",
    "to_source",
    "write_artifacts",
]
