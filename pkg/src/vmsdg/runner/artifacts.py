"""Artifact writers: solution samples (CSV) and the run report (JSON).

solution.csv carries dense one-sided traces of the coarse solution:

* 1-D: 200 equally spaced samples per element, columns
  ``x, side, u_exact, u_coarse, u_fine, run``.  Element endpoints appear
  once per incident element, so interior facet positions occur twice; the
  ``side`` tag says which one-sided trace the row holds ("+" for the
  left/upwind element of the facet, "-" for the right, "" for interior
  sample points).
* 2-D: 200 samples along every facet from each incident element, columns
  ``x, x2, side, u_exact, u_coarse, u_fine, run`` (the facet's left
  element is the "+" side).

``u_fine`` is the pointwise reconstruction u_exact - u_coarse; both it and
``u_exact`` are blank when no closed-form solution is configured.  Values
are printed with 17 significant digits and LF line endings, so repeated
runs of the same configuration produce byte-identical files.

report.json records the experiment id, the full configuration echo, every
diagnostic the run measured (plus solver residual and conditioning), the
check list with thresholds and outcomes, and human-readable notes.  The
only field that varies between repeated runs is ``generated_at``.
"""
from __future__ import annotations

import dataclasses
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

from vmsdg.mesh_spaces import Mesh1D
from vmsdg.runner.experiments import ExperimentResult, RunArtifact

_SAMPLES = 200


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


def _rows_1d(run: RunArtifact) -> Iterator[tuple[str, ...]]:
    space = run.space
    xi = np.linspace(-1.0, 1.0, _SAMPLES)
    for e in range(space.mesh.n_elements):
        xs = space.map_to_physical(e, xi)
        coarse = run.fld.eval_element(e, xi)
        exact = run.exact.value(xs) if run.exact is not None else None
        for i in range(_SAMPLES):
            side = "-" if i == 0 else ("+" if i == _SAMPLES - 1 else "")
            if exact is None:
                yield (_fmt(xs[i]), side, "", _fmt(coarse[i]), "", run.name)
            else:
                yield (
                    _fmt(xs[i]),
                    side,
                    _fmt(exact[i]),
                    _fmt(coarse[i]),
                    _fmt(exact[i] - coarse[i]),
                    run.name,
                )


def _rows_2d(run: RunArtifact) -> Iterator[tuple[str, ...]]:
    mesh = run.space.mesh
    ts = np.linspace(0.0, 1.0, _SAMPLES)
    for facet in mesh.facets():
        a, b = facet.vertices
        pts = (1.0 - ts)[:, None] * a + ts[:, None] * b
        exact = run.exact.value(pts) if run.exact is not None else None
        sides = [(facet.left, "+")]
        if not facet.is_boundary:
            sides.append((facet.right, "-"))
        for e, tag in sides:
            coarse = run.fld.eval_points_2d(e, pts)
            for i in range(_SAMPLES):
                if exact is None:
                    yield (
                        _fmt(pts[i, 0]), _fmt(pts[i, 1]), tag,
                        "", _fmt(coarse[i]), "", run.name,
                    )
                else:
                    yield (
                        _fmt(pts[i, 0]), _fmt(pts[i, 1]), tag,
                        _fmt(exact[i]), _fmt(coarse[i]),
                        _fmt(exact[i] - coarse[i]), run.name,
                    )


def write_solution_csv(result: ExperimentResult, out_dir: Path) -> Path:
    path = out_dir / "solution.csv"
    one_d = isinstance(result.runs[0].space.mesh, Mesh1D)
    header = (
        ("x", "side", "u_exact", "u_coarse", "u_fine", "run")
        if one_d
        else ("x", "x2", "side", "u_exact", "u_coarse", "u_fine", "run")
    )
    rows = _rows_1d if one_d else _rows_2d
    with path.open("w", newline="\n") as handle:
        handle.write(",".join(header) + "\n")
        for run in result.runs:
            for row in rows(run):
                handle.write(",".join(row) + "\n")
    return path


def _jsonable(value):
    if isinstance(value, Mapping):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _run_diagnostics(run: RunArtifact) -> dict[str, object]:
    data: dict[str, object] = {
        "residual_norm": run.residual_norm,
        "condition_estimate": run.condition_estimate,
    }
    if run.diagnostics is not None:
        for fld in dataclasses.fields(run.diagnostics):
            value = getattr(run.diagnostics, fld.name)
            if value is None:
                continue
            data[fld.name] = _jsonable(value)
    for key, value in run.info.items():
        data[key] = _jsonable(value)
    return data


def build_report(result: ExperimentResult) -> dict[str, object]:
    """Everything report.json holds except the timestamp."""
    return {
        "experiment": result.experiment,
        "config_echo": _jsonable(dataclasses.asdict(result.config)),
        "diagnostics": {run.name: _run_diagnostics(run) for run in result.runs},
        "checks": [
            {
                "name": c.name,
                "value": c.value,
                "threshold": c.threshold,
                "pass": c.passed,
            }
            for c in result.checks
        ],
        "notes": list(result.notes),
    }


def write_report_json(result: ExperimentResult, out_dir: Path) -> Path:
    path = out_dir / "report.json"
    report = build_report(result)
    report["generated_at"] = datetime.now(timezone.utc).isoformat()
    with path.open("w", newline="\n") as handle:
        json.dump(report, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return path


def write_artifacts(result: ExperimentResult, out_dir: Path) -> tuple[Path, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return write_solution_csv(result, out_dir), write_report_json(result, out_dir)
