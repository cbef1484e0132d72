"""
Single-run report: report.json (deterministic), timings.json, conservation.csv and the Kidder scatter.
"""
from __future__ import annotations

from pathlib import Path
from typing import Mapping

import numpy as np

from app.cases.metrics import entropy_deviation, kidder_scatter, l2_error
from app.config import REPORT_FILENAME, SCATTER_FILENAME, TIMINGS_FILENAME
from app.data.schemas import ErrorNorms, RunConfig, RunReport
from app.data.store import RunLog
from app.reports.common import sanitize_for_json, write_json


def _extras(solver) -> dict[str, float]:
    """Case-specific scalars worth tracking across runs."""
    extras: dict[str, float] = {}
    mesh = solver.mesh
    if solver.case.name == "kidder":
        inner = mesh.vertices[mesh.boundary_vertices("inner")]
        extras["inner_radius"] = float(np.mean(np.hypot(inner[:, 0], inner[:, 1])))
    extras["total_area"] = float(mesh.total_area())
    return extras


def build_run_report(config: RunConfig, solver, mesh_label: str, grid_size: float, log: RunLog) -> RunReport:
    """Collect the end-of-run state of `solver` into a RunReport."""
    case = solver.case
    errors = None
    if case.exact is not None:
        errors = ErrorNorms(**l2_error(solver.mesh, solver.reconstruction(), case.exact, solver.t))
    deviation = None
    if case.entropy_reference is not None:
        deviation = entropy_deviation(solver.Q, solver.gas, case.entropy_reference)
    return RunReport(
        case=case.name,
        degree=solver.degree,
        cfl=solver.cfl,
        mesh=mesh_label,
        n_cells=solver.mesh.n_cells,
        grid_size=grid_size,
        corrections={tag: spec.corrected for tag, spec in sorted(case.boundaries.items())},
        steps=solver.step_index,
        final_time=solver.t,
        snapshot_times=log.snapshot_times(),
        errors=errors,
        entropy_deviation=deviation,
        max_mass_drift=log.max_drift(),
        extras=_extras(solver),
    )


def generate_json(report: RunReport) -> dict:
    return sanitize_for_json(report.model_dump(mode="json"))


def generate_timings(stage_seconds: Mapping[str, float], wall_clock: float) -> dict:
    return {
        "wall_clock": wall_clock,
        "stages": {k: stage_seconds[k] for k in sorted(stage_seconds)},
    }


def write_run_outputs(out_dir: Path, report: RunReport, timings: dict, log: RunLog,
                      solver=None) -> dict[str, Path]:
    """Write every per-run file; returns name -> path."""
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "report": write_json(generate_json(report), out_dir / REPORT_FILENAME),
        "timings": write_json(timings, out_dir / TIMINGS_FILENAME),
        "conservation": log.write_conservation(out_dir),
    }
    if solver is not None and solver.case.name == "kidder":
        path = out_dir / SCATTER_FILENAME
        kidder_scatter(solver.mesh, solver.Q).to_csv(path, index=False, float_format="%.17g")
        paths["scatter"] = path
    return paths
