"""
Run orchestration: one configured run, or a convergence sweep over a list of mesh recipes.
"""
from __future__ import annotations

import logging
import time
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from app.config import THREADS, TIME_EPSILON
from app.data.loader import resolve_case, resolve_mesh
from app.data.schemas import MeshRecipe, RunConfig, RunReport
from app.data.store import RunLog
from app.errors import ConfigError
from app.reports import convergence_report
from app.reports.run_report import build_run_report, generate_timings, write_run_outputs
from app.reports.vtk_writer import snapshot_path, write_vtk
from app.scheme.solver import ALESolver

logger = logging.getLogger(__name__)


def snapshot_schedule(final_time: float, interval: float | None) -> list[float]:
    """Multiples of `interval` up to and including the final time, which is always present."""
    times: list[float] = []
    if interval is not None:
        n = int(np.floor(final_time / interval * (1.0 + TIME_EPSILON)))
        times = [k * interval for k in range(1, n + 1) if k * interval < final_time * (1.0 - TIME_EPSILON)]
    return times + [final_time]


def run_case(config: RunConfig, recipe: MeshRecipe | None = None, output_dir: Path | None = None,
             write_outputs: bool = True) -> RunReport:
    """Validate, march to the final time, write outputs. Config errors surface before any compute."""
    case = resolve_case(config)
    recipe = recipe or config.mesh
    mesh = resolve_mesh(config, case, recipe)
    out_dir = Path(output_dir or config.output_dir)
    solver = ALESolver(case, config.degree, config.cfl, mesh=mesh)
    grid_size = mesh.characteristic_size()
    t_final = config.final_time or case.final_time
    log = RunLog()

    def on_snapshot(s: ALESolver) -> None:
        index = len(log.snapshots)
        path = None
        if write_outputs and config.write_vtk:
            path = write_vtk(s.mesh, s.Q, s.gas, snapshot_path(out_dir, index), time=s.t)
        log.record_snapshot(index, s.t, path)

    started = time.perf_counter()
    solver.initialize()
    for diag in solver.run(t_final, snapshot_schedule(t_final, config.snapshot_interval), on_snapshot):
        log.record_step(diag)
    wall_clock = time.perf_counter() - started

    report = build_run_report(config, solver, recipe.label(), grid_size, log)
    if write_outputs:
        write_run_outputs(out_dir, report, generate_timings(solver.timings, wall_clock), log, solver)
    logger.info("%s on %s: %d steps, %.2fs", case.name, recipe.label(), report.steps, wall_clock)
    return report


def _sweep_member(config: RunConfig, recipe: MeshRecipe, index: int) -> RunReport:
    sub_dir = Path(config.output_dir) / f"mesh_{index:02d}"
    return run_case(config, recipe, output_dir=sub_dir)


def convergence_sweep(config: RunConfig, n_jobs: int = THREADS) -> dict:
    """Run every sweep recipe (in parallel, results kept in recipe order) and emit the convergence table."""
    if not config.sweep:
        raise ConfigError("sweep needs a [sweep] meshes list")
    case = resolve_case(config)
    if case.exact is None:
        raise ConfigError(f"case {case.name!r} has no exact solution; nothing to converge to")
    for recipe in config.sweep:
        resolve_mesh(config, case, recipe)

    reports = Parallel(n_jobs=n_jobs)(
        delayed(_sweep_member)(config, recipe, i) for i, recipe in enumerate(config.sweep)
    )
    rows = convergence_report.sweep_rows(reports)
    corrections = {tag: spec.corrected for tag, spec in case.boundaries.items()}
    data = convergence_report.generate_json(rows, case.name, config.degree, corrections)
    convergence_report.write_convergence_outputs(data, Path(config.output_dir))
    return data
