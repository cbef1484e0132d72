import json
from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from openpyxl import load_workbook

from app.config import VTK_HEADER
from app.data.schemas import ErrorNorms, RunReport
from app.data.store import RunLog
from app.physics.euler import primitive_to_conserved
from app.reports import convergence_report
from app.reports.common import sanitize_for_json, write_json
from app.reports.run_report import generate_timings
from app.reports.vtk_writer import snapshot_path, write_vtk
from app.scheme.solver import StepDiagnostics


def make_report(mesh: str, h: float, rho: float, u: float) -> RunReport:
    return RunReport(case="manufactured", degree=2, cfl=0.5, mesh=mesh, n_cells=int(1 / h ** 2), grid_size=h,
                     corrections={"outer": True}, steps=10, final_time=0.5, snapshot_times=[0.5],
                     errors=ErrorNorms(rho=rho, u=u), max_mass_drift=1e-15)


def diagnostics(step: int, drift: float) -> StepDiagnostics:
    return StepDiagnostics(step=step, t=0.1 * (step + 1), dt=0.1, mass_before=1.0, mass_after=1.0,
                           boundary_mass_flux=0.0, source_mass=0.0, drift=drift, predictor_sweeps=3)


def test_vtk_snapshot_layout(tmp_path, small_disk, gas):
    q = primitive_to_conserved(np.array([1.0, 0.5, -0.5, 1.0]), gas)
    path = write_vtk(small_disk, np.tile(q, (small_disk.n_cells, 1)), gas, snapshot_path(tmp_path, 3), time=0.25)
    assert path.name == "snapshot_0003.vtk"
    lines = path.read_text().splitlines()
    assert lines[0] == VTK_HEADER
    assert lines[2] == "ASCII"
    assert f"POINTS {small_disk.n_vertices} double" in lines
    assert f"CELLS {small_disk.n_cells} {4 * small_disk.n_cells}" in lines
    assert lines.count("5") == small_disk.n_cells
    for name in ("rho", "u", "v", "p", "S"):
        assert f"SCALARS {name} double 1" in lines
    assert "VECTORS velocity double" in lines
    rho_at = lines.index("SCALARS rho double 1") + 2
    assert float(lines[rho_at]) == 1.0


def test_vtk_snapshot_reads_back(tmp_path, small_disk, gas):
    vtk = pytest.importorskip("vtk")
    q = primitive_to_conserved(np.array([1.0, 0.0, 0.0, 1.0]), gas)
    path = write_vtk(small_disk, np.tile(q, (small_disk.n_cells, 1)), gas, tmp_path / "s.vtk")
    reader = vtk.vtkUnstructuredGridReader()
    reader.SetFileName(str(path))
    reader.ReadAllScalarsOn()
    reader.Update()
    grid = reader.GetOutput()
    assert grid.GetNumberOfCells() == small_disk.n_cells
    assert grid.GetNumberOfPoints() == small_disk.n_vertices


def test_sanitize_for_json():
    data = {"a": np.float64("nan"), "b": np.int64(3), "c": [np.inf, 1.0], "d": Path("out/x"),
            "e": np.array([1, 2]), "f": np.bool_(True)}
    assert sanitize_for_json(data) == {"a": None, "b": 3, "c": [None, 1.0], "d": "out/x", "e": [1, 2], "f": True}


def test_write_json_is_sorted_and_terminated(tmp_path):
    path = write_json({"z": 1, "a": {"y": 2.5, "b": None}}, tmp_path / "r.json")
    text = path.read_text()
    assert text.endswith("}\n")
    assert text.index('"a"') < text.index('"z"')
    assert json.loads(text) == {"a": {"b": None, "y": 2.5}, "z": 1}


def test_sweep_rows_compute_orders_between_neighbours():
    reports = [make_report("disk(n=4)", 0.2, 1e-3, 2e-3), make_report("disk(n=8)", 0.1, 1.25e-4, 5e-4)]
    rows = convergence_report.sweep_rows(reports)
    assert rows[0].rho_order is None
    assert rows[1].rho_order == pytest.approx(3.0)
    assert rows[1].u_order == pytest.approx(2.0)


def test_single_mesh_sweep_has_no_orders():
    rows = convergence_report.sweep_rows([make_report("disk(n=4)", 0.2, 1e-3, 2e-3)])
    assert len(rows) == 1
    assert rows[0].u_order is None


def test_sweep_rows_need_errors():
    report = make_report("disk(n=4)", 0.2, 1e-3, 2e-3).model_copy(update={"errors": None})
    with pytest.raises(ValueError):
        convergence_report.sweep_rows([report])


def test_convergence_outputs(tmp_path):
    reports = [make_report("disk(n=4)", 0.2, 1e-3, 2e-3), make_report("disk(n=8)", 0.1, 1.25e-4, 5e-4)]
    rows = convergence_report.sweep_rows(reports)
    data = convergence_report.generate_json(rows, "manufactured", 2, {"outer": True})
    assert data["rows"][0]["rho_order"] is None
    paths = convergence_report.write_convergence_outputs(data, tmp_path)

    assert json.loads(paths["json"].read_text()) == data
    frame = pd.read_csv(paths["csv"])
    assert list(frame.columns) == [key for key, _, _ in convergence_report.COLS]
    assert frame["rho_error"].iloc[1] == pytest.approx(1.25e-4)

    wb = load_workbook(paths["xlsx"])
    ws = wb["Convergence"]
    assert "manufactured" in ws["A1"].value
    values = [c.value for row in ws.iter_rows() for c in row if c.value is not None]
    assert "disk(n=8)" in values


def test_run_log(tmp_path):
    log = RunLog()
    assert log.max_drift() == 0.0
    assert log.steps.empty
    log.record_step(diagnostics(0, 1e-15))
    log.record_step(diagnostics(1, -3e-15))
    log.record_snapshot(0, 0.2, tmp_path / "snapshot_0000.vtk")
    assert log.n_steps == 2
    assert log.max_drift() == pytest.approx(3e-15)
    assert log.snapshot_times() == [0.2]
    frame = pd.read_csv(log.write_conservation(tmp_path))
    assert list(frame.columns) == RunLog.COLUMNS
    assert frame["predictor_sweeps"].tolist() == [3, 3]


def test_timings_are_sorted():
    timings = generate_timings({"update": 0.5, "fluxes": 1.0}, 2.0)
    assert list(timings["stages"]) == ["fluxes", "update"]
    assert timings["wall_clock"] == 2.0
