"""
Convergence table: grid size, L2 errors of density and velocity, observed orders.

JSON is the source of truth; the CSV and the styled workbook are rendered from it.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Sequence

import pandas as pd

from app.cases.metrics import observed_order
from app.config import CONVERGENCE_BASENAME
from app.data.schemas import RunReport, SweepRow
from app.excel.writer import ExcelWriter
from app.reports.common import sanitize_for_json, write_json

logger = logging.getLogger(__name__)

COLS = [
    ("mesh", "text", "Mesh"),
    ("n_cells", "int", "Cells"),
    ("grid_size", "sci", "Grid size h"),
    ("rho_error", "sci", "L2 error rho"),
    ("rho_order", "order", "Order rho"),
    ("u_error", "sci", "L2 error u"),
    ("u_order", "order", "Order u"),
]


def sweep_rows(reports: Sequence[RunReport]) -> list[SweepRow]:
    """One row per run; orders only between consecutive meshes, the first row has none."""
    rows: list[SweepRow] = []
    prev: RunReport | None = None
    for rep in reports:
        if rep.errors is None:
            raise ValueError(f"case {rep.case!r} has no exact solution; cannot tabulate errors")
        row = SweepRow(mesh=rep.mesh, n_cells=rep.n_cells, grid_size=rep.grid_size,
                       rho_error=rep.errors.rho, u_error=rep.errors.u)
        if prev is not None:
            row.rho_order = observed_order(prev.grid_size, prev.errors.rho, rep.grid_size, rep.errors.rho)
            row.u_order = observed_order(prev.grid_size, prev.errors.u, rep.grid_size, rep.errors.u)
        rows.append(row)
        prev = rep
    return rows


def generate_json(rows: Sequence[SweepRow], case: str, degree: int, corrections: dict[str, bool]) -> dict:
    return sanitize_for_json({
        "case": case,
        "degree": degree,
        "corrections": dict(sorted(corrections.items())),
        "rows": [r.model_dump() for r in rows],
    })


def to_frame(data: dict) -> pd.DataFrame:
    return pd.DataFrame(data["rows"], columns=[key for key, _, _ in COLS])


def write_csv(data: dict, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    to_frame(data).to_csv(path, index=False, float_format="%.6e")
    return path


def generate_excel(data: dict, path: Path) -> Path:
    ew = ExcelWriter()
    ws = ew.add_sheet("Convergence")
    corrections = ", ".join(f"{k}={'on' if v else 'off'}" for k, v in data["corrections"].items()) or "none"
    row = ew.write_title(ws, f"Convergence: {data['case']}", f"M = {data['degree']}  |  corrections: {corrections}")

    rows = data["rows"]
    if rows:
        last = rows[-1]
        row = ew.write_section(ws, row, "Finest mesh")
        row = ew.write_kpi_row(ws, row, [
            (last["grid_size"], "Grid size h", "sci"),
            (last["rho_error"], "L2 error rho", "sci"),
            (last["rho_order"], "Order rho", "order"),
        ])

    row = ew.write_section(ws, row, "Error table")
    target = data["degree"] + 1

    def highlight(_, record):
        order = record.get("rho_order")
        if order is None:
            return None
        return "pass" if order >= target - 0.5 else "fail"

    row = ew.write_table(ws, row, COLS, rows, highlight_fn=highlight)
    ew.write_note(ws, row + 1, f"Orders between consecutive meshes; design order {target}.")
    return ew.save(path)


def write_convergence_outputs(data: dict, out_dir: Path) -> dict[str, Path]:
    paths = {
        "json": write_json(data, out_dir / f"{CONVERGENCE_BASENAME}.json"),
        "csv": write_csv(data, out_dir / f"{CONVERGENCE_BASENAME}.csv"),
        "xlsx": generate_excel(data, out_dir / f"{CONVERGENCE_BASENAME}.xlsx"),
    }
    logger.info("convergence table written to %s", out_dir)
    return paths
