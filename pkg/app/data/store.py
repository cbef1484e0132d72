"""
RunLog: per-step diagnostics and snapshot records collected during a run, exposed as pandas frames.
"""
from __future__ import annotations

from pathlib import Path

import pandas as pd

from app.config import CONSERVATION_FILENAME


class RunLog:
    """Step and snapshot history of one solver run."""

    COLUMNS = ["step", "t", "dt", "mass_before", "mass_after", "boundary_mass_flux", "source_mass",
               "drift", "predictor_sweeps", "cg_iterations"]

    def __init__(self) -> None:
        self._steps: list[dict] = []
        self.snapshots: list[dict] = []

    # ------------------------------------------------------------------
    # Recording
    # ------------------------------------------------------------------

    def record_step(self, diagnostics) -> None:
        self._steps.append(diagnostics.to_dict())

    def record_snapshot(self, index: int, t: float, path: Path | None) -> None:
        self.snapshots.append({"index": index, "t": t, "path": str(path) if path else None})

    # ------------------------------------------------------------------
    # Views
    # ------------------------------------------------------------------

    @property
    def steps(self) -> pd.DataFrame:
        if not self._steps:
            return pd.DataFrame(columns=self.COLUMNS)
        return pd.DataFrame(self._steps, columns=self.COLUMNS)

    @property
    def n_steps(self) -> int:
        return len(self._steps)

    def max_drift(self) -> float:
        df = self.steps
        return float(df["drift"].abs().max()) if not df.empty else 0.0

    def snapshot_times(self) -> list[float]:
        return [s["t"] for s in self.snapshots]

    def write_conservation(self, out_dir: Path) -> Path:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / CONSERVATION_FILENAME
        self.steps.to_csv(path, index=False, float_format="%.17g")
        return path
