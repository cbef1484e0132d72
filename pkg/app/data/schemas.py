"""
Run configuration and report schemas.
"""
from __future__ import annotations

from enum import Enum
from pathlib import Path
from typing import Any, Optional

from pydantic import BaseModel, Field, field_validator

from app.config import DEFAULT_CFL, DEFAULT_DEGREE, OUTPUT_FOLDER, SUPPORTED_DEGREES


class MeshKind(str, Enum):
    DISK = "disk"
    ANNULUS = "annulus"
    CYLINDER_BOX = "cylinder_box"
    FILE = "file"
    DEFAULT = "default"


class MeshRecipe(BaseModel):
    """A mesh generator call such as ``disk(n=6)`` or ``file(path=meshes/a.mesh)``."""
    kind: MeshKind = MeshKind.DEFAULT
    params: dict[str, Any] = Field(default_factory=dict)

    def label(self) -> str:
        if self.kind is MeshKind.DEFAULT:
            return "default"
        args = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.kind.value}({args})"


class RunConfig(BaseModel):
    case: str
    degree: int = DEFAULT_DEGREE
    cfl: float = DEFAULT_CFL
    final_time: Optional[float] = None
    snapshot_interval: Optional[float] = None
    output_dir: Path = OUTPUT_FOLDER
    mesh: MeshRecipe = Field(default_factory=MeshRecipe)
    corrections: dict[str, bool] = Field(default_factory=dict)
    sweep: list[MeshRecipe] = Field(default_factory=list)
    case_params: dict[str, Any] = Field(default_factory=dict)
    write_vtk: bool = True

    @field_validator("degree")
    @classmethod
    def _supported_degree(cls, v: int) -> int:
        if v not in SUPPORTED_DEGREES:
            raise ValueError(f"degree must be one of {SUPPORTED_DEGREES}, got {v}")
        return v

    @field_validator("cfl")
    @classmethod
    def _positive_cfl(cls, v: float) -> float:
        if not v > 0.0:
            raise ValueError(f"cfl must be positive, got {v}")
        return v

    @field_validator("final_time", "snapshot_interval")
    @classmethod
    def _positive_time(cls, v: Optional[float]) -> Optional[float]:
        if v is not None and not v > 0.0:
            raise ValueError(f"times must be positive, got {v}")
        return v


class ErrorNorms(BaseModel):
    rho: float
    u: float


class RunReport(BaseModel):
    """Deterministic summary of one run (no wall-clock data)."""
    case: str
    degree: int
    cfl: float
    mesh: str
    n_cells: int
    grid_size: float
    corrections: dict[str, bool]
    steps: int
    final_time: float
    snapshot_times: list[float]
    errors: Optional[ErrorNorms] = None
    entropy_deviation: Optional[float] = None
    max_mass_drift: float
    extras: dict[str, float] = Field(default_factory=dict)


class SweepRow(BaseModel):
    mesh: str
    n_cells: int
    grid_size: float
    rho_error: float
    u_error: float
    rho_order: Optional[float] = None
    u_order: Optional[float] = None
