"""
Solver error hierarchy.

Every failure carries optional context (pipeline stage, time step index, cell or
face id) so an aborted run can say where it stopped.
"""
from __future__ import annotations

from contextlib import contextmanager
from typing import Iterator


class SolverError(Exception):
    """Base class for all solver failures."""

    def __init__(
        self,
        message: str,
        *,
        cell: int | None = None,
        face: int | None = None,
        stage: str | None = None,
        step: int | None = None,
    ) -> None:
        super().__init__(message)
        self.message = message
        self.cell = cell
        self.face = face
        self.stage = stage
        self.step = step

    def __str__(self) -> str:
        parts = []
        if self.stage is not None:
            parts.append(f"stage={self.stage}")
        if self.step is not None:
            parts.append(f"step={self.step}")
        if self.cell is not None:
            parts.append(f"cell={self.cell}")
        if self.face is not None:
            parts.append(f"face={self.face}")
        prefix = f"[{' '.join(parts)}] " if parts else ""
        return f"{prefix}{self.message}"


class InvalidStateError(SolverError, ValueError):
    """Non-positive density, pressure or internal energy."""


class MeshError(SolverError):
    """Non-conforming or degenerate mesh."""


class MeshParseError(MeshError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None) -> None:
        where = f"{path}:{line}: " if path and line else (f"line {line}: " if line else "")
        super().__init__(f"{where}{message}")
        self.line = line
        self.path = path


class TangledMeshError(MeshError):
    """A triangle reached zero or negative area."""


class ProjectionError(SolverError):
    """Closest-point query is ambiguous or lands too far from the surrogate."""


class StencilError(SolverError):
    pass


class ReconstructionError(SolverError):
    pass


class PredictorError(SolverError):
    pass


class FluxError(SolverError):
    def __init__(self, message: str, *, left=None, right=None, **context) -> None:
        super().__init__(message, **context)
        self.left = left
        self.right = right


class PositivityError(SolverError):
    pass


class HarmonicSolverError(SolverError):
    pass


class AssemblyError(HarmonicSolverError):
    """Boundary vertex without Dirichlet data."""


class TimeStepError(SolverError):
    pass


class ConfigError(SolverError, ValueError):
    pass


@contextmanager
def stage_context(stage: str, step: int | None = None) -> Iterator[None]:
    """Stamp stage/step onto any SolverError escaping the block."""
    try:
        yield
    except SolverError as exc:
        if exc.stage is None:
            exc.stage = stage
        if exc.step is None:
            exc.step = step
        raise
