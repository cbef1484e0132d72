"""
Case definitions: everything a run needs besides numerical settings.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np

from app.geometry.boundary import BoundaryDescriptor
from app.mesh.trimesh import TriMesh
from app.physics.euler import GasModel, primitive_to_conserved
from app.scheme.sbm import BCSpec

StateFn = Callable[[np.ndarray, np.ndarray], np.ndarray]      # (x (N, 2), t (N,)) -> conserved (N, 4)
SourceFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
PositionRule = Callable[[np.ndarray, float], np.ndarray]      # (positions (n, 2), t) -> (n, 2)


@dataclass(frozen=True)
class BoundaryMotion:
    """Prescribed velocity of the boundary vertices of one tag.

    `instantaneous(x, t)` sizes the time step; `secant(x, t, dt)` is the
    constant velocity carrying each vertex to its exact position at t + dt.
    """

    instantaneous: PositionRule
    secant: Callable[[np.ndarray, float, float], np.ndarray]

    @classmethod
    def fixed(cls) -> "BoundaryMotion":
        return cls(lambda x, t: np.zeros_like(x), lambda x, t, dt: np.zeros_like(x))


@dataclass(frozen=True)
class CaseDefinition:
    name: str
    gas: GasModel
    mesh_factory: Callable[[], TriMesh]
    initial_state: StateFn
    boundaries: Mapping[str, BCSpec]
    motion: Mapping[str, BoundaryMotion]
    final_time: float
    exact: StateFn | None = None
    source: SourceFn | None = None
    interior_motion: PositionRule | None = None
    descriptors: Mapping[str, BoundaryDescriptor] = field(default_factory=dict)
    parameters: Mapping[str, float] = field(default_factory=dict)
    entropy_reference: float | None = None  # p / rho^gamma of an isentropic flow

    @property
    def tags(self) -> list[str]:
        return sorted(self.boundaries)

    def with_corrections(self, toggles: Mapping[str, bool]) -> "CaseDefinition":
        """Copy with the shifted boundary correction switched per tag."""
        unknown = sorted(set(toggles) - set(self.boundaries))
        if unknown:
            raise KeyError(f"no boundary condition for tag(s) {unknown}")
        specs = {tag: (spec.with_correction(toggles[tag]) if tag in toggles else spec)
                 for tag, spec in self.boundaries.items()}
        return replace(self, boundaries=specs)

    def with_mesh(self, factory: Callable[[], TriMesh]) -> "CaseDefinition":
        return replace(self, mesh_factory=factory)


def primitive_provider(fn: Callable[[np.ndarray, np.ndarray], tuple], gas: GasModel) -> StateFn:
    """Wrap fn(x, t) -> (rho, u, v, p) arrays as a conserved-state provider."""

    def provider(x, t):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        t = np.broadcast_to(np.asarray(t, dtype=float), x.shape[:1])
        rho, u, v, p = np.broadcast_arrays(*fn(x, t))
        return primitive_to_conserved(np.stack([rho, u, v, p], axis=-1), gas)

    return provider


def uniform_state(rho: float, u: float, v: float, p: float, gas: GasModel) -> StateFn:
    return primitive_provider(lambda x, t: (np.full(len(x), rho), u, v, p), gas)
