"""
Time-marching driver.

One step: reconstruct -> vertex velocities -> time step -> predictor ->
face fluxes (interior + boundary) -> finite volume update -> move the mesh.
Every stage runs inside `stage_context` so failures carry stage and step.
"""
from __future__ import annotations

import logging
import time
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from app.cases.base import CaseDefinition
from app.config import DEFAULT_CFL, SUPPORTED_DEGREES, TIME_EPSILON, TIMESTEP_MAX_HALVINGS, TIMESTEP_UNDERFLOW
from app.errors import ConfigError, MeshError, TimeStepError, stage_context
from app.mesh.trimesh import TriMesh, cell_averages, move_vertices, require_tags
from app.physics.euler import validate_conserved
from app.scheme.ale import accumulate_fluxes, compute_timestep, face_geometry, fv_update, interior_face_flux
from app.scheme.basis import spacetime_basis
from app.scheme.mesh_motion import HarmonicMeshMotion
from app.scheme.predictor import (
    compute_vertex_velocities,
    precompute_reference_tensors,
    slab_geometry,
    slab_min_areas,
    solve_predictor,
)
from app.scheme.sbm import boundary_face_flux
from app.scheme.weno import ReconstructionField, WenoReconstructor

logger = logging.getLogger(__name__)


@dataclass
class StepDiagnostics:
    step: int
    t: float
    dt: float
    mass_before: float
    mass_after: float
    boundary_mass_flux: float
    source_mass: float
    drift: float
    predictor_sweeps: int
    predictor_norms: list[float] = field(default_factory=list)
    cg_iterations: int = 0

    def to_dict(self) -> dict:
        return {
            "step": self.step, "t": self.t, "dt": self.dt,
            "mass_before": self.mass_before, "mass_after": self.mass_after,
            "boundary_mass_flux": self.boundary_mass_flux, "source_mass": self.source_mass,
            "drift": self.drift, "predictor_sweeps": self.predictor_sweeps, "cg_iterations": self.cg_iterations,
        }


class ALESolver:
    """Direct ALE finite volume solver bound to one case, degree and mesh topology."""

    def __init__(self, case: CaseDefinition, degree: int, cfl: float = DEFAULT_CFL,
                 mesh: TriMesh | None = None) -> None:
        if degree not in SUPPORTED_DEGREES:
            raise ConfigError(f"unsupported degree {degree}; choose from {SUPPORTED_DEGREES}")
        if not cfl > 0.0:
            raise ConfigError(f"CFL must be positive, got {cfl}")
        self.case = case
        self.gas = case.gas
        self.degree = degree
        self.cfl = cfl
        with stage_context("setup"):
            self.mesh = mesh if mesh is not None else case.mesh_factory()
            require_tags(self.mesh, list(case.boundaries))
            missing = sorted(set(self.mesh.tags) - set(case.boundaries))
            if missing:
                raise MeshError(f"boundary tag(s) {missing} have no boundary condition")
            self.weno = WenoReconstructor(self.mesh, degree)
            self.motion = HarmonicMeshMotion(self.mesh)
            self.tensors = precompute_reference_tensors(spacetime_basis(degree))
        self.topology = self.mesh.connectivity_checksum()
        self.t = 0.0
        self.step_index = 0
        self.Q: np.ndarray | None = None
        self.history: list[StepDiagnostics] = []
        self.timings: dict[str, float] = defaultdict(float)

    # ------------------------------------------------------------------
    # Setup
    # ------------------------------------------------------------------

    def initialize(self) -> np.ndarray:
        """Cell averages of the initial state (rule exact to degree 2M + 2)."""
        with stage_context("initialize"):
            n = self.mesh.n_cells
            self.Q = cell_averages(self.mesh, lambda x: self.case.initial_state(x, np.zeros(len(x))),
                                   2 * self.degree + 2)
            validate_conserved(self.Q, self.gas)
        logger.info("initialised %s: %d cells, M=%d", self.case.name, n, self.degree)
        return self.Q

    def _boundary_rules(self, t: float, dt: float | None = None) -> dict[str, Callable]:
        rules = {}
        for tag, motion in self.case.motion.items():
            if dt is None:
                rules[tag] = (lambda m: lambda x: m.instantaneous(x, t))(motion)
            else:
                rules[tag] = (lambda m: lambda x: m.secant(x, t, dt))(motion)
        return rules

    def _interior_rule(self, t: float):
        fn = self.case.interior_motion
        return None if fn is None else (lambda x: fn(x, t))

    def reconstruction(self) -> ReconstructionField:
        return self.weno.reconstruct(self.mesh, self.Q)

    # ------------------------------------------------------------------
    # Stepping
    # ------------------------------------------------------------------

    def _timed(self, stage: str, started: float) -> None:
        self.timings[stage] += time.perf_counter() - started

    def step(self, t_final: float | None = None, targets: Iterable[float] = ()) -> StepDiagnostics:
        if self.Q is None:
            self.initialize()
        k = self.step_index
        mesh, Q, t, M, gas = self.mesh, self.Q, self.t, self.degree, self.gas

        started = time.perf_counter()
        with stage_context("reconstruct", k):
            field_ = self.weno.reconstruct(mesh, Q)
        self._timed("reconstruct", started)

        started = time.perf_counter()
        with stage_context("mesh_velocity", k):
            V_now = compute_vertex_velocities(mesh, self._boundary_rules(t), self.motion, self._interior_rule(t))
        with stage_context("timestep", k):
            dt = compute_timestep(mesh, Q, V_now, self.cfl, M, gas, t, t_final, targets)
        with stage_context("mesh_velocity", k):
            for _ in range(TIMESTEP_MAX_HALVINGS):
                V = compute_vertex_velocities(mesh, self._boundary_rules(t, dt), self.motion,
                                              self._interior_rule(t))
                if np.all(slab_min_areas(mesh, V, dt) > 0.0):
                    break
                dt *= 0.5
            else:
                raise TimeStepError("no admissible time step for the exact boundary displacement")
            if dt < TIMESTEP_UNDERFLOW * (t_final or 1.0):
                raise TimeStepError(f"time step underflow: dt={dt:.3e}")
            cg_iterations = self.motion.last_iterations
        self._timed("mesh_velocity", started)

        started = time.perf_counter()
        with stage_context("predictor", k):
            geometry = slab_geometry(mesh, V, dt)
            predictor, source_nodes = solve_predictor(field_, geometry, gas, self.case.source, self.tensors, t)
        self._timed("predictor", started)

        started = time.perf_counter()
        with stage_context("fluxes", k):
            faces = face_geometry(mesh, V, dt, M)
            edge_flux = np.zeros((mesh.n_edges, 4))
            inner = mesh.interior_edges
            edge_flux[inner] = interior_face_flux(faces.select(inner), mesh, predictor, gas)
            for tag, spec in self.case.boundaries.items():
                ids = mesh.edges_with_tag(tag)
                edge_flux[ids] = boundary_face_flux(faces.select(ids), mesh, spec, predictor, V, gas, t)
        self._timed("fluxes", started)

        started = time.perf_counter()
        with stage_context("update", k):
            new_mesh = move_vertices(mesh, dt * V)
            areas0 = mesh.areas()
            areas1 = new_mesh.areas()
            source = None
            if self.case.source is not None:
                source = predictor.volume_source_integral(source_nodes, self.tensors)
            outflow = accumulate_fluxes(mesh, np.arange(mesh.n_edges), edge_flux)
            Q1 = fv_update(Q, areas0, areas1, outflow, source, gas)
        self._timed("update", started)

        mass0 = float(np.sum(areas0 * Q[:, 0]))
        mass1 = float(np.sum(areas1 * Q1[:, 0]))
        bflux = float(np.sum(edge_flux[mesh.boundary_edges, 0]))
        smass = float(np.sum(source[:, 0])) if source is not None else 0.0
        drift = (mass1 - (mass0 - bflux + smass)) / max(abs(mass0), 1e-300)

        t_new = t + dt
        for target in list(targets) + ([t_final] if t_final is not None else []):
            if abs(t_new - target) <= TIME_EPSILON * max(1.0, abs(target)):
                t_new = target
        self.mesh, self.Q, self.t = new_mesh, Q1, t_new
        self.step_index = k + 1
        diag = StepDiagnostics(k, t_new, dt, mass0, mass1, bflux, smass, drift,
                               predictor.sweeps, list(predictor.update_norms), cg_iterations)
        self.history.append(diag)
        logger.debug("step %d: t=%.6f dt=%.3e mass drift %.2e", k, t_new, dt, drift)
        return diag

    def run(self, final_time: float | None = None, snapshot_times: Iterable[float] = (),
            on_snapshot: Callable[["ALESolver"], None] | None = None,
            max_steps: int | None = None) -> list[StepDiagnostics]:
        """March to `final_time` (default: the case's), hitting every snapshot time exactly."""
        t_final = self.case.final_time if final_time is None else final_time
        if self.Q is None:
            self.initialize()
        snaps = sorted(s for s in snapshot_times if s <= t_final)
        if on_snapshot is not None and snaps and snaps[0] <= self.t:
            on_snapshot(self)
        pending = [s for s in snaps if s > self.t]
        while self.t < t_final * (1.0 - TIME_EPSILON):
            if max_steps is not None and self.step_index >= max_steps:
                break
            self.step(t_final, pending)
            while pending and pending[0] <= self.t:
                pending.pop(0)
                if on_snapshot is not None:
                    on_snapshot(self)
        if self.mesh.connectivity_checksum() != self.topology:
            raise MeshError("mesh connectivity changed during the run")
        logger.info("%s reached t=%.6f in %d steps", self.case.name, self.t, self.step_index)
        return self.history
