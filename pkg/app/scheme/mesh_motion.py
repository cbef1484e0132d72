"""
Harmonic mesh motion: -Laplace(V) = 0 with V = V_b on the boundary, P1 finite elements.

The sparsity pattern is fixed by the topology and cached; values are
re-assembled on the current geometry at every step. Each velocity component is
solved independently by Jacobi-preconditioned conjugate gradients.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import LinearOperator, cg

from app.config import HARMONIC_ITERATION_FACTOR, HARMONIC_TOLERANCE
from app.errors import AssemblyError, HarmonicSolverError
from app.mesh.trimesh import TriMesh

logger = logging.getLogger(__name__)

VelocityRule = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class HarmonicSystem:
    stiffness: sparse.csr_matrix   # full P1 stiffness (nv x nv)
    free: np.ndarray               # interior vertex ids
    fixed: np.ndarray              # boundary vertex ids
    boundary_values: np.ndarray    # (n_fixed, 2) Dirichlet velocities
    K_ff: sparse.csr_matrix
    rhs: np.ndarray                # (n_free, 2) = -K_fb V_b


def stiffness_values(positions: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """(nt, 3, 3) local P1 stiffness |T| grad(l_i) . grad(l_j) (cotangent formula)."""
    P = positions[triangles]
    # grad(l_i) is the rotated opposite edge (v_{i+2} - v_{i+1}) / (2|T|)
    opp = np.roll(P, -2, axis=1) - np.roll(P, -1, axis=1)
    area = 0.5 * (opp[:, 0, 0] * opp[:, 1, 1] - opp[:, 0, 1] * opp[:, 1, 0])
    return np.einsum("tid,tjd->tij", opp, opp) / (4.0 * area)[:, None, None]


class HarmonicMeshMotion:
    """P1 Laplace solver for vertex velocities on a fixed-topology mesh."""

    def __init__(self, mesh: TriMesh, tolerance: float = HARMONIC_TOLERANCE) -> None:
        self.tolerance = tolerance
        tri = mesh.triangles
        self._rows = np.repeat(tri, 3, axis=1).ravel()
        self._cols = np.tile(tri, (1, 3)).ravel()
        self._nv = mesh.n_vertices
        self.fixed = mesh.boundary_vertices()
        mask = np.ones(self._nv, dtype=bool)
        mask[self.fixed] = False
        self.free = np.flatnonzero(mask)
        self.last_iterations = 0

    def stiffness(self, mesh: TriMesh) -> sparse.csr_matrix:
        vals = stiffness_values(mesh.vertices, mesh.triangles).ravel()
        K = sparse.coo_matrix((vals, (self._rows, self._cols)), shape=(self._nv, self._nv))
        return K.tocsr()

    def assemble(self, mesh: TriMesh, dirichlet: Mapping[str, VelocityRule | np.ndarray]) -> HarmonicSystem:
        """Stiffness and Dirichlet lifting.

        `dirichlet` maps boundary tags to either a callable positions (n, 2) -> (n, 2)
        or an array aligned with mesh.boundary_vertices(tag).
        """
        values = np.full((self._nv, 2), np.nan)
        for tag, rule in dirichlet.items():
            ids = mesh.boundary_vertices(tag)
            if ids.size == 0:
                raise AssemblyError(f"no boundary vertices carry tag {tag!r}")
            v = rule(mesh.vertices[ids]) if callable(rule) else np.asarray(rule, dtype=float)
            v = np.broadcast_to(np.asarray(v, dtype=float), (len(ids), 2))
            prior = values[ids]
            clash = ~np.isnan(prior[:, 0]) & ~np.all(np.isclose(prior, v, rtol=0, atol=1e-12), axis=1)
            if clash.any():
                raise AssemblyError(f"conflicting Dirichlet velocities at vertex {int(ids[np.flatnonzero(clash)[0]])}")
            values[ids] = v
        missing = self.fixed[np.isnan(values[self.fixed, 0])]
        if missing.size:
            raise AssemblyError(f"boundary vertex {int(missing[0])} has no Dirichlet velocity")

        K = self.stiffness(mesh)
        Vb = values[self.fixed]
        K_ff = K[self.free][:, self.free].tocsr()
        K_fb = K[self.free][:, self.fixed].tocsr()
        rhs = -(K_fb @ Vb)
        return HarmonicSystem(K, self.free, self.fixed, Vb, K_ff, np.asarray(rhs))

    def solve(self, system: HarmonicSystem, tolerance: float | None = None) -> np.ndarray:
        """(nv, 2) velocities: boundary values copied, interior from CG."""
        V, self.last_iterations = _solve_components(system, self.tolerance if tolerance is None else tolerance)
        return V


def _solve_components(system: HarmonicSystem, tol: float) -> tuple[np.ndarray, int]:
    V = np.zeros((system.stiffness.shape[0], 2))
    V[system.fixed] = system.boundary_values
    n = len(system.free)
    if n == 0:
        return V, 0
    diag = system.K_ff.diagonal()
    precond = LinearOperator((n, n), matvec=lambda x: x / diag, dtype=float)
    maxiter = int(HARMONIC_ITERATION_FACTOR * np.sqrt(n)) + 1
    total = 0
    for d in range(2):
        b = system.rhs[:, d]
        bnorm = np.linalg.norm(b)
        if bnorm == 0.0:
            continue
        count = [0]

        def _count(_):
            count[0] += 1

        x, info = cg(system.K_ff, b, rtol=tol, atol=0.0, maxiter=maxiter, M=precond, callback=_count)
        residual = np.linalg.norm(b - system.K_ff @ x) / bnorm
        if info != 0 or residual > 10.0 * tol:
            raise HarmonicSolverError(
                f"CG did not converge for component {d}: residual {residual:.3e} after {count[0]} iterations"
            )
        V[system.free, d] = x
        total += count[0]
    logger.debug("harmonic solve: %d free vertices, %d CG iterations", n, total)
    _check_maximum_principle(V, system)
    return V, total


def _check_maximum_principle(V: np.ndarray, system: HarmonicSystem) -> None:
    if len(system.free) == 0 or len(system.fixed) == 0:
        return
    lo = system.boundary_values.min(axis=0)
    hi = system.boundary_values.max(axis=0)
    span = np.maximum(hi - lo, 1e-300)
    interior = V[system.free]
    excess = np.maximum(interior - hi, lo - interior) / span
    if np.any(excess > 1e-8):
        logger.warning("harmonic mesh velocity violates the discrete maximum principle by %.2e (relative)",
                       float(excess.max()))


def assemble(mesh: TriMesh, dirichlet: Mapping[str, VelocityRule | np.ndarray]) -> HarmonicSystem:
    return HarmonicMeshMotion(mesh).assemble(mesh, dirichlet)


def solve(system: HarmonicSystem, tolerance: float = HARMONIC_TOLERANCE) -> np.ndarray:
    """Stand-alone solve for a system built by `assemble`."""
    return _solve_components(system, tolerance)[0]
