"""
One-step ALE finite volume update.

Each edge sweeps a bilinear ruled surface in space-time over the slab. Fluxes
are integrated on that surface with a tensor Gauss-Legendre rule, computed once
per edge and applied with opposite signs to its two cells, so interior
contributions telescope and a uniform state is preserved on any valid motion.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from math import ceil

import numpy as np

from app.config import (
    OSHER_PATH_POINTS,
    TIMESTEP_MAX_HALVINGS,
    TIMESTEP_UNDERFLOW,
    TIME_EPSILON,
)
from app.errors import FluxError, InvalidStateError, PositivityError, TimeStepError
from app.mesh.quadrature import REFERENCE_VERTICES, gauss_legendre
from app.mesh.trimesh import TriMesh
from app.physics.euler import GasModel, ale_eigen, ale_normal_flux, max_signal_speed, validate_conserved
from app.scheme.predictor import PredictorField, slab_min_areas

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Space-time faces
# ---------------------------------------------------------------------------

def face_points(M: int) -> int:
    return int(ceil((M + 2) / 2))


@dataclass(frozen=True)
class SpaceTimeFaces:
    """Quadrature data on the space-time faces of a set of edges.

    Arrays are (ne, np, ...) with np = n_chi * n_tau points per face; weights
    already include the surface measure dt * |e(tau)|.
    """

    edges: np.ndarray       # (ne,)
    chi: np.ndarray         # (np,)
    tau: np.ndarray         # (np,)
    points: np.ndarray      # (ne, np, 2) physical positions on the moving edge
    normal: np.ndarray      # (ne, np, 2) unit spatial normal, outward from the left cell
    Vn: np.ndarray          # (ne, np) mesh normal speed
    weights: np.ndarray     # (ne, np)
    left_xi: np.ndarray     # (ne, np, 2) reference coordinates in the left cell
    right_xi: np.ndarray    # (ne, np, 2) reference coordinates in the right cell (nan on the boundary)

    @property
    def st_normal(self) -> np.ndarray:
        """Area-weighted space-time normal (nx, ny, nt) per point."""
        return self.weights[..., None] * np.concatenate([self.normal, -self.Vn[..., None]], axis=-1)

    def select(self, idx) -> "SpaceTimeFaces":
        return SpaceTimeFaces(self.edges[idx], self.chi, self.tau, self.points[idx], self.normal[idx],
                              self.Vn[idx], self.weights[idx], self.left_xi[idx], self.right_xi[idx])


def _edge_reference(mesh: TriMesh, edges: np.ndarray, side: int, chi: np.ndarray) -> np.ndarray:
    """Reference coordinates of edge points in the cell on `side`, following the left orientation."""
    local = mesh.edge_local[edges, side]
    out = np.full((len(edges), len(chi), 2), np.nan)
    ok = local >= 0
    a = REFERENCE_VERTICES[local[ok]]
    b = REFERENCE_VERTICES[(local[ok] + 1) % 3]
    if side == 1:
        a, b = b, a
    out[ok] = (1.0 - chi)[None, :, None] * a[:, None, :] + chi[None, :, None] * b[:, None, :]
    return out


def face_geometry(mesh: TriMesh, vertex_velocities: np.ndarray, dt: float, M: int,
                  edges: np.ndarray | None = None) -> SpaceTimeFaces:
    """Quadrature on the surfaces swept by `edges` (default: all) over [t^n, t^n + dt]."""
    edges = np.arange(mesh.n_edges) if edges is None else np.asarray(edges, dtype=int)
    n = face_points(M)
    x1, w1 = gauss_legendre(n)
    chi = np.repeat(x1, n)
    tau = np.tile(x1, n)
    wq = np.repeat(w1, n) * np.tile(w1, n)

    ends = mesh.edges[edges]
    Xa, Xb = mesh.vertices[ends[:, 0]], mesh.vertices[ends[:, 1]]
    Va, Vb = vertex_velocities[ends[:, 0]], vertex_velocities[ends[:, 1]]
    s = (tau * dt)[None, :, None]
    pa = Xa[:, None] + s * Va[:, None]
    pb = Xb[:, None] + s * Vb[:, None]
    e = pb - pa
    c = chi[None, :, None]
    points = (1.0 - c) * pa + c * pb
    V = (1.0 - c) * Va[:, None] + c * Vb[:, None]
    N = np.stack([e[..., 1], -e[..., 0]], axis=-1)
    length = np.hypot(N[..., 0], N[..., 1])
    normal = N / length[..., None]
    Vn = np.einsum("epi,epi->ep", V, normal)
    weights = wq[None, :] * dt * length
    return SpaceTimeFaces(
        edges=edges, chi=chi, tau=tau, points=points, normal=normal, Vn=Vn, weights=weights,
        left_xi=_edge_reference(mesh, edges, 0, chi),
        right_xi=_edge_reference(mesh, edges, 1, chi),
    )


# ---------------------------------------------------------------------------
# Osher ALE flux
# ---------------------------------------------------------------------------

def osher_flux(q_minus, q_plus, n, Vn, gas: GasModel, path_points: int = OSHER_PATH_POINTS) -> np.ndarray:
    """Osher flux per unit space-time area through a face with unit normal n moving at Vn.

    0.5 (F(q-) + F(q+)) . n - 0.5 Vn (q- + q+) - 0.5 (int_0^1 |A_n - Vn I|(Psi(s)) ds) (q+ - q-)
    along the straight path Psi(s) = q- + s (q+ - q-).
    """
    qm = np.asarray(q_minus, dtype=float)
    qp = np.asarray(q_plus, dtype=float)
    n = np.asarray(n, dtype=float)
    Vn = np.asarray(Vn, dtype=float)
    try:
        validate_conserved(qm, gas)
        validate_conserved(qp, gas)
    except InvalidStateError as exc:
        raise FluxError(f"invalid flux input: {exc.message}", left=qm, right=qp) from exc

    jump = qp - qm
    s, w = gauss_legendre(path_points)
    dissipation = np.zeros(np.broadcast_shapes(jump.shape, n.shape[:-1] + (4,), Vn.shape + (4,)))
    for sk, wk in zip(s, w):
        state = qm + sk * jump
        try:
            lam, R, L = ale_eigen(state, n, Vn, gas)
        except InvalidStateError as exc:
            raise FluxError(f"invalid state on the Osher path: {exc.message}", left=qm, right=qp) from exc
        dissipation = dissipation + wk * np.einsum("...ik,...k,...kj,...j->...i", R, np.abs(lam), L, jump)

    flux = 0.5 * (ale_normal_flux(qm, n, Vn, gas, check=False) + ale_normal_flux(qp, n, Vn, gas, check=False))
    flux = flux - 0.5 * dissipation
    if not np.all(np.isfinite(flux)):
        raise FluxError("non-finite Osher flux", left=qm, right=qp)
    return flux


def interior_face_flux(faces: SpaceTimeFaces, mesh: TriMesh, predictor: PredictorField,
                       gas: GasModel) -> np.ndarray:
    """(ne, 4) integrated flux, positive out of the left cell, for interior edges."""
    cells = mesh.edge_cells[faces.edges]
    left = np.broadcast_to(cells[:, :1], faces.weights.shape)
    right = np.broadcast_to(cells[:, 1:], faces.weights.shape)
    tau = np.broadcast_to(faces.tau, faces.weights.shape)
    qm = predictor.evaluate_reference(left, faces.left_xi, tau)
    qp = predictor.evaluate_reference(right, faces.right_xi, tau)
    try:
        G = osher_flux(qm, qp, faces.normal, faces.Vn, gas)
    except FluxError as exc:
        bad = _first_invalid_face(qm, qp, gas)
        exc.face = int(faces.edges[bad]) if bad is not None else None
        raise
    return np.einsum("ep,epv->ev", faces.weights, G)


def _first_invalid_face(qm: np.ndarray, qp: np.ndarray, gas: GasModel) -> int | None:
    for e in range(len(qm)):
        try:
            validate_conserved(qm[e], gas)
            validate_conserved(qp[e], gas)
        except InvalidStateError:
            return e
    return None


# ---------------------------------------------------------------------------
# Update
# ---------------------------------------------------------------------------

def accumulate_fluxes(mesh: TriMesh, edges: np.ndarray, edge_flux: np.ndarray) -> np.ndarray:
    """(nc, 4) net outflow per cell from per-edge integrated fluxes."""
    out = np.zeros((mesh.n_cells, edge_flux.shape[-1]))
    cells = mesh.edge_cells[edges]
    np.add.at(out, cells[:, 0], edge_flux)
    inner = cells[:, 1] >= 0
    np.add.at(out, cells[inner, 1], -edge_flux[inner])
    return out


def fv_update(Q0: np.ndarray, areas0: np.ndarray, areas1: np.ndarray, outflow: np.ndarray,
              source_integral: np.ndarray | None, gas: GasModel) -> np.ndarray:
    """|T^{n+1}| Q^{n+1} = |T^n| Q^n - outflow + source; raises PositivityError on an invalid result."""
    rhs = areas0[:, None] * Q0 - outflow
    if source_integral is not None:
        rhs = rhs + source_integral
    Q1 = rhs / areas1[:, None]
    rho = Q1[:, 0]
    e = Q1[:, 3] / rho - 0.5 * (Q1[:, 1] ** 2 + Q1[:, 2] ** 2) / rho ** 2
    bad = np.flatnonzero(~(np.isfinite(rho) & (rho > 0.0) & np.isfinite(e) & (e > 0.0)))
    if bad.size:
        c = int(bad[0])
        raise PositivityError(f"update produced rho={rho[c]!r}, e={e[c]!r}", cell=c)
    return Q1


# ---------------------------------------------------------------------------
# Time step
# ---------------------------------------------------------------------------

def cfl_timestep(mesh: TriMesh, averages: np.ndarray, vertex_velocities: np.ndarray, cfl: float, M: int,
                 gas: GasModel) -> float:
    """CFL * min_i(d_i / lambda_i) / (2M + 1) with signal speeds at the edge midpoints."""
    tri = mesh.triangles
    P = mesh.vertices[tri]
    Vc = vertex_velocities[tri]
    e = np.roll(P, -1, axis=1) - P
    N = np.stack([e[..., 1], -e[..., 0]], axis=-1)
    n = N / np.hypot(N[..., 0], N[..., 1])[..., None]
    Vmid = 0.5 * (Vc + np.roll(Vc, -1, axis=1))
    Vn = np.einsum("cki,cki->ck", Vmid, n)
    speed = max_signal_speed(averages[:, None, :], n, Vn, gas).max(axis=1)
    return float(cfl * np.min(mesh.incircle_diameters() / speed) / (2 * M + 1))


def clip_timestep(dt: float, t: float, targets) -> float:
    """Shorten dt so the step lands exactly on the next target time after t."""
    for target in sorted(targets):
        if target > t * (1.0 + TIME_EPSILON) + TIME_EPSILON * abs(target):
            return min(dt, target - t)
    return dt


def cap_inversion(mesh: TriMesh, vertex_velocities: np.ndarray, dt: float) -> float:
    """Halve dt until no triangle degenerates along the linear vertex paths."""
    for _ in range(TIMESTEP_MAX_HALVINGS):
        if np.all(slab_min_areas(mesh, vertex_velocities, dt) > 0.0):
            return dt
        dt *= 0.5
    raise TimeStepError(f"no admissible time step: mesh inverts even for dt={dt:.3e}")


def compute_timestep(mesh: TriMesh, averages: np.ndarray, vertex_velocities: np.ndarray, cfl: float, M: int,
                     gas: GasModel, t: float = 0.0, t_final: float | None = None, targets=()) -> float:
    dt = cfl_timestep(mesh, averages, vertex_velocities, cfl, M, gas)
    stops = list(targets) + ([t_final] if t_final is not None else [])
    dt = clip_timestep(dt, t, stops)
    capped = cap_inversion(mesh, vertex_velocities, dt)
    if capped < dt:
        logger.debug("time step capped by mesh inversion: %.3e -> %.3e", dt, capped)
    scale = t_final if t_final else 1.0
    if capped < TIMESTEP_UNDERFLOW * scale:
        raise TimeStepError(f"time step underflow: dt={capped:.3e}")
    return capped
