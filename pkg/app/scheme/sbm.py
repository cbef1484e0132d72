"""
Boundary ghost states on the surrogate (mesh) boundary.

Dirichlet data and slip walls are imposed weakly through the numerical flux at
every space-time quadrature point of a boundary face. With the shifted boundary
correction enabled, the data given on the true boundary point x is carried back
to the surrogate point x~ by one off-element evaluation of the cell polynomial:

    phi*(x~) = phi_D(x) - [phi(x) - phi(x~)]

so no derivatives of the polynomial are needed.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable

import numpy as np

from app.config import PROJECTION_GUARD_DIAMETERS
from app.errors import ProjectionError
from app.geometry.boundary import BoundaryDescriptor
from app.mesh.trimesh import TriMesh
from app.physics.euler import GasModel, conserved_to_primitive, primitive_to_conserved
from app.scheme.ale import SpaceTimeFaces, osher_flux
from app.scheme.predictor import PredictorField

logger = logging.getLogger(__name__)

StateProvider = Callable[[np.ndarray, np.ndarray], np.ndarray]   # (x (N, 2), t (N,)) -> conserved (N, 4)
Trace = Callable[[np.ndarray], np.ndarray]                       # physical points (N, 2) -> conserved (N, 4)


class BCKind(str, Enum):
    DIRICHLET = "dirichlet"
    SLIP_WALL = "slip_wall"


@dataclass(frozen=True)
class BCSpec:
    kind: BCKind
    provider: StateProvider | None = None
    descriptor: BoundaryDescriptor | None = None
    corrected: bool = False

    def __post_init__(self) -> None:
        if self.kind is BCKind.DIRICHLET and self.provider is None:
            raise ValueError("Dirichlet boundary needs a state provider")
        if self.corrected and self.descriptor is None:
            raise ValueError("shifted boundary correction needs a boundary descriptor")

    def with_correction(self, corrected: bool) -> "BCSpec":
        return replace(self, corrected=corrected)


def dirichlet(provider: StateProvider, descriptor: BoundaryDescriptor | None = None,
              corrected: bool = False) -> BCSpec:
    return BCSpec(BCKind.DIRICHLET, provider, descriptor, corrected)


def slip_wall(descriptor: BoundaryDescriptor | None = None, corrected: bool = False) -> BCSpec:
    return BCSpec(BCKind.SLIP_WALL, None, descriptor, corrected)


@dataclass(frozen=True)
class BoundaryQuadPoints:
    """Flattened boundary quadrature points of one tag."""

    x_tilde: np.ndarray   # (N, 2) surrogate points at slab time t
    t: np.ndarray         # (N,)
    tau: np.ndarray       # (N,)
    normal: np.ndarray    # (N, 2) surrogate edge normal
    Vn: np.ndarray        # (N,) mesh normal speed
    mesh_velocity: np.ndarray  # (N, 2)
    cells: np.ndarray     # (N,) owning cell
    faces: np.ndarray     # (N,) edge id
    x: np.ndarray | None = None       # projected true points
    d: np.ndarray | None = None
    n_true: np.ndarray | None = None
    wall: np.ndarray | None = None    # wall velocity at the point used by the condition

    @property
    def size(self) -> int:
        return len(self.t)


def boundary_points(faces: SpaceTimeFaces, mesh: TriMesh, vertex_velocities: np.ndarray, t0: float,
                    dt: float) -> BoundaryQuadPoints:
    ne, npts = faces.weights.shape
    ends = mesh.edges[faces.edges]
    c = faces.chi[None, :, None]
    V = (1.0 - c) * vertex_velocities[ends[:, 0]][:, None] + c * vertex_velocities[ends[:, 1]][:, None]
    tau = np.tile(faces.tau, ne)
    return BoundaryQuadPoints(
        x_tilde=faces.points.reshape(-1, 2),
        t=t0 + tau * dt,
        tau=tau,
        normal=faces.normal.reshape(-1, 2),
        Vn=faces.Vn.reshape(-1),
        mesh_velocity=V.reshape(-1, 2),
        cells=np.repeat(mesh.edge_cells[faces.edges, 0], npts),
        faces=np.repeat(faces.edges, npts),
    )


def project_points(points: BoundaryQuadPoints, descriptor: BoundaryDescriptor,
                   diameters: np.ndarray | None = None) -> BoundaryQuadPoints:
    """Attach closest points, distances, true normals and wall velocities.

    The true point is stored as x~ + d n so that d = 0 reproduces x~ exactly.
    """
    N = points.size
    x = np.empty((N, 2))
    d = np.empty(N)
    n = np.empty((N, 2))
    w = np.empty((N, 2))
    for t in np.unique(points.t):
        idx = np.flatnonzero(points.t == t)
        proj = descriptor.closest_point(points.x_tilde[idx], float(t))
        d[idx] = proj.d
        n[idx] = proj.n
        x[idx] = points.x_tilde[idx] + proj.d[:, None] * proj.n
        w[idx] = descriptor.wall_velocity(x[idx], float(t))
    if diameters is not None:
        limit = PROJECTION_GUARD_DIAMETERS * diameters[points.cells]
        far = np.flatnonzero(np.abs(d) > limit)
        if far.size:
            k = int(far[0])
            raise ProjectionError(
                f"true boundary point {abs(d[k]):.3e} away from the surrogate (limit {limit[k]:.3e})",
                cell=int(points.cells[k]), face=int(points.faces[k]),
            )
    return replace(points, x=x, d=d, n_true=n, wall=w)


# ---------------------------------------------------------------------------
# Ghost states
# ---------------------------------------------------------------------------

def ghost_dirichlet_uncorrected(x_tilde, t, provider: StateProvider, gas: GasModel) -> np.ndarray:
    """Q_BC = g(x~, t), passed through primitives like the corrected variant."""
    g = np.asarray(provider(np.asarray(x_tilde, dtype=float), np.asarray(t, dtype=float)), dtype=float)
    return primitive_to_conserved(conserved_to_primitive(g, gas), gas)


def ghost_dirichlet_corrected(x_tilde, x, t, provider: StateProvider, trace: Trace, gas: GasModel) -> np.ndarray:
    """phi* = phi_D(x) - [phi(x) - phi(x~)] in primitive variables."""
    x_tilde = np.asarray(x_tilde, dtype=float)
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    phi_D = conserved_to_primitive(np.asarray(provider(x, t), dtype=float), gas)
    phi_x = conserved_to_primitive(trace(x), gas, check=False)
    phi_xt = conserved_to_primitive(trace(x_tilde), gas, check=False)
    return primitive_to_conserved(phi_D - (phi_x - phi_xt), gas)


def mirror_velocity(u_minus: np.ndarray, normal: np.ndarray, wall_normal_speed: np.ndarray) -> np.ndarray:
    """u_BC = 2 u_b - u- with u_b = (w.n) n + (u-.t) t."""
    tangent = np.stack([-normal[..., 1], normal[..., 0]], axis=-1)
    ut = np.einsum("...i,...i->...", u_minus, tangent)
    u_b = wall_normal_speed[..., None] * normal + ut[..., None] * tangent
    return 2.0 * u_b - u_minus


def ghost_slipwall(q_minus, normal, wall_velocity, gas: GasModel, corrected_normal_speed=None) -> np.ndarray:
    """Slip-wall ghost with rho and p copied from the interior trace.

    `normal` is the surrogate edge normal (uncorrected) or the true normal
    (corrected); `corrected_normal_speed` replaces w.n when given.
    """
    q_minus = np.asarray(q_minus, dtype=float)
    normal = np.asarray(normal, dtype=float)
    W = conserved_to_primitive(q_minus, gas)
    if corrected_normal_speed is None:
        wn = np.einsum("...i,...i->...", np.asarray(wall_velocity, dtype=float), normal)
    else:
        wn = np.asarray(corrected_normal_speed, dtype=float)
    ghost = W.copy()
    ghost[..., 1:3] = mirror_velocity(W[..., 1:3], normal, wn)
    return primitive_to_conserved(ghost, gas)


def corrected_wall_normal_speed(x_tilde, x, n_true, wall, trace: Trace) -> np.ndarray:
    """(w* . n)(x~) = (w . n)(x) - [u(x) - u(x~)] . n."""
    qx = trace(np.asarray(x, dtype=float))
    qt = trace(np.asarray(x_tilde, dtype=float))
    du = qx[..., 1:3] / qx[..., :1] - qt[..., 1:3] / qt[..., :1]
    return np.einsum("...i,...i->...", wall, n_true) - np.einsum("...i,...i->...", du, n_true)


def wall_ghost(points: BoundaryQuadPoints, q_minus: np.ndarray, spec: BCSpec, trace: Trace,
               gas: GasModel) -> np.ndarray:
    if not spec.corrected:
        if spec.descriptor is not None:
            w = np.empty_like(points.x_tilde)
            for t in np.unique(points.t):
                idx = np.flatnonzero(points.t == t)
                w[idx] = spec.descriptor.wall_velocity(points.x_tilde[idx], float(t))
        else:
            w = points.mesh_velocity
        return ghost_slipwall(q_minus, points.normal, w, gas)
    wn = corrected_wall_normal_speed(points.x_tilde, points.x, points.n_true, points.wall, trace)
    return ghost_slipwall(q_minus, points.n_true, None, gas, corrected_normal_speed=wn)


def ghost_states(points: BoundaryQuadPoints, q_minus: np.ndarray, spec: BCSpec, trace: Trace,
                 gas: GasModel) -> np.ndarray:
    if spec.kind is BCKind.SLIP_WALL:
        return wall_ghost(points, q_minus, spec, trace, gas)
    if spec.corrected:
        return ghost_dirichlet_corrected(points.x_tilde, points.x, points.t, spec.provider, trace, gas)
    return ghost_dirichlet_uncorrected(points.x_tilde, points.t, spec.provider, gas)


# ---------------------------------------------------------------------------
# Boundary flux
# ---------------------------------------------------------------------------

def boundary_face_flux(
    faces: SpaceTimeFaces,
    mesh: TriMesh,
    spec: BCSpec,
    predictor: PredictorField,
    vertex_velocities: np.ndarray,
    gas: GasModel,
    t0: float,
) -> np.ndarray:
    """(ne, 4) integrated Osher flux between the interior trace and the ghost state."""
    ne, npts = faces.weights.shape
    if ne == 0:
        return np.zeros((0, 4))
    pts = boundary_points(faces, mesh, vertex_velocities, t0, predictor.dt)
    if spec.corrected:
        diam = mesh.edge_lengths_per_cell().max(axis=1)
        pts = project_points(pts, spec.descriptor, diam)

    q_minus = predictor.evaluate_reference(pts.cells, faces.left_xi.reshape(-1, 2), pts.tau)

    def trace(x):
        return predictor.evaluate_physical(pts.cells, x, pts.tau)

    ghost = ghost_states(pts, q_minus, spec, trace, gas)
    G = osher_flux(q_minus, ghost, pts.normal, pts.Vn, gas).reshape(ne, npts, 4)
    return np.einsum("ep,epv->ev", faces.weights, G)
