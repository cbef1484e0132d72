"""
Element-local space-time predictor.

Within a slab [t^n, t^n + dt] every vertex moves on a straight line with the
velocity frozen at t^n, so each cell is a prism in space-time whose affine
section map is known in closed form. On that prism the Euler system is solved
in its reference-space weak form

    K_tau q + dt (K_t q + K_x f + K_y g) = dt M S

by Picard iteration, with the tau = 0 nodal values held at the reconstruction.
No neighbour data is touched, so cells are processed in independent chunks.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from app.config import PREDICTOR_SWEEP_FACTOR, PREDICTOR_TOLERANCE, RECONSTRUCTION_CHUNK
from app.errors import InvalidStateError, PredictorError, TangledMeshError
from app.mesh.trimesh import TriMesh
from app.physics.euler import GasModel, physical_flux, validate_conserved
from app.scheme.basis import SpaceTimeBasis, VolumeRule, spacetime_basis, volume_rule
from app.scheme.mesh_motion import HarmonicMeshMotion, VelocityRule
from app.scheme.weno import ReconstructionField

logger = logging.getLogger(__name__)

SourceFn = Callable[[np.ndarray, np.ndarray], np.ndarray]   # (x (N, 2), t (N,)) -> (N, 4)


# ---------------------------------------------------------------------------
# Vertex velocities
# ---------------------------------------------------------------------------

def nodal_average(mesh: TriMesh, element_velocities: np.ndarray) -> np.ndarray:
    """Arithmetic mean of the (nt, 3, 2) element contributions at each vertex."""
    total = np.zeros((mesh.n_vertices, 2))
    count = np.zeros(mesh.n_vertices)
    np.add.at(total, mesh.triangles.ravel(), element_velocities.reshape(-1, 2))
    np.add.at(count, mesh.triangles.ravel(), 1.0)
    return total / count[:, None]


def compute_vertex_velocities(
    mesh: TriMesh,
    boundary: Mapping[str, VelocityRule | np.ndarray],
    motion: HarmonicMeshMotion,
    interior: VelocityRule | None = None,
) -> np.ndarray:
    """Vertex velocities at t^n: harmonic extension of the boundary data.

    `interior` optionally replaces the harmonic field at interior vertices with a
    prescribed analytic velocity.
    """
    V = motion.solve(motion.assemble(mesh, boundary))
    if interior is not None:
        V[motion.free] = np.asarray(interior(mesh.vertices[motion.free]), dtype=float)
    return nodal_average(mesh, V[mesh.triangles])


# ---------------------------------------------------------------------------
# Slab geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SlabGeometry:
    """Linear vertex paths X(tau) = X0 + tau * dt * V for a set of cells."""

    X0: np.ndarray   # (nc, 3, 2) vertex positions at t^n
    V: np.ndarray    # (nc, 3, 2) vertex velocities
    dt: float

    @property
    def n_cells(self) -> int:
        return len(self.X0)

    def take(self, cells) -> "SlabGeometry":
        return SlabGeometry(self.X0[cells], self.V[cells], self.dt)

    def vertices(self, tau) -> np.ndarray:
        """(nc, ..., 3, 2) vertex positions at reference times tau (...)."""
        tau = np.asarray(tau, dtype=float)
        shape = (self.n_cells,) + (1,) * tau.ndim + (3, 2)
        return self.X0.reshape(shape) + (tau[..., None, None] * self.dt) * self.V.reshape(shape)

    def jacobian(self, tau) -> np.ndarray:
        """(nc, ..., 2, 2) spatial Jacobian [X2 - X1, X3 - X1] at tau."""
        X = self.vertices(tau)
        return np.stack([X[..., 1, :] - X[..., 0, :], X[..., 2, :] - X[..., 0, :]], axis=-1)

    def inverse_jacobian(self, tau) -> np.ndarray:
        J = self.jacobian(tau)
        det = J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]
        inv = np.empty_like(J)
        inv[..., 0, 0] = J[..., 1, 1]
        inv[..., 0, 1] = -J[..., 0, 1]
        inv[..., 1, 0] = -J[..., 1, 0]
        inv[..., 1, 1] = J[..., 0, 0]
        return inv / det[..., None, None]

    def det(self, tau) -> np.ndarray:
        J = self.jacobian(tau)
        return J[..., 0, 0] * J[..., 1, 1] - J[..., 0, 1] * J[..., 1, 0]

    def areas(self, tau) -> np.ndarray:
        return 0.5 * self.det(tau)

    def velocity(self, xi) -> np.ndarray:
        """(nc, ..., 2) linear interpolant of the vertex velocities at reference points xi (..., 2)."""
        xi = np.asarray(xi, dtype=float)
        lam = np.stack([1.0 - xi[..., 0] - xi[..., 1], xi[..., 0], xi[..., 1]], axis=-1)
        return np.einsum("...a,caj->c...j", lam, self.V)

    def physical(self, xi, tau) -> np.ndarray:
        """(nc, ..., 2) positions X(xi, tau) for matching arrays xi (..., 2), tau (...)."""
        xi = np.asarray(xi, dtype=float)
        X = self.vertices(tau)
        J = self.jacobian(tau)
        return X[..., 0, :] + np.einsum("c...ij,...j->c...i", J, xi)

    def to_reference(self, x, tau) -> np.ndarray:
        """Inverse map at reference time tau; x and tau broadcast against (nc, ...)."""
        X = self.vertices(tau)
        Jinv = self.inverse_jacobian(tau)
        return np.einsum("c...ij,c...j->c...i", Jinv, np.asarray(x, dtype=float) - X[..., 0, :])

    def time_metrics(self, xi, tau) -> np.ndarray:
        """(nc, ..., 2) [xi_t, eta_t] = -Js^-1 V(xi) at matching xi (..., 2), tau (...)."""
        return -np.einsum("c...ij,c...j->c...i", self.inverse_jacobian(tau), self.velocity(xi))

    def spacetime_jacobian(self, xi, tau) -> np.ndarray:
        """(nc, ..., 3, 3) d(x, y, t)/d(xi, eta, tau)."""
        Js = self.jacobian(tau)
        J = np.zeros(Js.shape[:-2] + (3, 3))
        J[..., :2, :2] = Js
        J[..., :2, 2] = self.dt * self.velocity(xi)
        J[..., 2, 2] = self.dt
        return J

    def trajectory_nodes(self, basis: SpaceTimeBasis) -> np.ndarray:
        """x_hat: (nc, Q, 2) physical positions of the space-time nodes."""
        nodes = basis.nodes
        return self.physical(nodes[:, :2], nodes[:, 2])

    def velocity_nodes(self, basis: SpaceTimeBasis) -> np.ndarray:
        """V_hat: (nc, Q, 2) mesh velocity at the space-time nodes."""
        return self.velocity(basis.nodes[:, :2])


def _min_area_on_slab(X0: np.ndarray, V: np.ndarray, dt: float) -> np.ndarray:
    """Minimum over tau in [0, 1] of the (quadratic) signed area of each cell."""
    a = X0[:, 1] - X0[:, 0]
    b = X0[:, 2] - X0[:, 0]
    da = dt * (V[:, 1] - V[:, 0])
    db = dt * (V[:, 2] - V[:, 0])

    def cross(p, q):
        return p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0]

    c0 = 0.5 * cross(a, b)
    c1 = 0.5 * (cross(a, db) + cross(da, b))
    c2 = 0.5 * cross(da, db)
    lo = np.minimum(c0, c0 + c1 + c2)
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(c2 > 0.0, -c1 / (2.0 * c2), -1.0)
    inside = (s > 0.0) & (s < 1.0)
    vertex = c0 + c1 * s + c2 * s * s
    return np.where(inside, np.minimum(lo, vertex), lo)


def slab_min_areas(mesh: TriMesh, vertex_velocities: np.ndarray, dt: float) -> np.ndarray:
    return _min_area_on_slab(mesh.vertices[mesh.triangles], vertex_velocities[mesh.triangles], dt)


def slab_geometry(mesh: TriMesh, vertex_velocities: np.ndarray, dt: float) -> SlabGeometry:
    """Freeze the cell geometry over the slab; raises if any cell degenerates."""
    if not dt > 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    V = np.asarray(vertex_velocities, dtype=float)
    X0 = mesh.vertices[mesh.triangles]
    Vc = V[mesh.triangles]
    low = _min_area_on_slab(X0, Vc, dt)
    bad = np.flatnonzero(~(low > 0.0))
    if bad.size:
        raise TangledMeshError(f"cell degenerates inside the slab (min area {low[bad[0]]!r})", cell=int(bad[0]))
    return SlabGeometry(X0.copy(), Vc, float(dt))


# ---------------------------------------------------------------------------
# Reference tensors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReferenceTensors:
    basis: SpaceTimeBasis
    rule: VolumeRule
    theta: np.ndarray      # (nq, Q)
    dtheta: np.ndarray     # (nq, Q, 3) d/d(xi, eta, tau)
    K_tau: np.ndarray      # (Q, Q) <theta_l, d theta_k / d tau>
    mass: np.ndarray       # (Q, Q) <theta_l, theta_k>
    weighted: np.ndarray   # (nq, Q) w_q theta_l(q)


def precompute_reference_tensors(basis: SpaceTimeBasis, rule: VolumeRule | None = None) -> ReferenceTensors:
    M = basis.degree
    rule = rule if rule is not None else volume_rule(2 * M + 1, M + 2)
    theta = basis.evaluate(rule.xi, rule.tau)
    dtheta = basis.gradient(rule.xi, rule.tau)
    weighted = rule.weights[:, None] * theta
    K_tau = weighted.T @ dtheta[..., 2]
    mass = weighted.T @ theta
    for a in (theta, dtheta, K_tau, mass, weighted):
        a.setflags(write=False)
    return ReferenceTensors(basis, rule, theta, dtheta, K_tau, mass, weighted)


def element_tensors(ref: ReferenceTensors, geometry: SlabGeometry):
    """Per-cell K_t, K_x, K_y (each (nc, Q, Q)) on the frozen slab geometry."""
    rule = ref.rule
    Jinv = geometry.inverse_jacobian(rule.tau)            # (nc, nq, 2, 2)
    metric_t = geometry.time_metrics(rule.xi, rule.tau)   # (nc, nq, 2)
    dref = ref.dtheta[..., :2]                            # (nq, Q, 2)
    grad = np.einsum("qki,cqij->cqkj", dref, Jinv)        # physical gradient of theta
    adv = np.einsum("qki,cqi->cqk", dref, metric_t)
    K_t = np.einsum("ql,cqk->clk", ref.weighted, adv)
    K_x = np.einsum("ql,cqk->clk", ref.weighted, grad[..., 0])
    K_y = np.einsum("ql,cqk->clk", ref.weighted, grad[..., 1])
    return K_t, K_x, K_y


# ---------------------------------------------------------------------------
# Predictor solution
# ---------------------------------------------------------------------------

@dataclass
class PredictorField:
    """Space-time polynomials q_h of every cell over one slab."""

    basis: SpaceTimeBasis
    geometry: SlabGeometry
    coefficients: np.ndarray            # (nc, Q, 4) nodal states q_hat
    sweeps: int = 0
    update_norms: list[float] = field(default_factory=list)

    @property
    def dt(self) -> float:
        return self.geometry.dt

    def evaluate_reference(self, cells, xi, tau) -> np.ndarray:
        """States of `cells` (...) at reference points xi (..., 2), tau (...)."""
        cells = np.asarray(cells, dtype=int)
        theta = self.basis.evaluate(xi, tau)
        return np.einsum("...k,...kv->...v", theta, self.coefficients[cells])

    def evaluate_physical(self, cells, x, tau) -> np.ndarray:
        """States at physical points x (..., 2) and reference time tau (...), off-cell allowed."""
        cells = np.asarray(cells, dtype=int)
        x = np.asarray(x, dtype=float)
        tau = np.broadcast_to(np.asarray(tau, dtype=float), cells.shape)
        X0 = self.geometry.X0[cells] + (tau[..., None, None] * self.dt) * self.geometry.V[cells]
        Js = np.stack([X0[..., 1, :] - X0[..., 0, :], X0[..., 2, :] - X0[..., 0, :]], axis=-1)
        xi = np.linalg.solve(Js, (x - X0[..., 0, :])[..., None])[..., 0]
        return self.evaluate_reference(cells, xi, tau)

    def end_state(self, cells, xi) -> np.ndarray:
        return self.evaluate_reference(cells, xi, np.ones(np.shape(cells)))

    def volume_source_integral(self, source_nodes: np.ndarray, ref: ReferenceTensors) -> np.ndarray:
        """(nc, 4) integral of the nodal source over each space-time cell."""
        rule = ref.rule
        S_q = np.einsum("qk,ckv->cqv", ref.theta, source_nodes)
        jac = self.dt * self.geometry.det(rule.tau)          # (nc, nq)
        return np.einsum("q,cq,cqv->cv", rule.weights, jac, S_q)


def _validate_nodes(q: np.ndarray, gas: GasModel, offset: int) -> None:
    try:
        validate_conserved(q, gas)
    except InvalidStateError as exc:
        flat = np.isfinite(q[..., 0]) & (q[..., 0] > 0.0)
        e = q[..., 3] / q[..., 0] - 0.5 * (q[..., 1] ** 2 + q[..., 2] ** 2) / q[..., 0] ** 2
        bad = ~(flat & np.isfinite(e) & (e > 0.0))
        cell = offset + int(np.argwhere(bad)[0][0])
        raise PredictorError(f"predictor produced an invalid state: {exc.message}", cell=cell) from exc


def initial_nodes(reconstruction: ReconstructionField, basis: SpaceTimeBasis, cells) -> np.ndarray:
    """(nc, D, 4) reconstruction values at the spatial lattice (tau = 0 nodes)."""
    phi = reconstruction.basis.evaluate(basis.spatial_nodes)
    return np.einsum("am,cmv->cav", phi, reconstruction.coefficients[cells])


def solve_predictor(
    reconstruction: ReconstructionField,
    geometry: SlabGeometry,
    gas: GasModel,
    source: SourceFn | None = None,
    tensors: ReferenceTensors | None = None,
    t0: float = 0.0,
) -> tuple[PredictorField, np.ndarray]:
    """Picard-iterated space-time predictor for all cells.

    Returns the field and the nodal source values (nc, Q, 4) used by the update.
    """
    M = reconstruction.basis.degree
    basis = tensors.basis if tensors is not None else spacetime_basis(M)
    ref = tensors if tensors is not None else precompute_reference_tensors(basis)
    nc = geometry.n_cells
    D, Q = basis.n_space, basis.size
    U = basis.later_nodes()
    Z = basis.initial_nodes()
    dt = geometry.dt
    max_sweeps = PREDICTOR_SWEEP_FACTOR * (M + 1)

    q_hat = np.empty((nc, Q, 4))
    s_hat = np.zeros((nc, Q, 4))
    norms = np.zeros(max_sweeps)
    sweeps_used = 0

    for lo in range(0, nc, RECONSTRUCTION_CHUNK):
        hi = min(lo + RECONSTRUCTION_CHUNK, nc)
        cells = np.arange(lo, hi)
        geo = geometry.take(cells)
        K_t, K_x, K_y = element_tensors(ref, geo)
        A = ref.K_tau[None] + dt * K_t
        A_inv = np.linalg.inv(A[:, U][:, :, U])
        P0 = A_inv @ A[:, U][:, :, Z]
        Px = dt * (A_inv @ K_x[:, U])
        Py = dt * (A_inv @ K_y[:, U])

        q0 = initial_nodes(reconstruction, basis, cells)
        _validate_nodes(q0, gas, lo)
        q = np.tile(q0, (1, basis.n_time, 1))
        rhs0 = -np.einsum("cuk,ckv->cuv", P0, q0)
        if source is not None:
            x_hat = geo.trajectory_nodes(basis)
            t_hat = t0 + dt * np.broadcast_to(basis.nodes[:, 2], x_hat.shape[:-1])
            s = np.asarray(source(x_hat.reshape(-1, 2), t_hat.reshape(-1)), dtype=float).reshape(len(cells), Q, 4)
            s_hat[lo:hi] = s
            PS = dt * (A_inv @ ref.mass[U][None])
            rhs0 = rhs0 + np.einsum("cuk,ckv->cuv", PS, s)

        for sweep in range(max_sweeps):
            F = physical_flux(q, gas, check=False)
            update = rhs0 - np.einsum("cuk,ckv->cuv", Px, F[..., 0]) - np.einsum("cuk,ckv->cuv", Py, F[..., 1])
            delta = float(np.max(np.abs(update - q[:, U]))) if update.size else 0.0
            q[:, U] = update
            _validate_nodes(q, gas, lo)
            norms[sweep] = max(norms[sweep], delta)
            sweeps_used = max(sweeps_used, sweep + 1)
            if delta <= PREDICTOR_TOLERANCE * (1.0 + float(np.max(np.abs(q)))):
                break
        q_hat[lo:hi] = q

    used = norms[:sweeps_used].tolist()
    if len(used) >= 3 and used[-1] > used[-2] > 0.0:
        logger.warning("predictor iteration not contracting: last update norms %s", used[-3:])
    logger.debug("predictor: %d cells, %d sweeps, final update %.3e", nc, sweeps_used, used[-1] if used else 0.0)
    return PredictorField(basis, geometry, q_hat, sweeps_used, used), s_hat
