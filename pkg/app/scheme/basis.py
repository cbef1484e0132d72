"""
Polynomial bases on the reference triangle and the reference space-time prism.

MonomialBasis: (xi - 1/3)^a (eta - 1/3)^b, a + b <= M, ordered by total degree.
SpaceTimeBasis: nodal Lagrange functions on the degree-M triangle lattice times
M + 1 equispaced time levels.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import factorial

import numpy as np

from app.mesh.quadrature import gauss_legendre, triangle_rule

CENTER = 1.0 / 3.0


def n_coefficients(M: int) -> int:
    return (M + 1) * (M + 2) // 2


def _falling(a: int, k: int) -> int:
    return factorial(a) // factorial(a - k) if k <= a else 0


@dataclass(frozen=True)
class MonomialBasis:
    degree: int
    exponents: tuple[tuple[int, int], ...]
    _A: np.ndarray = field(repr=False, compare=False)
    _B: np.ndarray = field(repr=False, compare=False)

    @property
    def size(self) -> int:
        return len(self.exponents)

    def derivative(self, xi, alpha: int = 0, beta: int = 0) -> np.ndarray:
        """d^(alpha+beta) psi_k / dxi^alpha deta^beta at points (..., 2) -> (..., D)."""
        xi = np.asarray(xi, dtype=float)
        s = xi[..., 0:1] - CENTER
        t = xi[..., 1:2] - CENTER
        A, B = self._A, self._B
        ca = np.array([_falling(a, alpha) for a in A], dtype=float)
        cb = np.array([_falling(b, beta) for b in B], dtype=float)
        pa = np.clip(A - alpha, 0, None)
        pb = np.clip(B - beta, 0, None)
        return ca * cb * s ** pa * t ** pb

    def evaluate(self, xi) -> np.ndarray:
        return self.derivative(xi)

    def gradient(self, xi) -> np.ndarray:
        """(..., D, 2) reference-space gradient."""
        return np.stack([self.derivative(xi, 1, 0), self.derivative(xi, 0, 1)], axis=-1)

    @property
    def averages(self) -> np.ndarray:
        """Average of each psi_k over the reference triangle."""
        return _basis_tables(self.degree)[0]

    @property
    def smoothness_matrix(self) -> np.ndarray:
        """Sigma_km = sum_{1 <= a+b <= M} int_Te d^{a,b} psi_k d^{a,b} psi_m."""
        return _basis_tables(self.degree)[1]


@lru_cache(maxsize=None)
def monomial_basis(M: int) -> MonomialBasis:
    if M < 0:
        raise ValueError(f"degree must be non-negative, got {M}")
    exps = tuple((a, p - a) for p in range(M + 1) for a in range(p, -1, -1))
    A = np.array([e[0] for e in exps])
    B = np.array([e[1] for e in exps])
    A.setflags(write=False)
    B.setflags(write=False)
    return MonomialBasis(degree=M, exponents=exps, _A=A, _B=B)


@lru_cache(maxsize=None)
def _basis_tables(M: int) -> tuple[np.ndarray, np.ndarray]:
    basis = monomial_basis(M)
    rule = triangle_rule(max(2 * M, 1))
    avg = rule.unit_weights @ basis.evaluate(rule.points)
    sigma = np.zeros((basis.size, basis.size))
    for order in range(1, M + 1):
        for alpha in range(order + 1):
            d = basis.derivative(rule.points, alpha, order - alpha)
            sigma += d.T @ (rule.weights[:, None] * d)
    avg.setflags(write=False)
    sigma.setflags(write=False)
    return avg, sigma


# ---------------------------------------------------------------------------
# Space-time nodal basis
# ---------------------------------------------------------------------------

def lattice_nodes(M: int) -> np.ndarray:
    """(D, 2) nodes (i/M, j/M), i + j <= M, ordered like the monomials by total degree of (i, j)."""
    if M == 0:
        return np.array([[CENTER, CENTER]])
    return np.array([[i / M, j / M] for p in range(M + 1) for i in range(p, -1, -1) for j in [p - i]])


@dataclass(frozen=True)
class SpaceTimeBasis:
    """theta_k(xi, eta, tau) = phi_a(xi, eta) * l_b(tau), k = b * D + a."""

    degree: int
    spatial_nodes: np.ndarray   # (D, 2)
    time_nodes: np.ndarray      # (M + 1,)
    _space_coef: np.ndarray = field(repr=False, compare=False)  # monomial -> Lagrange (D, D)
    _time_coef: np.ndarray = field(repr=False, compare=False)   # power -> Lagrange (M+1, M+1)

    @property
    def n_space(self) -> int:
        return len(self.spatial_nodes)

    @property
    def n_time(self) -> int:
        return len(self.time_nodes)

    @property
    def size(self) -> int:
        return self.n_space * self.n_time

    @property
    def nodes(self) -> np.ndarray:
        """(Q, 3) nodes (xi, eta, tau) in basis order."""
        xi = np.tile(self.spatial_nodes, (self.n_time, 1))
        tau = np.repeat(self.time_nodes, self.n_space)
        return np.column_stack([xi, tau])

    def initial_nodes(self) -> np.ndarray:
        """Indices of the tau = 0 nodes."""
        return np.arange(self.n_space)

    def later_nodes(self) -> np.ndarray:
        return np.arange(self.n_space, self.size)

    def spatial(self, xi, alpha: int = 0, beta: int = 0) -> np.ndarray:
        return monomial_basis(self.degree).derivative(xi, alpha, beta) @ self._space_coef

    def temporal(self, tau, derivative: int = 0) -> np.ndarray:
        tau = np.asarray(tau, dtype=float)[..., None]
        powers = np.arange(self.n_time)
        coef = np.array([_falling(p, derivative) for p in powers], dtype=float)
        vals = coef * tau ** np.clip(powers - derivative, 0, None)
        return vals @ self._time_coef

    def evaluate(self, xi, tau) -> np.ndarray:
        """theta at points xi (..., 2), tau (...) -> (..., Q)."""
        phi = self.spatial(xi)
        ell = self.temporal(tau)
        return (ell[..., :, None] * phi[..., None, :]).reshape(phi.shape[:-1] + (self.size,))

    def gradient(self, xi, tau) -> np.ndarray:
        """(..., Q, 3) derivatives with respect to (xi, eta, tau)."""
        phi = self.spatial(xi)
        dphi = np.stack([self.spatial(xi, 1, 0), self.spatial(xi, 0, 1)], axis=-1)
        ell = self.temporal(tau)
        dell = self.temporal(tau, 1)
        shape = phi.shape[:-1] + (self.size,)
        d_xi = (ell[..., :, None] * dphi[..., None, :, 0]).reshape(shape)
        d_eta = (ell[..., :, None] * dphi[..., None, :, 1]).reshape(shape)
        d_tau = (dell[..., :, None] * phi[..., None, :]).reshape(shape)
        return np.stack([d_xi, d_eta, d_tau], axis=-1)


@lru_cache(maxsize=None)
def spacetime_basis(M: int) -> SpaceTimeBasis:
    if M < 1:
        raise ValueError(f"space-time basis needs M >= 1, got {M}")
    nodes = lattice_nodes(M)
    V = monomial_basis(M).evaluate(nodes)             # V[node, k]
    space_coef = np.linalg.inv(V)                      # phi = psi @ inv(V)
    tnodes = np.arange(M + 1) / M
    Vt = tnodes[:, None] ** np.arange(M + 1)[None, :]
    time_coef = np.linalg.inv(Vt)
    for a in (nodes, space_coef, tnodes, time_coef):
        a.setflags(write=False)
    return SpaceTimeBasis(degree=M, spatial_nodes=nodes, time_nodes=tnodes,
                          _space_coef=space_coef, _time_coef=time_coef)


@dataclass(frozen=True)
class VolumeRule:
    """Tensor rule on T_e x [0, 1]: triangle rule times Gauss-Legendre in tau."""

    xi: np.ndarray       # (nq, 2)
    tau: np.ndarray      # (nq,)
    weights: np.ndarray  # (nq,), sums to REFERENCE_AREA
    space_degree: int
    time_points: int


@lru_cache(maxsize=None)
def volume_rule(space_degree: int, time_points: int) -> VolumeRule:
    tri = triangle_rule(space_degree)
    t, wt = gauss_legendre(time_points)
    xi = np.tile(tri.points, (len(t), 1))
    tau = np.repeat(t, tri.size)
    w = np.repeat(wt, tri.size) * np.tile(tri.weights, len(t))
    for a in (xi, tau, w):
        a.setflags(write=False)
    return VolumeRule(xi=xi, tau=tau, weights=w, space_degree=space_degree, time_points=time_points)
