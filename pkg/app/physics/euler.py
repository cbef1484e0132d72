"""
Compressible Euler equations with a perfect-gas equation of state.

States are handled as numpy arrays whose last axis holds the four components:
conserved (rho, rho*u, rho*v, rho*E) or primitive (rho, u, v, p). The small
ConservedState / PrimitiveState dataclasses wrap single states for readable call
sites and tests; every function also accepts batches of shape (..., 4).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from app.errors import InvalidStateError


@dataclass(frozen=True)
class GasModel:
    gamma: float = 1.4

    def __post_init__(self) -> None:
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")


@dataclass(frozen=True)
class ConservedState:
    rho: float
    mom: tuple[float, float]
    rhoE: float

    def to_array(self) -> np.ndarray:
        return np.array([self.rho, self.mom[0], self.mom[1], self.rhoE], dtype=float)

    @classmethod
    def from_array(cls, q) -> "ConservedState":
        q = np.asarray(q, dtype=float)
        return cls(float(q[0]), (float(q[1]), float(q[2])), float(q[3]))


@dataclass(frozen=True)
class PrimitiveState:
    rho: float
    vel: tuple[float, float]
    p: float

    def to_array(self) -> np.ndarray:
        return np.array([self.rho, self.vel[0], self.vel[1], self.p], dtype=float)

    @classmethod
    def from_array(cls, w) -> "PrimitiveState":
        w = np.asarray(w, dtype=float)
        return cls(float(w[0]), (float(w[1]), float(w[2])), float(w[3]))


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def _first_bad(mask: np.ndarray) -> int | None:
    bad = np.flatnonzero(~np.asarray(mask).reshape(-1))
    return int(bad[0]) if bad.size else None


def _check_positive(values: np.ndarray, what: str) -> None:
    ok = np.isfinite(values) & (values > 0.0)
    idx = _first_bad(ok)
    if idx is not None:
        flat = np.asarray(values).reshape(-1)
        raise InvalidStateError(f"non-positive {what} ({flat[idx]!r}) at entry {idx}")


def validate_conserved(Q: np.ndarray, gas: GasModel) -> None:
    """Raise InvalidStateError unless every state has rho > 0 and e > 0."""
    Q = np.asarray(Q, dtype=float)
    _check_positive(Q[..., 0], "density")
    e = Q[..., 3] / Q[..., 0] - 0.5 * (Q[..., 1] ** 2 + Q[..., 2] ** 2) / Q[..., 0] ** 2
    _check_positive(e, "internal energy")


# ---------------------------------------------------------------------------
# Equation of state and conversions
# ---------------------------------------------------------------------------

def eos_pressure(rho, e, gas: GasModel):
    """p = (gamma - 1) * rho * e."""
    rho = np.asarray(rho, dtype=float)
    e = np.asarray(e, dtype=float)
    _check_positive(rho, "density")
    _check_positive(e, "internal energy")
    p = (gas.gamma - 1.0) * rho * e
    return float(p) if p.ndim == 0 else p


def _pressure(Q: np.ndarray, gas: GasModel) -> np.ndarray:
    kinetic = 0.5 * (Q[..., 1] ** 2 + Q[..., 2] ** 2) / Q[..., 0]
    return (gas.gamma - 1.0) * (Q[..., 3] - kinetic)


def conserved_to_primitive(Q, gas: GasModel, check: bool = True):
    """(rho, rho u, rho v, rho E) -> (rho, u, v, p)."""
    if isinstance(Q, ConservedState):
        return PrimitiveState.from_array(conserved_to_primitive(Q.to_array(), gas, check))
    Q = np.asarray(Q, dtype=float)
    if check:
        validate_conserved(Q, gas)
    W = np.empty_like(Q)
    W[..., 0] = Q[..., 0]
    W[..., 1] = Q[..., 1] / Q[..., 0]
    W[..., 2] = Q[..., 2] / Q[..., 0]
    W[..., 3] = _pressure(Q, gas)
    return W


def primitive_to_conserved(W, gas: GasModel, check: bool = True):
    """(rho, u, v, p) -> (rho, rho u, rho v, rho E)."""
    if isinstance(W, PrimitiveState):
        return ConservedState.from_array(primitive_to_conserved(W.to_array(), gas, check))
    W = np.asarray(W, dtype=float)
    if check:
        _check_positive(W[..., 0], "density")
        _check_positive(W[..., 3], "pressure")
    Q = np.empty_like(W)
    Q[..., 0] = W[..., 0]
    Q[..., 1] = W[..., 0] * W[..., 1]
    Q[..., 2] = W[..., 0] * W[..., 2]
    Q[..., 3] = W[..., 3] / (gas.gamma - 1.0) + 0.5 * W[..., 0] * (W[..., 1] ** 2 + W[..., 2] ** 2)
    return Q


def sound_speed(Q, gas: GasModel) -> np.ndarray:
    Q = np.asarray(Q, dtype=float)
    return np.sqrt(gas.gamma * _pressure(Q, gas) / Q[..., 0])


def entropy(Q, gas: GasModel):
    """S = p / rho**gamma."""
    Q = np.asarray(Q, dtype=float)
    validate_conserved(Q, gas)
    S = _pressure(Q, gas) / Q[..., 0] ** gas.gamma
    return float(S) if S.ndim == 0 else S


# ---------------------------------------------------------------------------
# Fluxes
# ---------------------------------------------------------------------------

def physical_flux(Q, gas: GasModel, check: bool = True) -> np.ndarray:
    """Flux tensor F(Q) with shape (..., 4, 2); column j is the flux in direction j.

    Rows: rho*u, rho*u (x) u + p*I, rho*H*u with H = h + |u|^2/2.
    """
    Q = np.asarray(Q, dtype=float)
    if check:
        validate_conserved(Q, gas)
    rho = Q[..., 0]
    u = Q[..., 1] / rho
    v = Q[..., 2] / rho
    p = _pressure(Q, gas)
    F = np.empty(Q.shape + (2,))
    F[..., 0, 0] = Q[..., 1]
    F[..., 0, 1] = Q[..., 2]
    F[..., 1, 0] = Q[..., 1] * u + p
    F[..., 1, 1] = Q[..., 1] * v
    F[..., 2, 0] = Q[..., 2] * u
    F[..., 2, 1] = Q[..., 2] * v + p
    F[..., 3, 0] = (Q[..., 3] + p) * u
    F[..., 3, 1] = (Q[..., 3] + p) * v
    return F


def normal_flux(Q, n, gas: GasModel, check: bool = True) -> np.ndarray:
    """F(Q) . n for unit normals n of shape (..., 2)."""
    Q = np.asarray(Q, dtype=float)
    n = np.asarray(n, dtype=float)
    if check:
        validate_conserved(Q, gas)
    rho = Q[..., 0]
    un = (Q[..., 1] * n[..., 0] + Q[..., 2] * n[..., 1]) / rho
    p = _pressure(Q, gas)
    G = np.empty(np.broadcast_shapes(Q.shape, n.shape[:-1] + (4,)))
    G[..., 0] = rho * un
    G[..., 1] = Q[..., 1] * un + p * n[..., 0]
    G[..., 2] = Q[..., 2] * un + p * n[..., 1]
    G[..., 3] = (Q[..., 3] + p) * un
    return G


def ale_normal_flux(Q, n, Vn, gas: GasModel, check: bool = True) -> np.ndarray:
    """F(Q) . n - Vn * Q, the flux through a face moving with normal speed Vn."""
    Q = np.asarray(Q, dtype=float)
    return normal_flux(Q, n, gas, check) - np.asarray(Vn, dtype=float)[..., None] * Q


# ---------------------------------------------------------------------------
# Eigenstructure of the ALE Jacobian A_n - Vn I
# ---------------------------------------------------------------------------

def ale_eigen(Q, n, Vn, gas: GasModel, check: bool = True):
    """Eigenvalues, right and left eigenvectors of dF.n/dQ - Vn*I.

    Returns
    -------
    lam : (..., 4)   ordered u.n-Vn-c, u.n-Vn, u.n-Vn, u.n-Vn+c
    R   : (..., 4, 4) right eigenvectors as columns
    L   : (..., 4, 4) R^-1, left eigenvectors as rows
    """
    Q = np.asarray(Q, dtype=float)
    n = np.asarray(n, dtype=float)
    Vn = np.asarray(Vn, dtype=float)
    if check:
        validate_conserved(Q, gas)
    g1 = gas.gamma - 1.0
    rho = Q[..., 0]
    u = Q[..., 1] / rho
    v = Q[..., 2] / rho
    p = _pressure(Q, gas)
    c = np.sqrt(gas.gamma * p / rho)
    nx, ny = n[..., 0], n[..., 1]
    tx, ty = -ny, nx
    un = u * nx + v * ny
    ut = u * tx + v * ty
    q2 = u * u + v * v
    H = (Q[..., 3] + p) / rho

    shape = np.broadcast_shapes(rho.shape, nx.shape, Vn.shape)
    lam = np.empty(shape + (4,))
    lam[..., 0] = un - Vn - c
    lam[..., 1] = un - Vn
    lam[..., 2] = un - Vn
    lam[..., 3] = un - Vn + c

    R = np.empty(shape + (4, 4))
    R[..., :, 0] = np.stack(np.broadcast_arrays(1.0, u - c * nx, v - c * ny, H - c * un), axis=-1)
    R[..., :, 1] = np.stack(np.broadcast_arrays(1.0, u, v, 0.5 * q2), axis=-1)
    R[..., :, 2] = np.stack(np.broadcast_arrays(0.0, tx, ty, ut), axis=-1)
    R[..., :, 3] = np.stack(np.broadcast_arrays(1.0, u + c * nx, v + c * ny, H + c * un), axis=-1)

    b = g1 / (c * c)
    half_kin = 0.5 * b * q2
    L = np.empty(shape + (4, 4))
    L[..., 0, :] = 0.5 * np.stack(
        np.broadcast_arrays(half_kin + un / c, -(b * u + nx / c), -(b * v + ny / c), b), axis=-1
    )
    L[..., 1, :] = np.stack(np.broadcast_arrays(1.0 - half_kin, b * u, b * v, -b), axis=-1)
    L[..., 2, :] = np.stack(np.broadcast_arrays(-ut, tx, ty, 0.0), axis=-1)
    L[..., 3, :] = 0.5 * np.stack(
        np.broadcast_arrays(half_kin - un / c, -(b * u - nx / c), -(b * v - ny / c), b), axis=-1
    )
    return lam, R, L


def ale_jacobian(Q, n, Vn, gas: GasModel, absolute: bool = False, check: bool = True) -> np.ndarray:
    """R diag(lam) R^-1, or R diag(|lam|) R^-1 when absolute=True."""
    lam, R, L = ale_eigen(Q, n, Vn, gas, check)
    if absolute:
        lam = np.abs(lam)
    return np.einsum("...ik,...k,...kj->...ij", R, lam, L)


def max_signal_speed(Q, n, Vn, gas: GasModel):
    """max |lambda| of the ALE Jacobian: |u.n - Vn| + c."""
    Q = np.asarray(Q, dtype=float)
    n = np.asarray(n, dtype=float)
    validate_conserved(Q, gas)
    un = (Q[..., 1] * n[..., 0] + Q[..., 2] * n[..., 1]) / Q[..., 0]
    s = np.abs(un - np.asarray(Vn, dtype=float)) + sound_speed(Q, gas)
    return float(s) if np.ndim(s) == 0 else s
