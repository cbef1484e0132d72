"""
WENO reconstruction on unstructured triangles.

Each cell owns one central and three sector stencils of n_s = 2D cells. Each
stencil gives a degree-M polynomial in the owner's reference coordinates by
least squares on the stencil cell averages, with the owner's own average
enforced exactly. The candidates are blended with nonlinear weights built from
the oscillation indicator.

Stencil membership is fixed at construction (topology never changes); the least
squares operators are rebuilt on the current geometry at every step.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, solve_triangular

from app.config import (
    RECONSTRUCTION_CHUNK,
    RECONSTRUCTION_RCOND,
    STENCIL_FACTOR,
    STENCIL_SEARCH_DEPTH,
    WENO_EPSILON,
    WENO_EXPONENT,
    WENO_LAMBDA_CENTRAL,
    WENO_LAMBDA_SECTOR,
)
from app.errors import ReconstructionError, StencilError
from app.mesh.quadrature import triangle_rule
from app.mesh.trimesh import TriMesh
from app.scheme.basis import MonomialBasis, monomial_basis, n_coefficients

logger = logging.getLogger(__name__)

N_STENCILS = 4
CENTRAL = 0
STENCIL_KINDS = ("central", "sector0", "sector1", "sector2")


def stencil_size(M: int) -> int:
    return STENCIL_FACTOR * n_coefficients(M)


@dataclass(frozen=True)
class Stencil:
    owner: int
    members: np.ndarray  # owner first
    kind: str


@dataclass(frozen=True)
class StencilSet:
    degree: int
    size: int
    members: np.ndarray  # (4, nc, n_s), owner in column 0; rows of invalid stencils repeat the owner
    valid: np.ndarray    # (4, nc)

    def stencil(self, cell: int, index: int = CENTRAL) -> Stencil:
        if not self.valid[index, cell]:
            raise StencilError(f"{STENCIL_KINDS[index]} stencil unavailable", cell=cell)
        return Stencil(owner=cell, members=self.members[index, cell].copy(), kind=STENCIL_KINDS[index])


# ---------------------------------------------------------------------------
# Stencil construction
# ---------------------------------------------------------------------------

def _grow(neighbors, start: list[int], owner: int, n_s: int, dist2: np.ndarray, accept) -> list[int] | None:
    chosen = list(start)
    seen = set(start)
    frontier = [owner]
    for _ in range(STENCIL_SEARCH_DEPTH):
        layer = set()
        for c in frontier:
            layer.update(neighbors[c].tolist())
        layer -= seen
        if not layer:
            break
        seen |= layer
        ordered = sorted(layer, key=lambda c: (dist2[c], c))
        chosen.extend(c for c in ordered if accept(c))
        if len(chosen) >= n_s:
            return chosen[:n_s]
        frontier = ordered
    return None


def build_stencils(mesh: TriMesh, M: int) -> StencilSet:
    """One central and three sector stencils per cell, n_s = 2D members each.

    The central stencil takes the owner, its edge neighbours, then the nearest
    cells (by barycenter) layer by layer. Sector k only admits cells whose
    barycenter lies in the cone spanned from the owner barycenter by the two
    vertices of local edge k. Sectors that run out of cells (typically pointing
    out of the domain) are marked invalid and get zero weight.
    """
    n_s = stencil_size(M)
    nc = mesh.n_cells
    bary = mesh.barycenters()
    neighbors = mesh.vertex_neighbors()
    faces = mesh.face_neighbors()
    members = np.repeat(np.arange(nc)[None, :, None], N_STENCILS, axis=0).repeat(n_s, axis=2)
    valid = np.zeros((N_STENCILS, nc), dtype=bool)
    scale = np.sqrt(np.abs(mesh.areas()))

    for i in range(nc):
        c = bary[i]
        rel = bary - c
        dist2 = np.einsum("ij,ij->i", rel, rel)
        start = [i] + [int(f) for f in faces[i] if f >= 0]
        central = _grow(neighbors, start, i, n_s, dist2, lambda _: True)
        if central is None:
            raise StencilError(f"central stencil cannot reach {n_s} cells (mesh too small)", cell=i)
        members[CENTRAL, i] = central
        valid[CENTRAL, i] = True

        tol = 1e-12 * scale[i] ** 2
        tri = mesh.vertices[mesh.triangles[i]]
        for k in range(3):
            a = tri[k] - c
            b = tri[(k + 1) % 3] - c

            def in_sector(j, a=a, b=b):
                p = rel[j]
                return (a[0] * p[1] - a[1] * p[0] >= -tol) and (p[0] * b[1] - p[1] * b[0] >= -tol)

            sector = _grow(neighbors, [i], i, n_s, dist2, in_sector)
            if sector is None:
                logger.debug("cell %d: sector %d dropped (fewer than %d cells)", i, k, n_s)
                continue
            members[1 + k, i] = sector
            valid[1 + k, i] = True

    logger.debug("stencils built: M=%d n_s=%d, %d/%d sector stencils valid",
                 M, n_s, int(valid[1:].sum()), 3 * nc)
    members.setflags(write=False)
    valid.setflags(write=False)
    return StencilSet(degree=M, size=n_s, members=members, valid=valid)


# ---------------------------------------------------------------------------
# Constrained least squares
# ---------------------------------------------------------------------------

def _pivoted_pinv(B: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares operators Pi R^-1 Q^T of a stack of tall systems, by column-pivoted QR.

    Systems whose trailing |R_kk| falls below RECONSTRUCTION_RCOND * |R_00| are
    flagged rank deficient and get a zero operator.
    """
    n, m, k = B.shape
    P = np.zeros((n, k, m))
    ok = np.zeros(n, dtype=bool)
    for i in range(n):
        if not np.isfinite(B[i]).all():
            continue
        Q, R, perm = qr(B[i], mode="economic", pivoting=True, check_finite=False)
        diag = np.abs(np.diag(R))
        if not diag[-1] > RECONSTRUCTION_RCOND * diag[0]:
            continue
        P[i, perm] = solve_triangular(R, Q.T, check_finite=False)
        ok[i] = True
    return P, ok


def _stencil_operators(X1, J, Jinv, owners, members, basis: MonomialBasis):
    """Least-squares operators of the reduced systems.

    With w_1 eliminated through the owner constraint w_1 = Q_i - sum_k c_k w_k,
    the remaining coefficients solve min |B w' - (Q_j - Q_i)| with
    B_jk = avg_j(psi_k) - c_k over the non-owner members j.

    Returns P (n, D-1, n_s-1) and the rank flag (n,).
    """
    rule = triangle_rule(basis.degree)
    phys = X1[members][:, :, None, :] + np.einsum("nsij,qj->nsqi", J[members], rule.points)
    loc = np.einsum("nij,nsqj->nsqi", Jinv[owners], phys - X1[owners][:, None, None, :])
    A = np.einsum("q,nsqk->nsk", rule.unit_weights, basis.evaluate(loc))
    c = basis.averages
    B = A[:, 1:, 1:] - c[1:]
    return _pivoted_pinv(B)


def _apply(P, owners, members, averages, basis: MonomialBasis) -> np.ndarray:
    c = basis.averages
    rhs = averages[members[:, 1:]] - averages[owners][:, None, :]
    rest = np.einsum("nik,nkv->niv", P, rhs)
    first = averages[owners] - np.einsum("i,niv->nv", c[1:], rest)
    return np.concatenate([first[:, None, :], rest], axis=1)


def reconstruct_stencil(mesh: TriMesh, stencil: Stencil, averages, basis: MonomialBasis) -> np.ndarray:
    """Coefficients (D, nv) of one stencil polynomial in the owner's reference coordinates."""
    averages = np.asarray(averages, dtype=float)
    squeeze = averages.ndim == 1
    if squeeze:
        averages = averages[:, None]
    if len(stencil.members) < basis.size:
        raise StencilError(f"stencil has {len(stencil.members)} < {basis.size} members", cell=stencil.owner)
    X1, J, Jinv, _ = mesh.affine_maps()
    owners = np.array([stencil.owner])
    members = np.asarray(stencil.members, dtype=int)[None, :]
    P, ok = _stencil_operators(X1, J, Jinv, owners, members, basis)
    if not ok[0]:
        raise ReconstructionError("rank-deficient reconstruction system", cell=stencil.owner)
    coef = _apply(P, owners, members, averages, basis)[0]
    return coef[:, 0] if squeeze else coef


# ---------------------------------------------------------------------------
# Nonlinear weights
# ---------------------------------------------------------------------------

def oscillation_indicator(coefficients, sigma_matrix) -> np.ndarray:
    """sigma = w^T Sigma w over the coefficient axis (axis -2 for (..., D, nv), -1 for (..., D))."""
    w = np.asarray(coefficients, dtype=float)
    S = np.asarray(sigma_matrix, dtype=float)
    if w.ndim == 1:
        return float(w @ S @ w)
    return np.einsum("...kv,km,...mv->...v", w, S, w)


def weno_combine(coefficients, sigmas, lambdas=None, valid=None):
    """Blend candidate polynomials.

    Parameters
    ----------
    coefficients : (S, ..., D, nv)
    sigmas : (S, ..., nv)
    lambdas : (S,) linear weights; default central 1e5 then sector 1
    valid : optional (S, ...) mask, invalid candidates get zero weight

    Returns
    -------
    combined (..., D, nv), weights (S, ..., nv)
    """
    coefficients = np.asarray(coefficients, dtype=float)
    sigmas = np.asarray(sigmas, dtype=float)
    S = coefficients.shape[0]
    if lambdas is None:
        lambdas = np.array([WENO_LAMBDA_CENTRAL] + [WENO_LAMBDA_SECTOR] * (S - 1))
    lambdas = np.asarray(lambdas, dtype=float).reshape((S,) + (1,) * (sigmas.ndim - 1))
    raw = lambdas / (sigmas + WENO_EPSILON) ** WENO_EXPONENT
    if valid is not None:
        raw = np.where(np.asarray(valid)[..., None], raw, 0.0)
    weights = raw / raw.sum(axis=0, keepdims=True)
    combined = np.einsum("s...v,s...kv->...kv", weights, coefficients)
    return combined, weights


# ---------------------------------------------------------------------------
# Reconstructed field
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReconstructionPolynomial:
    owner: int
    coefficients: np.ndarray      # (D, nv)
    origin: np.ndarray            # X1 of the owner (2,)
    inverse_jacobian: np.ndarray  # (2, 2)
    basis: MonomialBasis


def evaluate(poly: ReconstructionPolynomial, point, physical: bool = True, gradient: bool = False):
    """Value (and physical gradient if requested) of the polynomial at point(s)."""
    p = np.asarray(point, dtype=float)
    xi = (p - poly.origin) @ poly.inverse_jacobian.T if physical else p
    value = poly.basis.evaluate(xi) @ poly.coefficients
    if not gradient:
        return value
    dref = np.einsum("...kd,kv->...vd", poly.basis.gradient(xi), poly.coefficients)
    if physical:
        dref = dref @ poly.inverse_jacobian
    return value, dref


@dataclass(frozen=True)
class ReconstructionField:
    basis: MonomialBasis
    coefficients: np.ndarray      # (nc, D, nv)
    origin: np.ndarray            # (nc, 2)
    inverse_jacobian: np.ndarray  # (nc, 2, 2)
    weights: np.ndarray | None = None  # (4, nc, nv)

    def polynomial(self, cell: int) -> ReconstructionPolynomial:
        return ReconstructionPolynomial(cell, self.coefficients[cell], self.origin[cell],
                                        self.inverse_jacobian[cell], self.basis)

    def to_reference(self, cells, x) -> np.ndarray:
        cells = np.asarray(cells, dtype=int)
        return np.einsum("...ij,...j->...i", self.inverse_jacobian[cells], np.asarray(x) - self.origin[cells])

    def evaluate_reference(self, cells, xi) -> np.ndarray:
        cells = np.asarray(cells, dtype=int)
        return np.einsum("...k,...kv->...v", self.basis.evaluate(xi), self.coefficients[cells])

    def evaluate(self, cells, x) -> np.ndarray:
        """States at physical points x (..., 2) using the polynomials of `cells` (...)."""
        return self.evaluate_reference(cells, self.to_reference(cells, x))


class WenoReconstructor:
    """Reconstruction operator bound to a mesh topology and degree."""

    def __init__(self, mesh: TriMesh, M: int, stencils: StencilSet | None = None) -> None:
        self.degree = M
        self.basis = monomial_basis(M)
        self.stencils = stencils if stencils is not None else build_stencils(mesh, M)
        self.sigma = self.basis.smoothness_matrix

    def reconstruct(self, mesh: TriMesh, averages: np.ndarray) -> ReconstructionField:
        """WENO polynomials for every cell on the mesh's current geometry."""
        averages = np.asarray(averages, dtype=float)
        nc, nv = averages.shape
        D = self.basis.size
        X1, J, Jinv, _ = mesh.affine_maps()
        cand = np.empty((N_STENCILS, nc, D, nv))
        valid = self.stencils.valid.copy()
        for lo in range(0, nc, RECONSTRUCTION_CHUNK):
            hi = min(lo + RECONSTRUCTION_CHUNK, nc)
            owners = np.arange(lo, hi)
            for s in range(N_STENCILS):
                members = self.stencils.members[s, lo:hi]
                P, ok = _stencil_operators(X1, J, Jinv, owners, members, self.basis)
                if s == CENTRAL and not ok.all():
                    bad = int(owners[np.flatnonzero(~ok)[0]])
                    raise ReconstructionError("rank-deficient central reconstruction system", cell=bad)
                valid[s, lo:hi] &= ok
                cand[s, lo:hi] = _apply(P, owners, members, averages, self.basis)
        sig = oscillation_indicator(cand, self.sigma)
        combined, weights = weno_combine(cand, sig, valid=valid)
        return ReconstructionField(self.basis, combined, X1, Jinv, weights)
