"""
Quadrature rules on the reference triangle and the unit interval.

Triangle rules are collapsed (Duffy) Gauss-Legendre products: exact for any
requested total degree, weights positive, points strictly interior.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Reference triangle vertices (xi, eta) for local vertices 0, 1, 2.
REFERENCE_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
REFERENCE_AREA = 0.5


@dataclass(frozen=True)
class TriangleRule:
    degree: int
    points: np.ndarray   # (nq, 2) reference coordinates
    weights: np.ndarray  # (nq,) summing to REFERENCE_AREA

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def unit_weights(self) -> np.ndarray:
        """Weights normalised to sum to one (cell averages)."""
        return self.weights / REFERENCE_AREA


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Legendre nodes and weights on [0, 1]."""
    if n < 1:
        raise ValueError(f"need at least one point, got {n}")
    x, w = np.polynomial.legendre.leggauss(n)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=None)
def triangle_rule(degree: int) -> TriangleRule:
    """Rule exact for polynomials of total degree <= degree on the reference triangle."""
    if degree < 0:
        raise ValueError(f"degree must be non-negative, got {degree}")
    k = (degree + 3) // 2
    u, wu = gauss_legendre(k)
    v, wv = gauss_legendre(k)
    U, V = np.meshgrid(u, v, indexing="ij")
    WU, WV = np.meshgrid(wu, wv, indexing="ij")
    xi = U.ravel()
    eta = (V * (1.0 - U)).ravel()
    weights = (WU * WV * (1.0 - U)).ravel()
    points = np.column_stack([xi, eta])
    points.setflags(write=False)
    weights.setflags(write=False)
    return TriangleRule(degree=degree, points=points, weights=weights)
