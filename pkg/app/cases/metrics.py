"""
Error metrology and analytic self-checks.
"""
from __future__ import annotations

import numpy as np
import pandas as pd

from app.cases.base import StateFn
from app.cases.kidder import KidderSolution
from app.cases.manufactured import GAMMA, manufactured2d_exact, manufactured2d_source
from app.mesh.quadrature import triangle_rule
from app.mesh.trimesh import TriMesh
from app.physics.euler import GasModel, entropy, physical_flux, primitive_to_conserved
from app.scheme.weno import ReconstructionField


def l2_error(mesh: TriMesh, field: ReconstructionField, exact: StateFn, t: float,
             degree: int | None = None) -> dict[str, float]:
    """sqrt(sum_i int_Ti (w_h - q_exact)^2) for density and x-velocity."""
    M = field.basis.degree
    rule = triangle_rule(degree if degree is not None else 2 * M + 2)
    X1, J, _, det = mesh.affine_maps()
    x = X1[:, None, :] + np.einsum("cij,qj->cqi", J, rule.points)
    cells = np.broadcast_to(np.arange(mesh.n_cells)[:, None], x.shape[:-1])
    xi = np.broadcast_to(rule.points, x.shape)
    w = field.evaluate_reference(cells, xi)
    q = np.asarray(exact(x.reshape(-1, 2), np.full(x.shape[0] * x.shape[1], t)), dtype=float).reshape(w.shape)
    weights = det[:, None] * rule.weights[None, :]
    d_rho = w[..., 0] - q[..., 0]
    d_u = w[..., 1] / w[..., 0] - q[..., 1] / q[..., 0]
    return {
        "rho": float(np.sqrt(np.sum(weights * d_rho ** 2))),
        "u": float(np.sqrt(np.sum(weights * d_u ** 2))),
    }


def observed_order(h1: float, e1: float, h2: float, e2: float) -> float:
    """ln(E1/E2) / ln(h1/h2)."""
    if not (h1 > 0 and h2 > 0 and e1 > 0 and e2 > 0) or h1 == h2:
        return float("nan")
    return float(np.log(e1 / e2) / np.log(h1 / h2))


def kidder_scatter(mesh: TriMesh, averages: np.ndarray) -> pd.DataFrame:
    """Cell barycenter radius against cell-average density."""
    b = mesh.barycenters()
    return pd.DataFrame({
        "cell": np.arange(mesh.n_cells),
        "radius": np.hypot(b[:, 0], b[:, 1]),
        "density": np.asarray(averages)[:, 0],
    })


def entropy_deviation(averages: np.ndarray, gas: GasModel, reference: float = 1.0) -> float:
    """max over cells of |p / rho^gamma - reference|."""
    return float(np.max(np.abs(entropy(averages, gas) - reference)))


# ---------------------------------------------------------------------------
# Analytic self-checks
# ---------------------------------------------------------------------------

def manufactured_residual(n_points: int = 50, step: float = 1e-5, seed: int = 0) -> float:
    """max |div F(Q) - S| of the steady manufactured solution by central differences."""
    gas = GasModel(GAMMA)
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, size=(n_points, 2))

    def flux(x, y):
        return physical_flux(primitive_to_conserved(np.stack(manufactured2d_exact(x, y), axis=-1), gas), gas)

    x, y = pts[:, 0], pts[:, 1]
    div = (flux(x + step, y)[..., 0] - flux(x - step, y)[..., 0]) / (2 * step)
    div += (flux(x, y + step)[..., 1] - flux(x, y - step)[..., 1]) / (2 * step)
    return float(np.max(np.abs(div - manufactured2d_source(x, y))))


def kidder_identities(solution: KidderSolution | None = None, n_r: int = 21, n_t: int = 11) -> dict[str, float]:
    """Entropy and self-similarity residuals of the exact shell solution on an (r, t) grid."""
    sol = solution or KidderSolution()
    r = np.linspace(sol.r_inner, sol.r_outer, n_r)
    entropy_err = 0.0
    similarity_err = 0.0
    for t in np.linspace(0.0, sol.final_time, n_t):
        h = float(sol.h(t))
        R = h * r
        rho, _, p = sol.exact(R, t)
        entropy_err = max(entropy_err, float(np.max(np.abs(p / rho ** sol.gamma - sol.s0))))
        scaled = rho * h ** (2.0 / (sol.gamma - 1.0))
        similarity_err = max(similarity_err, float(np.max(np.abs(scaled - sol.rho0(r)))))
    return {"entropy": entropy_err, "similarity": similarity_err, "h_final": abs(float(sol.h(sol.final_time)) - 0.5)}
