"""Small builders shared by several test modules."""
from __future__ import annotations

import numpy as np

from app.mesh.generators import generate_disk
from app.mesh.trimesh import TriMesh


def perturbed_disk(n: int = 6, amount: float = 0.2, seed: int = 7) -> TriMesh:
    """Disk whose interior vertices are jittered by `amount` of the ring spacing."""
    mesh = generate_disk(1.0, n)
    rng = np.random.default_rng(seed)
    shift = np.zeros_like(mesh.vertices)
    interior = np.setdiff1d(np.arange(mesh.n_vertices), mesh.boundary_vertices())
    shift[interior] = rng.uniform(-1.0, 1.0, size=(len(interior), 2)) * amount / n
    return mesh.with_positions(mesh.vertices + shift)


def random_states(rng: np.random.Generator, n: int, speed: float = 1.0, gamma: float = 1.4) -> np.ndarray:
    """n valid conserved states with rho, p in [0.5, 2] and |u| <= speed."""
    rho = rng.uniform(0.5, 2.0, n)
    u = rng.uniform(-speed, speed, (n, 2))
    p = rng.uniform(0.5, 2.0, n)
    E = p / (gamma - 1.0) + 0.5 * rho * (u ** 2).sum(axis=1)
    return np.column_stack([rho, rho * u[:, 0], rho * u[:, 1], E])
