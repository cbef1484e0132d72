"""
Uniform flow on a disk whose interior vertices swirl while the boundary stays fixed.
"""
from __future__ import annotations

import numpy as np

from app.cases.base import BoundaryMotion, CaseDefinition, uniform_state
from app.geometry.boundary import static_circle
from app.mesh.generators import generate_disk
from app.physics.euler import GasModel
from app.scheme.sbm import dirichlet


def swirl_velocity(x, amplitude: float = 0.5) -> np.ndarray:
    """a (1 - r^2)^2 (-y, x): smooth, zero on the unit circle."""
    x = np.asarray(x, dtype=float)
    r2 = x[:, 0] ** 2 + x[:, 1] ** 2
    g = amplitude * np.clip(1.0 - r2, 0.0, None) ** 2
    return np.column_stack([-g * x[:, 1], g * x[:, 0]])


def freestream_case(n: int = 4, amplitude: float = 0.5, final_time: float = 0.2) -> CaseDefinition:
    gas = GasModel(1.4)
    state = uniform_state(1.0, 0.1, 0.1, 1.0, gas)
    return CaseDefinition(
        name="freestream",
        gas=gas,
        mesh_factory=lambda: generate_disk(1.0, n),
        initial_state=state,
        exact=state,
        boundaries={"outer": dirichlet(state)},
        motion={"outer": BoundaryMotion.fixed()},
        interior_motion=lambda x, t: swirl_velocity(x, amplitude),
        descriptors={"outer": static_circle(1.0)},
        final_time=final_time,
        parameters={"n": n, "amplitude": amplitude},
        entropy_reference=1.0,
    )
