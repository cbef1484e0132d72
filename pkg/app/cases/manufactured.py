"""
Steady manufactured solution on an expanding disk.

rho = p = 1 + 0.2 sin(x + y), u = v = 1, with the source that makes it an exact
solution for gamma = 1.4. The disk boundary moves radially with V = u0 x.
"""
from __future__ import annotations

import numpy as np

from app.cases.base import BoundaryMotion, CaseDefinition, primitive_provider
from app.geometry.boundary import scaled_circle
from app.mesh.generators import generate_disk
from app.physics.euler import GasModel, PrimitiveState
from app.scheme.sbm import dirichlet

GAMMA = 1.4
EXPANSION_RATE = 0.1
FINAL_TIME = 0.5
AMPLITUDE = 0.2
SOURCE_WEIGHTS = np.array([0.4, 0.6, 0.6, 1.8])


def manufactured2d_exact(x, y) -> PrimitiveState | tuple:
    """Primitive state at (x, y); scalars give a PrimitiveState, arrays a tuple."""
    s = 1.0 + AMPLITUDE * np.sin(np.asarray(x, dtype=float) + np.asarray(y, dtype=float))
    if np.ndim(s) == 0:
        return PrimitiveState(float(s), (1.0, 1.0), float(s))
    return s, np.ones_like(s), np.ones_like(s), s


def manufactured2d_source(x, y) -> np.ndarray:
    """(..., 4) source (0.4, 0.6, 0.6, 1.8) cos(x + y)."""
    c = np.cos(np.asarray(x, dtype=float) + np.asarray(y, dtype=float))
    return np.asarray(c)[..., None] * SOURCE_WEIGHTS


def manufactured2d_boundary_velocity(x, u0: float = EXPANSION_RATE) -> np.ndarray:
    """Radial boundary velocity u0 * x (magnitude u0 |x|)."""
    return u0 * np.asarray(x, dtype=float)


def manufactured_case(n: int = 6, u0: float = EXPANSION_RATE, final_time: float = FINAL_TIME,
                      corrected: bool = True) -> CaseDefinition:
    gas = GasModel(GAMMA)

    def state(x, t):
        s = 1.0 + AMPLITUDE * np.sin(x[:, 0] + x[:, 1])
        return s, 1.0, 1.0, s

    provider = primitive_provider(state, gas)
    descriptor = scaled_circle(1.0, lambda t: np.exp(u0 * t), lambda t: u0 * np.exp(u0 * t))
    motion = BoundaryMotion(
        instantaneous=lambda x, t: manufactured2d_boundary_velocity(x, u0),
        secant=lambda x, t, dt: np.expm1(u0 * dt) / dt * x,
    )
    return CaseDefinition(
        name="manufactured",
        gas=gas,
        mesh_factory=lambda: generate_disk(1.0, n),
        initial_state=provider,
        exact=provider,
        source=lambda x, t: manufactured2d_source(x[:, 0], x[:, 1]),
        boundaries={"outer": dirichlet(provider, descriptor, corrected)},
        motion={"outer": motion},
        descriptors={"outer": descriptor},
        final_time=final_time,
        parameters={"n": n, "u0": u0},
    )
