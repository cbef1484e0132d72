"""
Rigid cylinder oscillating inside a square box of gas.
"""
from __future__ import annotations

import numpy as np

from app.cases.base import BoundaryMotion, CaseDefinition, uniform_state
from app.geometry.boundary import CircleBoundary, oscillating_circle
from app.mesh.generators import generate_cylinder_box
from app.physics.euler import GasModel
from app.scheme.sbm import dirichlet, slip_wall

RADIUS = 1.0
HALF_WIDTH = 10.0

HORIZONTAL = {"amplitude": 0.1, "frequency": 0.1, "axis": "x", "phase": "sin", "u": 0.0, "final_time": 10.0}
VERTICAL = {"amplitude": 0.05, "frequency": 0.25, "axis": "y", "phase": "cos", "u": 0.25, "final_time": 8.0}


def wall_center(descriptor: CircleBoundary, t: float = 0.0) -> tuple[float, float]:
    """Circle center at time t; the wall ring of the mesh is built around it."""
    c = np.asarray(descriptor.center(t), dtype=float)
    return float(c[0]), float(c[1])


def _rigid_motion(descriptor: CircleBoundary) -> BoundaryMotion:
    return BoundaryMotion(
        instantaneous=lambda x, t: np.broadcast_to(descriptor.center_velocity(t), x.shape).copy(),
        secant=lambda x, t, dt: np.broadcast_to(
            (np.asarray(descriptor.center(t + dt)) - np.asarray(descriptor.center(t))) / dt, x.shape).copy(),
    )


def cylinder_case(mode: str = "horizontal", n_r: int = 38, n_theta: int = 96, grading: float = 1.08,
                  corrected: bool = True, final_time: float | None = None) -> CaseDefinition:
    params = {"horizontal": HORIZONTAL, "vertical": VERTICAL}.get(mode)
    if params is None:
        raise ValueError(f"unknown cylinder mode {mode!r}")
    gas = GasModel(1.4)
    freestream = uniform_state(1.0, params["u"], 0.0, 1.0, gas)
    wall = oscillating_circle(RADIUS, params["amplitude"], params["frequency"], params["axis"], params["phase"])
    return CaseDefinition(
        name=f"cylinder_{mode}",
        gas=gas,
        mesh_factory=lambda: generate_cylinder_box(RADIUS, HALF_WIDTH, n_r, n_theta, grading,
                                                   center=wall_center(wall)),
        initial_state=freestream,
        boundaries={"wall": slip_wall(wall, corrected), "farfield": dirichlet(freestream)},
        motion={"wall": _rigid_motion(wall), "farfield": BoundaryMotion.fixed()},
        descriptors={"wall": wall},
        final_time=params["final_time"] if final_time is None else final_time,
        entropy_reference=1.0,
        parameters={"n_r": n_r, "n_theta": n_theta, "amplitude": params["amplitude"],
                    "frequency": params["frequency"]},
    )


def oscillating_cylinder_cases(**kwargs) -> tuple[CaseDefinition, CaseDefinition]:
    return cylinder_case("horizontal", **kwargs), cylinder_case("vertical", **kwargs)
