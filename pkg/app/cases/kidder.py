"""
Isentropic compression of a gas shell (exact self-similar solution).

All radii scale with the homothety rate h(t) = sqrt(1 - t^2 / tau^2):
R = h(t) r, rho(R, t) = rho0(r) h^(-2/(gamma-1)), u_r = R h'/h, p = s0 rho^gamma.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from app.cases.base import BoundaryMotion, CaseDefinition, primitive_provider
from app.geometry.boundary import scaled_circle
from app.mesh.generators import generate_annulus
from app.physics.euler import GasModel
from app.scheme.sbm import dirichlet


@dataclass(frozen=True)
class KidderSolution:
    gamma: float = 2.0
    r_inner: float = 0.9
    r_outer: float = 1.0
    rho_inner: float = 1.0
    rho_outer: float = 2.0
    s0: float = 1.0

    @property
    def c_inner(self) -> float:
        return float(np.sqrt(self.gamma * self.s0 * self.rho_inner ** (self.gamma - 1.0)))

    @property
    def c_outer(self) -> float:
        return float(np.sqrt(self.gamma * self.s0 * self.rho_outer ** (self.gamma - 1.0)))

    @cached_property
    def tau(self) -> float:
        """Focalisation time."""
        num = (self.gamma - 1.0) * (self.r_outer ** 2 - self.r_inner ** 2)
        den = 2.0 * (self.c_outer ** 2 - self.c_inner ** 2)
        return float(np.sqrt(num / den))

    @property
    def final_time(self) -> float:
        """Time at which h = 1/2."""
        return float(np.sqrt(3.0) / 2.0 * self.tau)

    def h(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0) or np.any(t >= self.tau):
            raise ValueError(f"Kidder time must lie in [0, {self.tau}), got {t}")
        return np.sqrt(1.0 - t ** 2 / self.tau ** 2)

    def h_rate(self, t):
        t = np.asarray(t, dtype=float)
        return -t / (self.tau ** 2 * self.h(t))

    def rho0(self, r):
        """Initial density profile blending rho_inner^(gamma-1) and rho_outer^(gamma-1) in r^2."""
        r2 = np.asarray(r, dtype=float) ** 2
        span = self.r_outer ** 2 - self.r_inner ** 2
        g1 = self.gamma - 1.0
        blend = ((self.r_outer ** 2 - r2) * self.rho_inner ** g1 + (r2 - self.r_inner ** 2) * self.rho_outer ** g1) / span
        return blend ** (1.0 / g1)

    def exact(self, R, t, extrapolate: bool = False):
        """(rho, u_r, p) at current radius R and time t."""
        R = np.asarray(R, dtype=float)
        h = self.h(t)
        r = R / h
        if not extrapolate:
            tol = 1e-12
            if np.any(r < self.r_inner * (1.0 - tol)) or np.any(r > self.r_outer * (1.0 + tol)):
                raise ValueError(f"radius outside the shell at t={t}: R in [{R.min()}, {R.max()}]")
        rho = self.rho0(r) * h ** (-2.0 / (self.gamma - 1.0))
        u_r = R * self.h_rate(t) / h
        p = self.s0 * rho ** self.gamma
        return rho, u_r, p

    def entropy(self, R, t):
        rho, _, p = self.exact(R, t)
        return p / rho ** self.gamma


def kidder_exact(r, t, solution: KidderSolution | None = None):
    return (solution or KidderSolution()).exact(r, t)


def kidder_tau(solution: KidderSolution | None = None) -> float:
    return (solution or KidderSolution()).tau


def _radial_motion(sol: KidderSolution) -> BoundaryMotion:
    return BoundaryMotion(
        instantaneous=lambda x, t: (sol.h_rate(t) / sol.h(t)) * x,
        secant=lambda x, t, dt: (sol.h(t + dt) / sol.h(t) - 1.0) / dt * x,
    )


def kidder_case(n_r: int = 3, n_theta: int = 64, corrected: bool = True,
                solution: KidderSolution | None = None) -> CaseDefinition:
    sol = solution or KidderSolution()
    gas = GasModel(sol.gamma)

    def state(x, t):
        # the surrogate boundary lies slightly outside the shell; evaluate there too
        R = np.hypot(x[:, 0], x[:, 1])
        rho, u_r, p = sol.exact(R, t, extrapolate=True)
        return rho, u_r * x[:, 0] / R, u_r * x[:, 1] / R, p

    provider = primitive_provider(state, gas)
    inner = scaled_circle(sol.r_inner, sol.h, sol.h_rate)
    outer = scaled_circle(sol.r_outer, sol.h, sol.h_rate)
    motion = _radial_motion(sol)
    return CaseDefinition(
        name="kidder",
        gas=gas,
        mesh_factory=lambda: generate_annulus(sol.r_inner, sol.r_outer, n_r, n_theta),
        initial_state=provider,
        exact=provider,
        boundaries={"inner": dirichlet(provider, inner, corrected), "outer": dirichlet(provider, outer, corrected)},
        motion={"inner": motion, "outer": motion},
        descriptors={"inner": inner, "outer": outer},
        final_time=sol.final_time,
        entropy_reference=sol.s0,
        parameters={"n_r": n_r, "n_theta": n_theta},
    )
