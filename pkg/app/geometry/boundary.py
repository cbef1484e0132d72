"""
True-boundary descriptors: closest point, signed distance, normal, wall velocity.

A descriptor is attached to a boundary tag. Queries are vectorised over points
of shape (N, 2) at a single time t.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from app.errors import ProjectionError

Vector = Callable[[float], np.ndarray]
Scalar = Callable[[float], float]


@dataclass(frozen=True)
class Projection:
    x: np.ndarray   # (N, 2) points on the true boundary
    d: np.ndarray   # (N,) signed distance, x = x_tilde + d * n
    n: np.ndarray   # (N, 2) unit normal of the true boundary at x


class BoundaryDescriptor(ABC):
    """Analytic, time-parameterised curve bounding the fluid domain."""

    @abstractmethod
    def closest_point(self, x_tilde, t: float) -> Projection:
        ...

    @abstractmethod
    def wall_velocity(self, x, t: float) -> np.ndarray:
        ...


@dataclass(frozen=True)
class CircleBoundary(BoundaryDescriptor):
    """Circle with center path c(t) and radius path R(t).

    The normal is the outward radial direction of the circle; d = R - |x~ - c| is
    positive for surrogate points inside the circle.
    """

    center: Vector
    radius: Scalar
    center_velocity: Vector
    radius_rate: Scalar

    def closest_point(self, x_tilde, t: float) -> Projection:
        x_tilde = np.atleast_2d(np.asarray(x_tilde, dtype=float))
        c = np.asarray(self.center(t), dtype=float)
        R = float(self.radius(t))
        if not R > 0.0:
            raise ProjectionError(f"circle radius must be positive at t={t}, got {R}")
        r = x_tilde - c
        dist = np.hypot(r[:, 0], r[:, 1])
        bad = np.flatnonzero(dist <= 1e-14 * R)
        if bad.size:
            raise ProjectionError(f"ambiguous projection: point {x_tilde[bad[0]].tolist()} is the circle center")
        n = r / dist[:, None]
        return Projection(x=c + R * n, d=R - dist, n=n)

    def wall_velocity(self, x, t: float) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        c = np.asarray(self.center(t), dtype=float)
        r = x - c
        n = r / np.hypot(r[:, 0], r[:, 1])[:, None]
        return np.asarray(self.center_velocity(t), dtype=float) + float(self.radius_rate(t)) * n


def closest_point(descriptor: BoundaryDescriptor, x_tilde, t: float) -> Projection:
    return descriptor.closest_point(x_tilde, t)


def wall_velocity(descriptor: BoundaryDescriptor, x, t: float) -> np.ndarray:
    return descriptor.wall_velocity(x, t)


# ---------------------------------------------------------------------------
# Factories
# ---------------------------------------------------------------------------

def static_circle(radius: float, center=(0.0, 0.0)) -> CircleBoundary:
    c = np.asarray(center, dtype=float)
    return CircleBoundary(
        center=lambda t: c,
        radius=lambda t: radius,
        center_velocity=lambda t: np.zeros(2),
        radius_rate=lambda t: 0.0,
    )


def oscillating_circle(radius: float, amplitude: float, frequency: float, axis: str = "x",
                       phase: str = "sin") -> CircleBoundary:
    """Rigid circle oscillating along `axis`: A sin(2 pi f t) or A cos(2 pi f t)."""
    if axis not in ("x", "y") or phase not in ("sin", "cos"):
        raise ValueError(f"axis must be x|y and phase sin|cos, got {axis!r}, {phase!r}")
    k = 0 if axis == "x" else 1
    omega = 2.0 * np.pi * frequency

    def offset(t: float) -> float:
        return amplitude * (np.sin(omega * t) if phase == "sin" else np.cos(omega * t))

    def rate(t: float) -> float:
        return amplitude * omega * (np.cos(omega * t) if phase == "sin" else -np.sin(omega * t))

    def center(t: float) -> np.ndarray:
        c = np.zeros(2)
        c[k] = offset(t)
        return c

    def center_velocity(t: float) -> np.ndarray:
        w = np.zeros(2)
        w[k] = rate(t)
        return w

    return CircleBoundary(center=center, radius=lambda t: radius,
                          center_velocity=center_velocity, radius_rate=lambda t: 0.0)


def scaled_circle(radius0: float, scale: Scalar, scale_rate: Scalar, center=(0.0, 0.0)) -> CircleBoundary:
    """Circle about a fixed center with radius R(t) = radius0 * s(t)."""
    c = np.asarray(center, dtype=float)
    return CircleBoundary(
        center=lambda t: c,
        radius=lambda t: radius0 * scale(t),
        center_velocity=lambda t: np.zeros(2),
        radius_rate=lambda t: radius0 * scale_rate(t),
    )


BoundarySet = Mapping[str, BoundaryDescriptor]
