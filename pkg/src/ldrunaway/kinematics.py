"""Velocity, rapidity and acceleration conversions in 1+1 Minkowski space.

Metric signature is ``diag(+1, -1)``; vectors are ``(t, x)`` component pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

# |v| at or above this is treated as superluminal rather than clamped
V_LIMIT = 1.0 - 1e-12


def _check_v(v: float) -> None:
    if not abs(v) < V_LIMIT:
        raise DomainError(f"|v| must be below the speed of light, got v={v}")


def rapidity_from_velocity(v: float) -> float:
    _check_v(v)
    return math.atanh(v)


def velocity_from_rapidity(theta: float) -> float:
    return math.tanh(theta)


def gamma_of(v: float) -> float:
    """Lorentz factor ``(1 - v**2) ** -0.5``."""
    _check_v(v)
    return 1.0 / math.sqrt(1.0 - v * v)


def coord_accel_from_proper(A: float, v: float) -> float:
    """Coordinate acceleration ``dv/dt = A * (1 - v**2) ** 1.5``."""
    _check_v(v)
    return A * (1.0 - v * v) ** 1.5


def proper_accel_from_coord(A_c: float, v: float) -> float:
    _check_v(v)
    return A_c / (1.0 - v * v) ** 1.5


def coord_accel_from_rapidity(A: float, theta: float) -> float:
    """Same as :func:`coord_accel_from_proper` but keyed on rapidity.

    Stays finite when ``tanh(theta)`` has rounded to +-1.
    """
    c = math.cosh(theta)
    return A / c / c / c


def minkowski_dot(a: tuple[float, float], b: tuple[float, float]) -> float:
    return a[0] * b[0] - a[1] * b[1]


def four_velocity(theta: float) -> tuple[float, float]:
    return (math.cosh(theta), math.sinh(theta))


def unit_normal(theta: float) -> tuple[float, float]:
    """Unit spacelike vector orthogonal to the four-velocity, pointing to +x."""
    return (math.sinh(theta), math.cosh(theta))


@dataclass(frozen=True)
class KinematicState:
    """Derived views of one rapidity value."""

    theta: float

    @classmethod
    def from_velocity(cls, v: float) -> "KinematicState":
        return cls(rapidity_from_velocity(v))

    @property
    def v(self) -> float:
        return math.tanh(self.theta)

    @property
    def gamma(self) -> float:
        return math.cosh(self.theta)

    @property
    def u(self) -> tuple[float, float]:
        return four_velocity(self.theta)

    @property
    def w(self) -> tuple[float, float]:
        return unit_normal(self.theta)
