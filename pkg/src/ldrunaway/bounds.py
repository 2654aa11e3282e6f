"""Analytic turn-around bounds and their slack on simulated worldlines.

``K`` throughout is the field impulse ``int |Ebar| dx`` over ``[-r0, -r2]``;
for a cutoff Coulomb field it equals ``Q2 * (1/r2 - 1/r0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError
from .fields import FieldKind, FieldModel, field_impulse
from .integrator import Worldline
from .kinematics import gamma_of

__all__ = [
    "BoundKind",
    "BoundQuery",
    "BoundReport",
    "lemma2_proper_bound",
    "lemma2_coord_bound",
    "contra_threshold",
    "theorem1_max_velocity",
    "lemma3_pointwise_bound",
    "theorem2_guarantee",
    "theorem2_min_cutoff",
    "check_bounds_on_worldline",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class BoundKind(str, Enum):
    LEMMA2_PROPER = "Lemma2Proper"
    LEMMA2_COORD = "Lemma2Coord"
    LEMMA3_POINTWISE = "Lemma3Pointwise"
    CONTRA_THRESHOLD = "ContraThreshold"
    THEOREM2_CUTOFF = "Theorem2Cutoff"


@dataclass(frozen=True)
class BoundQuery:
    v0: float
    r0: float
    r1: float
    r2: float
    K: float

    def __post_init__(self):
        if not 0 < self.v0 < 1:
            raise ValueError(f"v0 must lie in (0, 1), got {self.v0}")
        if not 0 < self.r1 < self.r2 < self.r0:
            raise ValueError(f"need 0 < r1 < r2 < r0, got r1={self.r1}, r2={self.r2}, r0={self.r0}")
        if not self.K >= 0:
            raise ValueError(f"K must be non-negative, got {self.K}")

    @classmethod
    def for_field(cls, field: FieldModel, v0: float, r1: float, r2: float | None = None) -> "BoundQuery":
        """Query with ``K`` computed from the field; ``r2`` defaults to ``(r0 + r1) / 2``."""
        if r2 is None:
            r2 = 0.5 * (field.r0 + r1)
        return cls(v0, field.r0, r1, r2, field_impulse(field, -field.r0, -r2))


@dataclass(frozen=True)
class BoundReport:
    """``slack = measured - analytic``; non-negative means the bound held."""

    bound_kind: BoundKind
    analytic_value: float
    measured_value: float
    slack: float


def _check_v0(v0: float) -> None:
    if not 0 < v0 < 1:
        raise DomainError(f"v0 must lie in (0, 1), got {v0}")


def lemma2_proper_bound(v0: float, K: float) -> float:
    """Lower bound on ``|A|`` when the electron first reaches ``x = -r2``."""
    _check_v0(v0)
    if K < 0:
        raise DomainError(f"K must be non-negative, got {K}")
    return K / (v0 * gamma_of(v0))


def lemma2_coord_bound(v0: float, K: float) -> float:
    """Lower bound on ``|dv/dt|`` at ``x = -r2``: ``(1 - v0**2)**2 * K / v0``."""
    _check_v0(v0)
    if K < 0:
        raise DomainError(f"K must be non-negative, got {K}")
    return (1.0 - v0 * v0) ** 2 * K / v0


def contra_threshold(K: float, r1: float, r2: float) -> float:
    """Entry speed below which reaching ``x = -r1`` is impossible.

    Solves ``v0**2 / (1 - v0**2) = K * (r2 - r1)``.
    """
    if not K > 0:
        raise DomainError(f"K must be positive to give a guarantee, got {K}")
    if not 0 < r1 < r2:
        raise DomainError(f"need 0 < r1 < r2, got r1={r1}, r2={r2}")
    c = K * (r2 - r1)
    return math.sqrt(c / (1.0 + c))


def _golden_max(f, a: float, b: float, tol: float) -> float:
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def theorem1_max_velocity(field: FieldModel, r1: float, *, scan: int = 256) -> tuple[float, float]:
    """Best guaranteed entry speed for turning before ``x = -r1``.

    Maximizes ``K(r2) * (r2 - r1)`` over the checkpoint ``r2`` in ``(r1, r0)``:
    a coarse scan picks the bracket (tabulated profiles need not be unimodal),
    then golden-section search refines it to 1e-10 in ``r2``.

    Returns ``(v0_star, r2_star)``.
    """
    r0 = field.r0
    if not 0 < r1 < r0:
        raise DomainError(f"need 0 < r1 < r0, got r1={r1}, r0={r0}")

    def c_of(r2: float) -> float:
        return field_impulse(field, -r0, -r2) * (r2 - r1)

    grid = np.linspace(r1, r0, scan + 1)
    vals = [c_of(r) for r in grid]
    i = int(np.argmax(vals))
    if vals[i] <= 0:
        raise ValueError("field impulse vanishes on every checkpoint interval")
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, scan)]
    r2 = _golden_max(c_of, lo, hi, 1e-10)
    best = c_of(r2)
    if best <= 0:
        raise ValueError("field impulse vanishes on every checkpoint interval")
    return math.sqrt(best / (1.0 + best)), float(r2)


def lemma3_pointwise_bound(v0: float, r0: float, x: float, Q2: float = 1.0) -> float:
    """Lower bound on ``|dv/dt|`` at position ``x`` before the turn (cutoff Coulomb)."""
    _check_v0(v0)
    if not -r0 <= x < 0:
        raise DomainError(f"x must lie in [-r0, 0), got x={x}")
    return (1.0 - v0 * v0) ** 2 / v0 * Q2 * (-1.0 / x - 1.0 / r0)


def theorem2_guarantee(v0: float, r1: float, r0: float, Q2: float = 1.0) -> float:
    """Lower bound on the speed lost between ``-r0`` and ``-r1`` (cutoff Coulomb).

    The electron turns before ``-r1`` whenever this is at least ``v0``.
    """
    u = (r0 - r1) / r1
    bracket = math.log1p(u) - u / (1.0 + u)
    return (1.0 - v0 * v0) ** 2 / (v0 * v0) * Q2 * bracket


def theorem2_min_cutoff(v0: float, r1: float, Q2: float = 1.0) -> float:
    """Smallest cutoff ``r0 > r1`` whose guarantee reaches ``v0``.

    The guarantee increases with ``r0`` beyond ``r1`` and grows without bound,
    so doubling finds a bracket and bisection closes it to 1e-10 relative.
    """
    _check_v0(v0)
    if not r1 > 0:
        raise DomainError(f"r1 must be positive, got {r1}")
    if not Q2 > 0:
        raise DomainError(f"Q2 must be positive, got {Q2}")
    lo, hi = r1, 2.0 * r1
    while theorem2_guarantee(v0, r1, hi, Q2) < v0:
        lo, hi = hi, 2.0 * hi
    while hi - lo > 1e-10 * hi:
        mid = 0.5 * (lo + hi)
        if theorem2_guarantee(v0, r1, mid, Q2) >= v0:
            hi = mid
        else:
            lo = mid
    return hi


def _closest_approach(worldline: Worldline) -> float:
    i = worldline.turn_index
    if i is not None:
        return worldline.samples[i].x
    return float(worldline.arrays["x"].max())


def check_bounds_on_worldline(
    worldline: Worldline, field: FieldModel, query: BoundQuery
) -> list[BoundReport]:
    """Measure each applicable bound against a simulated worldline.

    Lemma 2 bounds are read at the first ``x = -r2`` crossing; the pointwise
    bound is minimized over pre-turn samples (cutoff Coulomb only).  The
    turn-before-``-r1`` guarantees are reported only where their premise
    holds, as ``measured`` = closest distance to the origin, ``analytic = r1``.
    """
    if not math.isclose(query.r0, field.r0, rel_tol=1e-12):
        raise ValueError(f"query r0={query.r0} does not match field r0={field.r0}")
    if worldline.config.field != field:
        raise ValueError("worldline was integrated in a different field")
    v0 = query.v0
    if not math.isclose(v0, worldline.config.v0, rel_tol=1e-12):
        raise ValueError(f"query v0={v0} does not match worldline v0={worldline.config.v0}")

    at_r2 = worldline.crossing(-query.r2)
    if at_r2 is None:
        raise ValueError(f"worldline never reaches x={-query.r2} before turning")

    reports = []
    bound = lemma2_proper_bound(v0, query.K)
    measured = abs(at_r2.A)
    reports.append(BoundReport(BoundKind.LEMMA2_PROPER, bound, measured, measured - bound))
    bound = lemma2_coord_bound(v0, query.K)
    measured = abs(at_r2.A_c)
    reports.append(BoundReport(BoundKind.LEMMA2_COORD, bound, measured, measured - bound))

    coulomb = field.kind is FieldKind.CUTOFF_COULOMB
    if coulomb:
        a = worldline.arrays
        stop = len(a["x"]) if worldline.turn_index is None else worldline.turn_index + 1
        x = a["x"][:stop]
        theta = a["theta"][:stop]
        Ac = np.abs(a["A"][:stop]) / np.cosh(theta) ** 3
        pointwise = (1.0 - v0 * v0) ** 2 / v0 * field.Q2 * (-1.0 / x - 1.0 / field.r0)
        diff = Ac - pointwise
        j = int(np.argmin(diff))
        reports.append(BoundReport(BoundKind.LEMMA3_POINTWISE, float(pointwise[j]), float(Ac[j]), float(diff[j])))

    r_near = -_closest_approach(worldline)
    if query.K > 0 and v0 < contra_threshold(query.K, query.r1, query.r2):
        reports.append(BoundReport(BoundKind.CONTRA_THRESHOLD, query.r1, r_near, r_near - query.r1))
    if coulomb and field.r0 >= theorem2_min_cutoff(v0, query.r1, field.Q2):
        reports.append(BoundReport(BoundKind.THEOREM2_CUTOFF, query.r1, r_near, r_near - query.r1))
    return reports
