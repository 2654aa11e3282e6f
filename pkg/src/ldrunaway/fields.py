"""Radial field profiles and the normalized scalar field seen by the electron.

Units: electron charge -1, mass 2/3, c = 1.  In these units the scalar field
that enters the equation of motion is ``Ebar = 1.5 * E`` where ``E`` is the
scalar (signed) electric field along the x-axis.  For a radially outward field
and ``x < 0`` both are non-positive.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "FieldKind",
    "FieldModel",
    "Normalization",
    "NORMALIZATION",
    "HypothesisCheck",
    "scalar_field_raw",
    "scalar_field",
    "interior_scalar_field",
    "field_impulse",
    "validate_theorem1_hypotheses",
    "load_profile",
]


@dataclass(frozen=True)
class Normalization:
    """Fixed unit system.  Not configurable."""

    electron_charge: float = -1.0
    electron_mass: float = 2.0 / 3.0
    light_speed: float = 1.0

    @property
    def field_scale(self) -> float:
        # Ebar / E = -q / m with q = -1, m = 2/3
        return -self.electron_charge / self.electron_mass


NORMALIZATION = Normalization()
_SCALE = NORMALIZATION.field_scale  # 1.5


class FieldKind(str, Enum):
    CUTOFF_COULOMB = "CutoffCoulomb"
    TABULATED = "Tabulated"


@dataclass(frozen=True)
class FieldModel:
    """Radial magnitude profile ``|E(r)|`` that vanishes for ``r > r0``.

    Build instances with :meth:`cutoff_coulomb` or :meth:`tabulated`.
    Tabulated knots are linearly interpolated, held constant below the first
    knot and set to zero beyond ``r0``.
    """

    kind: FieldKind
    r0: float
    Q2: float | None = None
    profile: tuple[tuple[float, float], ...] = ()
    _rs: tuple[float, ...] = field(default=(), init=False, repr=False, compare=False)
    _ms: tuple[float, ...] = field(default=(), init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.r0) and self.r0 > 0):
            raise ValueError(f"r0 must be positive, got {self.r0}")
        if self.kind is FieldKind.CUTOFF_COULOMB:
            if self.Q2 is None or not (math.isfinite(self.Q2) and self.Q2 > 0):
                raise ValueError(f"Q2 must be positive, got {self.Q2}")
        elif self.kind is FieldKind.TABULATED:
            if not self.profile:
                raise ValueError("tabulated profile needs at least one knot")
            rs = tuple(float(r) for r, _ in self.profile)
            ms = tuple(float(m) for _, m in self.profile)
            if any(r <= 0 or r > self.r0 for r in rs):
                raise ValueError("profile radii must lie in (0, r0]")
            if any(b <= a for a, b in zip(rs, rs[1:])):
                raise ValueError("profile radii must be strictly ascending")
            if not all(math.isfinite(m) for m in ms):
                raise ValueError("profile magnitudes must be finite")
            object.__setattr__(self, "_rs", rs)
            object.__setattr__(self, "_ms", ms)
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")

    @classmethod
    def cutoff_coulomb(cls, Q2: float, r0: float) -> "FieldModel":
        return cls(FieldKind.CUTOFF_COULOMB, float(r0), Q2=float(Q2))

    @classmethod
    def tabulated(
        cls, knots: Sequence[tuple[float, float]], r0: float | None = None
    ) -> "FieldModel":
        knots = tuple((float(r), float(m)) for r, m in knots)
        if r0 is None:
            if not knots:
                raise ValueError("tabulated profile needs at least one knot")
            r0 = knots[-1][0]
        return cls(FieldKind.TABULATED, float(r0), profile=knots)

    @classmethod
    def from_file(cls, path, r0: float | None = None) -> "FieldModel":
        return cls.tabulated(load_profile(path), r0=r0)

    # -- magnitude ---------------------------------------------------------

    def _interior_magnitude(self, r: float) -> float:
        if self.kind is FieldKind.CUTOFF_COULOMB:
            return (2.0 / 3.0) * self.Q2 / (r * r)
        rs, ms = self._rs, self._ms
        if r <= rs[0]:
            return ms[0]
        if r >= rs[-1]:
            return ms[-1]
        i = bisect.bisect_right(rs, r)
        r_lo, r_hi = rs[i - 1], rs[i]
        w = (r - r_lo) / (r_hi - r_lo)
        return ms[i - 1] + w * (ms[i] - ms[i - 1])

    def magnitude(self, r: float) -> float:
        """``|E(r)|``; zero beyond the cutoff."""
        if r > self.r0:
            return 0.0
        return self._interior_magnitude(r)

    def magnitude_array(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.kind is FieldKind.CUTOFF_COULOMB:
            with np.errstate(divide="ignore", over="ignore"):
                out = (2.0 / 3.0) * self.Q2 / (r * r)
        else:
            out = np.interp(r, self._rs, self._ms)
        return np.where(r > self.r0, 0.0, out)


def load_profile(path) -> list[tuple[float, float]]:
    """Read ``r magnitude`` pairs from a whitespace-separated text file.

    Lines starting with ``#`` are comments.  Radii must be ascending.
    """
    knots = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected two columns, got {len(parts)}")
        knots.append((float(parts[0]), float(parts[1])))
    if not knots:
        raise ValueError(f"{path}: no data rows")
    return knots


def _check_x(x: float) -> None:
    if not x < 0:
        raise DomainError(f"field is only defined on the negative axis, got x={x}")


def scalar_field_raw(model: FieldModel, x: float) -> float:
    """Signed scalar field ``E(x)`` for ``x < 0``.

    Outward fields point toward negative x on the negative axis, hence the sign.
    """
    _check_x(x)
    if model.kind is FieldKind.CUTOFF_COULOMB and x <= -model.r0:
        return 0.0
    return -model.magnitude(-x)


def scalar_field(model: FieldModel, x: float) -> float:
    """Normalized field ``Ebar(x) = 1.5 * E(x)``."""
    return _SCALE * scalar_field_raw(model, x)


def scalar_field_array(model: FieldModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x >= 0):
        raise DomainError("field is only defined on the negative axis")
    r = -x
    out = -_SCALE * model.magnitude_array(r)
    if model.kind is FieldKind.CUTOFF_COULOMB:
        out = np.where(r >= model.r0, 0.0, out)
    return out


def interior_scalar_field(model: FieldModel, x: float) -> float:
    """``Ebar`` continued smoothly past the cutoff.

    Used while the electron is inside the field so that no integration step
    sees the jump at ``x = -r0``.
    """
    _check_x(x)
    return -_SCALE * model._interior_magnitude(-x)


def _tabulated_integral(model: FieldModel, r_lo: float, r_hi: float) -> float:
    # exact integral of the piecewise-linear interpolant
    pts = [r_lo] + [r for r in model._rs if r_lo < r < r_hi] + [r_hi]
    vals = [model._interior_magnitude(r) for r in pts]
    return math.fsum(0.5 * (pts[i + 1] - pts[i]) * (vals[i] + vals[i + 1]) for i in range(len(pts) - 1))


def field_impulse(model: FieldModel, a: float, b: float) -> float:
    """Integral of ``|Ebar|`` over ``[a, b]`` with ``-r0 <= a <= b < 0``."""
    if not b < 0:
        raise DomainError(f"upper limit must be negative, got b={b}")
    if a < -model.r0 * (1 + 1e-12):
        raise DomainError(f"lower limit {a} lies beyond the cutoff -r0={-model.r0}")
    if a > b:
        raise DomainError(f"empty interval requires a <= b, got a={a}, b={b}")
    if a == b:
        return 0.0
    a = max(a, -model.r0)
    if model.kind is FieldKind.CUTOFF_COULOMB:
        return model.Q2 * (1.0 / -b - 1.0 / -a)
    return _SCALE * _tabulated_integral(model, -b, -a)


class HypothesisCheck(NamedTuple):
    ok: bool
    diagnostic: str

    def __bool__(self) -> bool:
        return self.ok


def validate_theorem1_hypotheses(model: FieldModel) -> HypothesisCheck:
    """Check the turn-around hypotheses: outward field, non-zero at the edge.

    The edge condition is probed on the ladder ``eps = r0 * 2**-k`` for
    ``k = 1..20``.
    """
    if model.kind is FieldKind.TABULATED:
        for r, m in model.profile:
            if m < 0:
                return HypothesisCheck(False, f"negative magnitude {m} at r={r} (inward field)")
    for k in range(1, 21):
        eps = model.r0 * 2.0**-k
        k_bar = field_impulse(model, -model.r0, -model.r0 + eps)
        if not k_bar > 0:
            return HypothesisCheck(
                False, f"field impulse over (r0-eps, r0) is {k_bar} for eps=r0*2^-{k}"
            )
    return HypothesisCheck(True, "ok")
