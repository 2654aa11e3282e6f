"""Forward integration of the radial Lorentz-Dirac equation.

With charge -1 and mass 2/3 the equation of motion reduces to a scalar
equation for the proper acceleration ``A = dtheta/dtau``::

    dA/dtau = A + Ebar(x)

together with ``dt/dtau = cosh(theta)`` and ``dx/dtau = sinh(theta)``.  Note the
sign: the term is ``+Ebar``, which makes ``A`` negative (repulsive) as soon as
the electron is inside an outward field.  Writing ``+1.5 E`` in place of
``-1.5 E`` in the reduced equation flips every conclusion drawn below.

The state starts at ``x = -r0`` with ``A = 0`` (no preacceleration).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, IntegrationError
from .fields import (
    FieldModel,
    interior_scalar_field,
    scalar_field,
    scalar_field_array,
    validate_theorem1_hypotheses,
)
from .kinematics import coord_accel_from_rapidity, rapidity_from_velocity

__all__ = [
    "EventKind",
    "Outcome",
    "SimState",
    "Event",
    "SimConfig",
    "Worldline",
    "derivative",
    "integrate",
    "volterra_accel",
    "volterra_accel_samples",
    "fit_runaway_rate",
    "post_exit_ratio",
]


class EventKind(str, Enum):
    ENTRY = "Entry"
    TURN = "Turn"
    REACH_R1 = "ReachR1"
    EXIT = "Exit"
    COLLISION_GUARD = "CollisionGuard"
    RUNAWAY_CAP = "RunawayCap"
    HORIZON_CAP = "HorizonCap"


class Outcome(str, Enum):
    TURNED_AND_ESCAPED = "TurnedAndEscaped"
    COLLISION_GUARD = "CollisionGuard"
    HORIZON_CAP = "HorizonCap"


@dataclass(frozen=True)
class SimState:
    tau: float
    t: float
    x: float
    theta: float
    A: float

    @property
    def v(self) -> float:
        return math.tanh(self.theta)

    @property
    def gamma(self) -> float:
        return math.cosh(self.theta)

    @property
    def A_c(self) -> float:
        return coord_accel_from_rapidity(self.A, self.theta)


@dataclass(frozen=True)
class Event:
    kind: EventKind
    state: SimState


@dataclass(frozen=True)
class SimConfig:
    """Initial data, tolerances and stopping rules for one run.

    Only ``v0`` is free in the initial data: the run always starts at
    ``tau = t = 0``, ``x = -r0``, ``A = 0``.  ``r1`` enables the ReachR1 event.
    ``theta_max`` caps the rapidity after exit, where ``cosh(theta)`` would
    otherwise overflow long before ``|A|`` reaches ``A_max``.
    """

    field: FieldModel
    v0: float
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    tau_max: float = 50.0
    A_max: float = 1e12
    collision_eps: float = 1e-6
    post_exit_tau: float = 10.0
    r1: float | None = None
    max_step: float = 0.05
    theta_max: float = 500.0

    def __post_init__(self):
        if not 0.0 < self.v0 < 1.0:
            raise ValueError(f"v0 must lie in (0, 1), got {self.v0}")
        for name in ("rel_tol", "abs_tol", "tau_max", "A_max", "collision_eps",
                     "post_exit_tau", "max_step", "theta_max"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ValueError(f"{name} must be positive, got {val}")
        if self.collision_eps >= 1:
            raise ValueError("collision_eps must be below 1")
        if self.r1 is not None and not 0 < self.r1 < self.field.r0:
            raise ValueError(f"r1 must lie in (0, r0), got {self.r1}")

    @property
    def initial_state(self) -> SimState:
        return SimState(0.0, 0.0, -self.field.r0, rapidity_from_velocity(self.v0), 0.0)


@dataclass(frozen=True)
class Worldline:
    samples: tuple[SimState, ...]
    events: tuple[Event, ...]
    outcome: Outcome
    config: SimConfig

    def event(self, kind: EventKind) -> Event | None:
        for ev in self.events:
            if ev.kind is kind:
                return ev
        return None

    @cached_property
    def arrays(self) -> dict[str, np.ndarray]:
        cols = np.array([(s.tau, s.t, s.x, s.theta, s.A) for s in self.samples])
        return {name: cols[:, i].copy() for i, name in enumerate(("tau", "t", "x", "theta", "A"))}

    @property
    def tau_exit(self) -> float:
        ev = self.event(EventKind.EXIT)
        return math.inf if ev is None else ev.state.tau

    @property
    def tau_turn(self) -> float:
        ev = self.event(EventKind.TURN)
        return math.inf if ev is None else ev.state.tau

    @cached_property
    def exit_index(self) -> int | None:
        ev = self.event(EventKind.EXIT)
        if ev is None:
            return None
        return int(np.searchsorted(self.arrays["tau"], ev.state.tau))

    @cached_property
    def turn_index(self) -> int | None:
        ev = self.event(EventKind.TURN)
        if ev is None:
            return None
        return int(np.searchsorted(self.arrays["tau"], ev.state.tau))

    def _interval(self, tau: float) -> int:
        taus = self.arrays["tau"]
        if not taus[0] <= tau <= taus[-1]:
            raise ValueError(f"tau={tau} outside sampled range [{taus[0]}, {taus[-1]}]")
        return int(min(max(np.searchsorted(taus, tau, side="right") - 1, 0), len(taus) - 2))

    def _A_rate(self, k: int, end: int) -> float:
        # the interval (k, k+1) is in-field iff it ends at or before the exit
        s = self.samples[end]
        if self.samples[k + 1].tau <= self.tau_exit:
            return s.A + interior_scalar_field(self.config.field, s.x)
        return s.A

    def state_at(self, tau: float) -> SimState:
        """Hermite interpolation between the bracketing samples.

        Position uses a quintic (value, velocity, acceleration are all known);
        the other components use cubics with exact end slopes.
        """
        k = self._interval(tau)
        s0, s1 = self.samples[k], self.samples[k + 1]
        h = s1.tau - s0.tau
        u = (tau - s0.tau) / h
        x = _quintic(u, h, s0.x, math.sinh(s0.theta), s0.A * math.cosh(s0.theta),
                     s1.x, math.sinh(s1.theta), s1.A * math.cosh(s1.theta))
        t = _cubic(u, h, s0.t, math.cosh(s0.theta), s1.t, math.cosh(s1.theta))
        theta = _cubic(u, h, s0.theta, s0.A, s1.theta, s1.A)
        A = _cubic(u, h, s0.A, self._A_rate(k, k), s1.A, self._A_rate(k, k + 1))
        return SimState(tau, t, x, theta, A)

    def crossing(self, level: float) -> SimState | None:
        """State at the first rightward crossing of ``x = level`` before turning."""
        xs = self.arrays["x"]
        stop = len(xs) if self.turn_index is None else self.turn_index + 1
        for k in range(stop - 1):
            if xs[k] < level <= xs[k + 1]:
                if xs[k + 1] == level:
                    return self.samples[k + 1]
                tau = brentq(lambda s: self.state_at(s).x - level,
                             self.samples[k].tau, self.samples[k + 1].tau, xtol=1e-15)
                return self.state_at(tau)
        return None


def _cubic(u, h, p0, d0, p1, d1):
    u2, u3 = u * u, u * u * u
    return ((2 * u3 - 3 * u2 + 1) * p0 + (u3 - 2 * u2 + u) * h * d0
            + (-2 * u3 + 3 * u2) * p1 + (u3 - u2) * h * d1)


def _quintic(u, h, p0, d0, a0, p1, d1, a1):
    u2 = u * u
    u3 = u2 * u
    u4 = u3 * u
    u5 = u4 * u
    return ((1 - 10 * u3 + 15 * u4 - 6 * u5) * p0
            + (u - 6 * u3 + 8 * u4 - 3 * u5) * h * d0
            + 0.5 * (u2 - 3 * u3 + 3 * u4 - u5) * h * h * a0
            + (10 * u3 - 15 * u4 + 6 * u5) * p1
            + (-4 * u3 + 7 * u4 - 3 * u5) * h * d1
            + 0.5 * (u3 - 2 * u4 + u5) * h * h * a1)


def derivative(state: SimState, field: FieldModel) -> tuple[float, float, float, float]:
    """Rates ``(dt, dx, dtheta, dA)`` per unit proper time."""
    ebar = scalar_field(field, state.x)
    return (math.cosh(state.theta), math.sinh(state.theta), state.A, state.A + ebar)


# -- Dormand-Prince 5(4) -----------------------------------------------------

_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84)
_E = (-71 / 57600, 0.0, 71 / 16695, -71 / 1920, 17253 / 339200, -22 / 525, 1 / 40)

Rates = Callable[[list], list]


def _make_rhs(ebar: Callable[[float], float]) -> Rates:
    cosh, sinh = math.cosh, math.sinh

    def rhs(y):
        return [cosh(y[2]), sinh(y[2]), y[3], y[3] + ebar(y[1])]

    return rhs


def _dp_step(rhs: Rates, y: list, h: float, k1: list):
    ks = [k1]
    n = len(y)
    for i in range(1, 6):
        a = _A[i]
        yi = [y[j] + h * sum(a[m] * ks[m][j] for m in range(i)) for j in range(n)]
        ks.append(rhs(yi))
    y_new = [y[j] + h * sum(_B[m] * ks[m][j] for m in range(6)) for j in range(n)]
    k7 = rhs(y_new)
    ks.append(k7)
    err = [h * sum(_E[m] * ks[m][j] for m in range(7)) for j in range(n)]
    return y_new, err, k7


def _err_norm(y, y_new, err, rtol, atol) -> float:
    total = 0.0
    for a, b, e in zip(y, y_new, err):
        scale = atol + rtol * max(abs(a), abs(b))
        total += (e / scale) ** 2
    return math.sqrt(total / len(y))


@dataclass
class _EventSpec:
    kind: EventKind
    g: Callable[[list], float]
    direction: int  # +1: g goes from negative to >= 0; -1: positive to <= 0

    def crossed(self, y0, y1) -> bool:
        g0, g1 = self.g(y0), self.g(y1)
        if self.direction > 0:
            return g0 < 0 <= g1
        return g0 > 0 >= g1


def integrate(config: SimConfig, *, strict: bool = False) -> Worldline:
    """Integrate one worldline from field entry.

    Every accepted step is stored as a sample.  Events are located by sign
    change over a step and refined by re-stepping from the step start to the
    root, so event states carry full Runge-Kutta accuracy; integration
    restarts from each event state.  With ``strict=True`` a field failing the
    turn-around hypotheses is rejected up front.
    """
    fm = config.field
    if strict:
        check = validate_theorem1_hypotheses(fm)
        if not check:
            raise ValueError(f"field fails hypotheses: {check.diagnostic}")

    rtol, atol = config.rel_tol, config.abs_tol
    r0 = fm.r0
    s0 = config.initial_state
    samples = [s0]
    events = [Event(EventKind.ENTRY, s0)]

    inside_rhs = _make_rhs(lambda x: interior_scalar_field(fm, x))
    vacuum_rhs = _make_rhs(lambda x: 0.0)
    rhs = inside_rhs

    tau = 0.0
    y = [s0.t, s0.x, s0.theta, s0.A]
    k1 = rhs(y)
    h = min(1e-3, config.max_step)
    tau_end = config.tau_max
    turned = reached = exited = False
    stop_kind: EventKind | None = None

    def active_events() -> list[_EventSpec]:
        evs = []
        if not exited:
            if not turned:
                evs.append(_EventSpec(EventKind.TURN, lambda y: y[2], -1))
                if config.r1 is not None and not reached:
                    evs.append(_EventSpec(EventKind.REACH_R1, lambda y: y[1] + config.r1, +1))
            else:
                evs.append(_EventSpec(EventKind.EXIT, lambda y: y[1] + r0, -1))
            evs.append(_EventSpec(EventKind.COLLISION_GUARD,
                                  lambda y: y[1] + config.collision_eps * r0, +1))
        evs.append(_EventSpec(EventKind.RUNAWAY_CAP, lambda y: abs(y[3]) - config.A_max, +1))
        evs.append(_EventSpec(EventKind.RUNAWAY_CAP, lambda y: abs(y[2]) - config.theta_max, +1))
        return evs

    def state(tau_, y_) -> SimState:
        return SimState(tau_, y_[0], y_[1], y_[2], y_[3])

    while True:
        remaining = tau_end - tau
        if remaining <= 1e-13 * max(1.0, tau_end):
            if tau_end == config.tau_max:
                stop_kind = EventKind.HORIZON_CAP
            break
        # in-field: keep samples fine enough to resolve dv/dt once |A| grows
        h_cap = config.max_step if exited else config.max_step / (1.0 + 3.0 * abs(y[3]))
        h = min(h, h_cap, remaining)
        if h < 1e-13 * max(1.0, abs(tau)):
            raise IntegrationError(f"step size underflow at tau={tau}", state(tau, y))
        try:
            y_new, err, k_new = _dp_step(rhs, y, h, k1)
            norm = _err_norm(y, y_new, err, rtol, atol)
        except (DomainError, OverflowError):
            h *= 0.25
            continue
        if not math.isfinite(norm) or norm > 1.0:
            fac = 0.2 if not math.isfinite(norm) else max(0.2, 0.9 * norm ** -0.2)
            h *= fac
            continue

        hits = []
        for spec in active_events():
            if spec.crossed(y, y_new):
                hits.append((_refine(rhs, y, h, k1, spec.g), spec.kind))
        if hits:
            h_ev, kind = min(hits, key=lambda p: p[0])
            y_ev, _, _ = _dp_step(rhs, y, h_ev, k1)
            tau += h_ev
            y = y_ev
            st = state(tau, y)
            samples.append(st)
            events.append(Event(kind, st))
            if kind is EventKind.TURN:
                turned = True
            elif kind is EventKind.REACH_R1:
                reached = True
            elif kind is EventKind.EXIT:
                exited = True
                rhs = vacuum_rhs
                tau_end = min(config.tau_max, tau + config.post_exit_tau)
            else:
                stop_kind = kind
                break
            k1 = rhs(y)
            continue

        tau += h
        y = y_new
        k1 = k_new
        samples.append(state(tau, y))
        h *= min(10.0, 0.9 * norm ** -0.2) if norm > 0 else 10.0

    if stop_kind is EventKind.HORIZON_CAP:
        events.append(Event(EventKind.HORIZON_CAP, samples[-1]))
    if exited:
        outcome = Outcome.TURNED_AND_ESCAPED
    elif stop_kind is EventKind.COLLISION_GUARD:
        outcome = Outcome.COLLISION_GUARD
    else:
        outcome = Outcome.HORIZON_CAP
    return Worldline(tuple(samples), tuple(events), outcome, config)


def _refine(rhs, y, h, k1, g) -> float:
    """Sub-step length at which the event function ``g`` vanishes."""

    def g_of(s):
        if s == 0.0:
            return g(y)
        return g(_dp_step(rhs, y, s, k1)[0])

    return brentq(g_of, 0.0, h, xtol=1e-16, rtol=8.9e-16, maxiter=200)


# -- verification oracles -----------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(10)


def _position_nodes(wl: Worldline, lo: np.ndarray, hi: np.ndarray, k: np.ndarray):
    """Quintic-Hermite positions at Gauss nodes of each ``[lo, hi]`` inside interval ``k``."""
    a = wl.arrays
    tau0, tau1 = a["tau"][k], a["tau"][k + 1]
    h = tau1 - tau0
    s = 0.5 * (hi - lo)[:, None] * (_GL_NODES[None, :] + 1.0) + lo[:, None]
    u = (s - tau0[:, None]) / h[:, None]
    th0, th1 = a["theta"][k], a["theta"][k + 1]
    x = _quintic(u, h[:, None],
                 a["x"][k][:, None], np.sinh(th0)[:, None], (a["A"][k] * np.cosh(th0))[:, None],
                 a["x"][k + 1][:, None], np.sinh(th1)[:, None], (a["A"][k + 1] * np.cosh(th1))[:, None])
    return s, x


def _discounted_integral(wl: Worldline, fm: FieldModel, lo, hi, k) -> np.ndarray:
    # integral of exp(-s) * Ebar(x(s)) over [lo, hi], one value per row
    s, x = _position_nodes(wl, lo, hi, k)
    vals = np.exp(-s) * scalar_field_array(fm, x)
    return 0.5 * (hi - lo) * (vals @ _GL_WEIGHTS)


def volterra_accel_samples(worldline: Worldline, field: FieldModel) -> np.ndarray:
    """Integral-form acceleration at every sample.

    ``A(tau) = exp(tau) * int_0^tau exp(-s) Ebar(x(s)) ds`` with ``x`` taken from
    the stored worldline (quintic Hermite between samples).  It shares no
    code path with the step-by-step solution of the rate equation for ``A``.
    """
    taus = worldline.arrays["tau"]
    k = np.arange(len(taus) - 1)
    pieces = _discounted_integral(worldline, field, taus[:-1], taus[1:], k)
    cumulative = np.concatenate(([0.0], np.cumsum(pieces)))
    return np.exp(taus) * cumulative


def volterra_accel(worldline: Worldline, field: FieldModel, tau: float) -> float:
    taus = worldline.arrays["tau"]
    if not taus[0] <= tau <= taus[-1]:
        raise ValueError(f"tau={tau} outside sampled range [{taus[0]}, {taus[-1]}]")
    if tau == 0.0:
        return 0.0
    k_last = worldline._interval(tau)
    k = np.arange(k_last + 1)
    lo = taus[k]
    hi = np.append(taus[1:k_last + 1], tau)
    return float(math.exp(tau) * math.fsum(_discounted_integral(worldline, field, lo, hi, k)))


def fit_runaway_rate(worldline: Worldline) -> float:
    """Least-squares slope of ``ln|A|`` against proper time after exit."""
    i = worldline.exit_index
    if i is None:
        raise ValueError("worldline has no Exit event")
    a = worldline.arrays
    tau, A = a["tau"][i:], a["A"][i:]
    if len(tau) < 11:
        raise ValueError(f"need at least 10 post-exit samples, have {len(tau) - 1}")
    slope, _ = np.polyfit(tau, np.log(np.abs(A)), 1)
    return float(slope)


def post_exit_ratio(worldline: Worldline, delta: float = 1.0) -> float:
    """``A(tau_exit + delta) / A(tau_exit)``; equals ``exp(delta)`` in vacuum."""
    ev = worldline.event(EventKind.EXIT)
    if ev is None:
        raise ValueError("worldline has no Exit event")
    return worldline.state_at(ev.state.tau + delta).A / ev.state.A
