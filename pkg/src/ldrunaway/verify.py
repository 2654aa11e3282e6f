"""Runtime predicates for the turn-around and runaway guarantees.

Each case integrates one worldline and evaluates every applicable predicate.
A predicate that raises counts as failed, with the error kept in the record.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import (
    BoundKind,
    BoundQuery,
    check_bounds_on_worldline,
    theorem1_max_velocity,
    theorem2_min_cutoff,
)
from .fields import FieldKind, FieldModel
from .integrator import (
    EventKind,
    Outcome,
    SimConfig,
    Worldline,
    fit_runaway_rate,
    integrate,
    post_exit_ratio,
    volterra_accel_samples,
)

# tolerances, one per checked property
BOUND_TOL = 1e-8
ORACLE_RTOL = 1e-6
RATE_TOL = 1e-6
FD_RTOL = 1e-4
MONOTONE_RTOL = 1e-12

GRID_Q2 = (0.5, 1.0, 2.0)
GRID_R0 = (2.0, 10.0, 100.0)
GRID_V0 = (0.01, 0.1, 0.5, 0.9)
THEOREM2_V0 = (0.05, 0.1, 0.3)
THEOREM2_R1 = (0.5, 1.0)


def central_difference(t: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Five-point centred derivative on a non-uniform grid.

    Weights come from differentiating the quartic through the five nearest
    samples; the two samples at each end get ``nan``.
    """
    n = len(t)
    out = np.full(n, np.nan)
    if n < 5:
        return out
    idx = np.arange(2, n - 2)
    offsets = np.stack([t[idx + j] - t[idx] for j in range(-2, 3)], axis=1)
    scale = np.max(np.abs(offsets), axis=1, keepdims=True)
    s = offsets / scale
    # V[i, p, j] = s_j ** p; solve V w = e_1, then rescale
    V = s[:, None, :] ** np.arange(5)[None, :, None]
    rhs = np.zeros((len(idx), 5))
    rhs[:, 1] = 1.0
    w = np.linalg.solve(V, rhs[..., None])[..., 0] / scale
    vals = np.stack([v[idx + j] for j in range(-2, 3)], axis=1)
    out[idx] = np.sum(w * vals, axis=1)
    return out


def lemma1_residual(worldline: Worldline) -> float:
    """Largest relative gap between finite-difference ``dv/dt`` and ``A / gamma**3``.

    Evaluated on interior samples of the in-field segment.
    """
    a = worldline.arrays
    stop = len(a["tau"]) if worldline.exit_index is None else worldline.exit_index + 1
    t = a["t"][:stop]
    theta = a["theta"][:stop]
    v = np.tanh(theta)
    Ac = a["A"][:stop] / np.cosh(theta) ** 3
    fd = central_difference(t, v)
    mask = np.isfinite(fd) & (Ac != 0)
    if not mask.any():
        return 0.0
    return float(np.max(np.abs(fd[mask] - Ac[mask]) / np.abs(Ac[mask])))


def oracle_residual(worldline: Worldline) -> float:
    """Largest relative gap between integrated ``A`` and its integral-form oracle, in-field."""
    a = worldline.arrays
    stop = len(a["tau"]) if worldline.exit_index is None else worldline.exit_index + 1
    ref = volterra_accel_samples(_truncate(worldline, stop), worldline.config.field)
    A = a["A"][:stop]
    denom = np.maximum(np.abs(ref), 1e-12)
    return float(np.max(np.abs(A - ref)[1:] / denom[1:])) if stop > 1 else 0.0


def _truncate(worldline: Worldline, stop: int) -> Worldline:
    if stop >= len(worldline.samples):
        return worldline
    return Worldline(worldline.samples[:stop], worldline.events, worldline.outcome, worldline.config)


@dataclass
class CaseRecord:
    label: str
    parameters: dict
    outcome: str | None = None
    x_turn: float | None = None
    runaway_rate: float | None = None
    slacks: dict = field(default_factory=dict)
    predicates: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.predicates) and all(self.predicates.values())

    def as_dict(self) -> dict:
        return {
            "label": self.label,
            "parameters": self.parameters,
            "outcome": self.outcome,
            "x_turn": self.x_turn,
            "runaway_rate": self.runaway_rate,
            "slacks": self.slacks,
            "predicates": self.predicates,
            "errors": self.errors,
            "passed": self.passed,
        }


def _check(record: CaseRecord, name: str, fn) -> None:
    try:
        record.predicates[name] = bool(fn())
    except Exception as exc:  # a predicate that cannot be evaluated has failed
        record.predicates[name] = False
        record.errors[name] = f"{type(exc).__name__}: {exc}"


def _field_params(fm: FieldModel) -> dict:
    if fm.kind is FieldKind.CUTOFF_COULOMB:
        return {"field": fm.kind.value, "Q2": fm.Q2, "r0": fm.r0}
    return {"field": fm.kind.value, "r0": fm.r0, "knots": len(fm.profile)}


def grid_case(fm: FieldModel, v0: float, *, label: str = "grid", **config_kw) -> CaseRecord:
    """Full predicate set for one entry speed in one field."""
    record = CaseRecord(label, {**_field_params(fm), "v0": v0})
    wl = integrate(SimConfig(fm, v0, **config_kw))
    a = wl.arrays
    record.outcome = wl.outcome.value
    turn = wl.event(EventKind.TURN)
    record.x_turn = turn.state.x if turn else None
    r0 = fm.r0

    absA = np.abs(a["A"])
    _check(record, "acceleration_negative", lambda: bool(np.all(a["A"][1:] < 0)))
    _check(record, "acceleration_monotone",
           lambda: bool(np.all(absA[1:] >= absA[:-1] * (1 - MONOTONE_RTOL))))
    _check(record, "turns_and_escapes", lambda: (
        wl.outcome is Outcome.TURNED_AND_ESCAPED
        and turn is not None and -r0 < turn.state.x < 0
        and wl.event(EventKind.COLLISION_GUARD) is None))

    def slowing():
        stop = wl.turn_index
        v = np.tanh(a["theta"][: stop + 1])
        return bool(np.all(np.diff(v) < 0))

    _check(record, "decelerates_until_turn", slowing)

    def bounds_ok():
        query = BoundQuery.for_field(fm, v0, -turn.state.x)
        reports = check_bounds_on_worldline(wl, fm, query)
        for rep in reports:
            record.slacks[rep.bound_kind.value] = rep.slack
        wanted = {BoundKind.LEMMA2_PROPER, BoundKind.LEMMA2_COORD}
        if fm.kind is FieldKind.CUTOFF_COULOMB:
            wanted.add(BoundKind.LEMMA3_POINTWISE)
        present = {rep.bound_kind for rep in reports}
        return wanted <= present and all(rep.slack >= -BOUND_TOL for rep in reports)

    _check(record, "bounds_hold", bounds_ok)

    def causal():
        r_turn = -turn.state.x
        r2 = 0.5 * (r0 + r_turn)
        at_r2 = wl.crossing(-r2)
        finite = bool(np.all(np.isfinite(a["theta"])))
        increasing = bool(np.all(np.diff(a["t"]) > 0))
        return finite and increasing and turn.state.t - at_r2.t >= r2 - r_turn

    _check(record, "causal", causal)

    def oracle():
        res = oracle_residual(wl)
        record.slacks["oracle_residual"] = res
        return res <= ORACLE_RTOL

    _check(record, "oracle_agrees", oracle)

    def lemma1():
        res = lemma1_residual(wl)
        record.slacks["lemma1_residual"] = res
        return res <= FD_RTOL

    _check(record, "lemma1_finite_difference", lemma1)

    def runaway():
        rate = fit_runaway_rate(wl)
        record.runaway_rate = rate
        ratio = post_exit_ratio(wl, 1.0)
        record.slacks["post_exit_ratio_error"] = ratio - math.e
        return abs(rate - 1.0) <= RATE_TOL and abs(ratio - math.e) <= RATE_TOL

    _check(record, "runaway_rate", runaway)
    return record


def guarantee_case(fm: FieldModel, v0: float, r1: float, label: str, **config_kw) -> CaseRecord:
    """Check that the electron turns while still farther than ``r1`` from the origin."""
    record = CaseRecord(label, {**_field_params(fm), "v0": v0, "r1": r1})
    wl = integrate(SimConfig(fm, v0, **config_kw))
    record.outcome = wl.outcome.value
    turn = wl.event(EventKind.TURN)
    record.x_turn = turn.state.x if turn else None

    def keeps_distance():
        record.slacks["closest_distance_minus_r1"] = -turn.state.x - r1
        return wl.outcome is Outcome.TURNED_AND_ESCAPED and -turn.state.x > r1

    _check(record, "turns_before_r1", keeps_distance)
    return record


def theorem1_triples(n: int, seed: int = 20240601) -> list[tuple[float, float, float]]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        Q2 = float(rng.uniform(0.25, 4.0))
        r0 = float(10 ** rng.uniform(0.0, 2.0))
        r1 = float(r0 * rng.uniform(0.05, 0.95))
        out.append((Q2, r0, r1))
    return out


def theorem1_case(Q2: float, r0: float, r1: float, fraction: float = 0.9) -> CaseRecord:
    fm = FieldModel.cutoff_coulomb(Q2, r0)
    v_star, r2 = theorem1_max_velocity(fm, r1)
    rec = guarantee_case(fm, fraction * v_star, r1, "theorem1")
    rec.parameters.update({"v0_star": v_star, "r2_star": r2})
    return rec


def theorem2_case(v0: float, r1: float, Q2: float = 1.0) -> CaseRecord:
    r0 = theorem2_min_cutoff(v0, r1, Q2)
    return guarantee_case(FieldModel.cutoff_coulomb(Q2, r0), v0, r1, "theorem2")


@dataclass
class VerifyReport:
    cases: list[CaseRecord]

    @property
    def failures(self) -> int:
        return sum(not c.passed for c in self.cases)

    def as_dict(self) -> dict:
        return {
            "cases": [c.as_dict() for c in self.cases],
            "summary": {"cases": len(self.cases), "failures": self.failures},
        }


def canonical_plan(quick: bool = False) -> list[tuple]:
    """Ordered list of ``(kind, args)`` describing the verification grid."""
    if quick:
        grid = [(1.0, r0, v0) for r0 in (2.0, 10.0) for v0 in (0.1, 0.5)]
        t1 = theorem1_triples(2)
        t2 = [(0.1, 1.0), (0.3, 0.5)]
    else:
        grid = [(q, r0, v0) for q in GRID_Q2 for r0 in GRID_R0 for v0 in GRID_V0]
        t1 = theorem1_triples(10)
        t2 = [(v0, r1) for v0 in THEOREM2_V0 for r1 in THEOREM2_R1]
    plan = [("grid", g) for g in grid]
    plan += [("theorem1", t) for t in t1]
    plan += [("theorem2", t) for t in t2]
    return plan


def run_plan_item(item: tuple) -> CaseRecord:
    kind, args = item
    if kind == "grid":
        Q2, r0, v0 = args
        return grid_case(FieldModel.cutoff_coulomb(Q2, r0), v0)
    if kind == "theorem1":
        return theorem1_case(*args)
    if kind == "theorem2":
        return theorem2_case(*args)
    raise ValueError(f"unknown plan item {kind!r}")


def run_verification(quick: bool = False, extra: list[tuple[FieldModel, float]] = ()) -> VerifyReport:
    """Run the canonical grid plus any extra ``(field, v0)`` grid cases.

    Integration failures propagate as ``IntegrationError``.
    """
    cases = [run_plan_item(item) for item in canonical_plan(quick)]
    cases += [grid_case(fm, v0, label="extra") for fm, v0 in extra]
    return VerifyReport(cases)


__all__ = [
    "central_difference",
    "lemma1_residual",
    "oracle_residual",
    "CaseRecord",
    "VerifyReport",
    "grid_case",
    "guarantee_case",
    "theorem1_case",
    "theorem2_case",
    "theorem1_triples",
    "canonical_plan",
    "run_verification",
]
