"""Cartesian parameter sweeps driven by a JSON document.

Example document::

    {
      "axes": {"v0": [0.01, 0.1], "r0": {"min": 5, "max": 50, "count": 2, "spacing": "log"}},
      "fixed": {"Q2": 1.0},
      "output_dir": "out"
    }

A top-level ``"profile"`` path switches to a tabulated field; ``r0`` then comes
from the profile and ``Q2`` must not be given.  ``fixed`` may also carry the
integration options ``rel_tol``, ``tau_max`` and ``post_exit_tau``.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bounds import BoundQuery, check_bounds_on_worldline
from .errors import IntegrationError
from .fields import FieldModel
from .integrator import EventKind, SimConfig, fit_runaway_rate, integrate

PARAMETERS = ("v0", "r0", "Q2", "r1")
OPTIONS = ("rel_tol", "tau_max", "post_exit_tau")
ROW_HEADER = PARAMETERS + (
    "outcome", "x_turn", "tau_turn", "t_turn", "v_turn", "runaway_rate", "min_bound_slack", "error",
)


class SweepSpecError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    axes: dict[str, tuple[float, ...]]
    fixed: dict[str, float]
    output_dir: Path
    profile: Path | None = None

    @property
    def n_cases(self) -> int:
        return math.prod(len(v) for v in self.axes.values())

    def cases(self) -> list[dict[str, float]]:
        """Cases in lexicographic order of the axes as declared."""
        names = list(self.axes)
        return [
            {**self.fixed, **dict(zip(names, combo))}
            for combo in itertools.product(*(self.axes[n] for n in names))
        ]


def _axis_values(name: str, spec) -> tuple[float, ...]:
    if isinstance(spec, list):
        values = tuple(float(v) for v in spec)
    elif isinstance(spec, dict):
        try:
            lo, hi, count = float(spec["min"]), float(spec["max"]), int(spec["count"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SweepSpecError(f"axis {name!r}: need min, max, count ({exc})") from None
        spacing = spec.get("spacing", "linear")
        if count < 1:
            raise SweepSpecError(f"axis {name!r}: count must be at least 1")
        if spacing == "linear":
            values = tuple(float(v) for v in np.linspace(lo, hi, count))
        elif spacing == "log":
            if lo <= 0 or hi <= 0:
                raise SweepSpecError(f"axis {name!r}: log spacing needs positive bounds")
            values = tuple(float(v) for v in np.geomspace(lo, hi, count))
        else:
            raise SweepSpecError(f"axis {name!r}: unknown spacing {spacing!r}")
    else:
        raise SweepSpecError(f"axis {name!r}: expected a list or a range object")
    if not values:
        raise SweepSpecError(f"axis {name!r} is empty")
    return values


def parse_sweep_spec(doc: dict, output_dir=None) -> SweepSpec:
    if not isinstance(doc, dict):
        raise SweepSpecError("sweep spec must be a JSON object")
    axes_doc = doc.get("axes")
    if not isinstance(axes_doc, dict) or not axes_doc:
        raise SweepSpecError("sweep spec needs a non-empty 'axes' object")
    fixed_doc = doc.get("fixed", {})
    if not isinstance(fixed_doc, dict):
        raise SweepSpecError("'fixed' must be an object")

    axes = {}
    for name, spec in axes_doc.items():
        if name not in PARAMETERS:
            raise SweepSpecError(f"unknown axis {name!r}; expected one of {PARAMETERS}")
        axes[name] = _axis_values(name, spec)
    fixed = {}
    for name, value in fixed_doc.items():
        if name not in PARAMETERS + OPTIONS:
            raise SweepSpecError(f"unknown fixed parameter {name!r}")
        if name in axes:
            raise SweepSpecError(f"parameter {name!r} is both an axis and fixed")
        try:
            fixed[name] = float(value)
        except (TypeError, ValueError):
            raise SweepSpecError(f"fixed parameter {name!r} must be a number") from None

    given = set(axes) | set(fixed)
    profile = doc.get("profile")
    if profile is not None:
        if given & {"Q2", "r0"}:
            raise SweepSpecError("a tabulated profile fixes r0; do not give Q2 or r0")
        required = {"v0"}
    else:
        required = {"v0", "r0", "Q2"}
    missing = required - given
    if missing:
        raise SweepSpecError(f"missing parameters: {sorted(missing)}")

    out = output_dir if output_dir is not None else doc.get("output_dir", ".")
    return SweepSpec(axes, fixed, Path(out), Path(profile) if profile is not None else None)


def run_case(params: dict, profile: Path | None = None) -> dict:
    """One sweep row.  Failures are recorded in the row, never raised."""
    row = {name: params.get(name) for name in PARAMETERS}
    row.update({k: None for k in ROW_HEADER if k not in row})
    try:
        if profile is not None:
            fm = FieldModel.from_file(profile)
            row["r0"] = fm.r0
        else:
            fm = FieldModel.cutoff_coulomb(params["Q2"], params["r0"])
        opts = {k: params[k] for k in OPTIONS if k in params}
        r1 = params.get("r1")
        wl = integrate(SimConfig(fm, params["v0"], r1=r1, **opts))
    except (IntegrationError, ValueError) as exc:
        row["outcome"] = "Failed"
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    row["outcome"] = wl.outcome.value
    turn = wl.event(EventKind.TURN)
    if turn is not None:
        s = turn.state
        row.update(x_turn=s.x, tau_turn=s.tau, t_turn=s.t, v_turn=s.v)
    try:
        row["runaway_rate"] = fit_runaway_rate(wl)
    except ValueError:
        pass
    try:
        r_check = r1 if r1 is not None else (-turn.state.x if turn is not None else None)
        if r_check is not None:
            query = BoundQuery.for_field(fm, params["v0"], r_check)
            reports = check_bounds_on_worldline(wl, fm, query)
            row["min_bound_slack"] = min(r.slack for r in reports)
    except ValueError:
        pass
    return row


def _run_star(args):
    return run_case(*args)


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[dict]:
    """Run every case; rows come back in case order whatever ``jobs`` is."""
    work = [(case, spec.profile) for case in spec.cases()]
    if jobs <= 1:
        return [run_case(*w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_star, work))


def any_succeeded(rows: list[dict]) -> bool:
    return any(r["outcome"] != "Failed" for r in rows)
