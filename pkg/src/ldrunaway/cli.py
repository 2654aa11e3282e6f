"""Command-line entry point: ``ldrunaway simulate|sweep|bounds|verify``.

Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import bounds as B
from .errors import DomainError, IntegrationError
from .fields import FieldModel, validate_theorem1_hypotheses
from .integrator import EventKind, SimConfig, fit_runaway_rate, integrate
from .serialize import event_records, fmt, table_csv, to_json, worldline_csv, write_text
from .sweep import ROW_HEADER, SweepSpecError, any_succeeded, parse_sweep_spec, run_sweep
from .verify import run_verification

log = logging.getLogger("ldrunaway")

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _field_from_args(args) -> FieldModel:
    if getattr(args, "profile", None):
        try:
            return FieldModel.from_file(args.profile, r0=args.r0)
        except (OSError, ValueError) as exc:
            raise UsageError(f"bad profile {args.profile}: {exc}") from None
    q2 = 1.0 if args.q2 is None else args.q2
    r0 = 10.0 if args.r0 is None else args.r0
    try:
        return FieldModel.cutoff_coulomb(q2, r0)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _common_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--q2", type=float, help="Coulomb strength Q^2 (default 1)")
    p.add_argument("--r0", type=float, help="cutoff radius (default 10, or the profile's last knot)")
    p.add_argument("--v0", type=float, default=0.05, help="entry velocity in (0, 1)")
    p.add_argument("--r1", type=float, help="report the x = -r1 crossing")
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--tau-max", type=float, default=50.0)
    p.add_argument("--post-exit-tau", type=float, default=10.0)
    p.add_argument("--profile", help="two-column r/magnitude file for a tabulated field")


def cmd_simulate(args) -> int:
    fm = _field_from_args(args)
    try:
        config = SimConfig(fm, args.v0, rel_tol=args.rel_tol, tau_max=args.tau_max,
                           post_exit_tau=args.post_exit_tau, r1=args.r1)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    check = validate_theorem1_hypotheses(fm)
    if not check:
        log.warning("field fails turn-around hypotheses: %s", check.diagnostic)
    try:
        wl = integrate(config)
    except (IntegrationError, DomainError) as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    out = Path(args.out)
    write_text(out / "worldline.csv", worldline_csv(wl))
    write_text(out / "events.json", to_json(event_records(wl)))

    turn = wl.event(EventKind.TURN)
    try:
        rate = fit_runaway_rate(wl)
    except ValueError:
        rate = math.nan
    x_turn = turn.state.x if turn else math.nan
    v_turn = turn.state.v if turn else math.nan
    print(f"outcome={wl.outcome.value} x_turn={fmt(x_turn)} v_turn={fmt(v_turn)} "
          f"runaway_rate={fmt(rate)}")
    return EXIT_OK


def _print_table(rows: list[tuple[str, float]], out: str | None) -> None:
    width = max(len(name) for name, _ in rows)
    for name, value in rows:
        print(f"{name:<{width}}  {fmt(float(value)):>24}")
    if out:
        write_text(out, table_csv(("quantity", "value"), rows))


def cmd_bounds(args) -> int:
    try:
        if args.which == "theorem1":
            fm = _field_from_args(args)
            if args.r1 is None:
                raise UsageError("theorem1 needs --r1")
            v_star, r2 = B.theorem1_max_velocity(fm, args.r1)
            rows = [("v0_star", v_star), ("r2_star", r2)]
        elif args.which == "theorem2":
            r0 = B.theorem2_min_cutoff(args.v0, args.r1, args.q2)
            rows = [("r0_min", r0), ("guarantee_at_r0_min", B.theorem2_guarantee(args.v0, args.r1, r0, args.q2))]
        elif args.which == "lemma2":
            rows = [("lemma2_proper", B.lemma2_proper_bound(args.v0, args.k)),
                    ("lemma2_coord", B.lemma2_coord_bound(args.v0, args.k))]
        else:
            rows = [("lemma3_pointwise", B.lemma3_pointwise_bound(args.v0, args.r0, args.x, args.q2))]
    except (DomainError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    _print_table(rows, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        doc = json.loads(Path(args.spec).read_text())
        spec = parse_sweep_spec(doc, output_dir=args.out)
    except (OSError, json.JSONDecodeError, SweepSpecError) as exc:
        raise UsageError(f"bad sweep spec: {exc}") from None
    rows = run_sweep(spec, jobs=args.jobs)
    write_text(spec.output_dir / "sweep.csv",
               table_csv(ROW_HEADER, ([row[k] for k in ROW_HEADER] for row in rows)))
    failed = sum(r["outcome"] == "Failed" for r in rows)
    print(f"cases={len(rows)} failed={failed} -> {spec.output_dir / 'sweep.csv'}")
    return EXIT_OK if any_succeeded(rows) else EXIT_NUMERIC


def cmd_verify(args) -> int:
    try:
        report = run_verification(quick=args.quick)
    except IntegrationError as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    path = write_text(Path(args.out) / "verify.json", to_json(report.as_dict()))
    for case in report.cases:
        if not case.passed:
            bad = [k for k, ok in case.predicates.items() if not ok]
            print(f"FAIL {case.label} {case.parameters}: {', '.join(bad)}")
    print(f"cases={len(report.cases)} failures={report.failures} -> {path}")
    return EXIT_OK if report.failures == 0 else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ldrunaway", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one worldline")
    _common_sim_flags(p)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bounds", help="analytic thresholds and bounds")
    bsub = p.add_subparsers(dest="which", required=True)
    b = bsub.add_parser("theorem1", help="largest entry speed with a turn-before-r1 guarantee")
    b.add_argument("--q2", type=float)
    b.add_argument("--r0", type=float)
    b.add_argument("--r1", type=float, required=True)
    b.add_argument("--profile")
    b = bsub.add_parser("theorem2", help="smallest cutoff with a turn-before-r1 guarantee")
    b.add_argument("--v0", type=float, required=True)
    b.add_argument("--r1", type=float, required=True)
    b.add_argument("--q2", type=float, default=1.0)
    b = bsub.add_parser("lemma2", help="acceleration bounds at the checkpoint")
    b.add_argument("--v0", type=float, required=True)
    b.add_argument("--k", type=float, required=True)
    b = bsub.add_parser("lemma3", help="pointwise coordinate-acceleration bound")
    b.add_argument("--v0", type=float, required=True)
    b.add_argument("--r0", type=float, required=True)
    b.add_argument("--x", type=float, required=True)
    b.add_argument("--q2", type=float, default=1.0)
    for b in bsub.choices.values():
        b.add_argument("--out", help="also write a CSV table here")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="run a parameter sweep from a JSON spec")
    p.add_argument("spec")
    p.add_argument("--out", help="override the spec's output_dir")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="check the guarantees on the canonical grid")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--out", default=".", help="output directory for verify.json")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
