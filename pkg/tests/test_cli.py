import csv
import json
import math
import time

import pytest

from ldrunaway.cli import main
from ldrunaway.fields import FieldModel
from ldrunaway.integrator import SimConfig, integrate
from ldrunaway.serialize import WORLDLINE_HEADER, event_records, fmt, to_json, worldline_csv
from ldrunaway.sweep import ROW_HEADER, SweepSpecError, parse_sweep_spec, run_sweep
from ldrunaway.verify import canonical_plan, central_difference, grid_case, run_verification


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_fmt_round_trips():
    for x in (0.1, -1.0 / 3.0, 1e-300, 6.02e23, math.pi):
        assert float(fmt(x)) == x
        assert "e" in fmt(x)
    assert fmt(None) == ""
    assert fmt(3) == "3"


def test_to_json_is_deterministic_and_valid():
    doc = {"b": [1.0, math.nan, None], "a": {"ok": True}}
    text = to_json(doc)
    assert text == to_json(doc)
    assert json.loads(text) == {"b": [1.0, None, None], "a": {"ok": True}}


def test_worldline_csv_columns():
    wl = integrate(SimConfig(FieldModel.cutoff_coulomb(1.0, 10.0), 0.1, post_exit_tau=1.0))
    lines = worldline_csv(wl).splitlines()
    assert lines[0] == ",".join(WORLDLINE_HEADER)
    assert len(lines) == len(wl.samples) + 1
    assert [e["kind"] for e in event_records(wl)][:3] == ["Entry", "Turn", "Exit"]


def test_simulate_writes_outputs(tmp_path, capsys):
    code = main(["simulate", "--q2", "1", "--r0", "10", "--v0", "0.05", "--out", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "outcome=TurnedAndEscaped" in out
    rows = read_csv(tmp_path / "worldline.csv")
    assert float(rows[0]["x"]) == -10.0
    events = json.loads((tmp_path / "events.json").read_text())
    assert events[0]["kind"] == "Entry"
    assert any(e["kind"] == "Turn" for e in events)


def test_simulate_is_byte_deterministic(tmp_path):
    for sub in ("a", "b"):
        assert main(["simulate", "--v0", "0.3", "--r0", "2", "--out", str(tmp_path / sub)]) == 0
    assert (tmp_path / "a/worldline.csv").read_bytes() == (tmp_path / "b/worldline.csv").read_bytes()
    assert (tmp_path / "a/events.json").read_bytes() == (tmp_path / "b/events.json").read_bytes()


@pytest.mark.parametrize("argv", [
    ["simulate", "--v0", "1.5"],
    ["simulate", "--q2", "0"],
    ["simulate", "--r1", "20"],
    ["bounds", "lemma2", "--v0", "0.5", "--k", "-1"],
    ["bounds", "theorem2", "--v0", "1.2", "--r1", "1"],
])
def test_usage_errors_exit_2(argv, tmp_path):
    assert main(argv + (["--out", str(tmp_path)] if argv[0] == "simulate" else [])) == 2


def test_bad_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--nonsense"])
    assert exc.value.code == 2


def test_simulate_zero_profile_reports_horizon(tmp_path, capsys):
    prof = tmp_path / "zero.txt"
    prof.write_text("1.0 0.0\n10.0 0.0\n")
    code = main(["simulate", "--profile", str(prof), "--v0", "0.05", "--tau-max", "5",
                 "--out", str(tmp_path / "o")])
    assert code == 0
    assert "outcome=HorizonCap" in capsys.readouterr().out


def test_bounds_tables(tmp_path, capsys):
    assert main(["bounds", "theorem1", "--q2", "1", "--r0", "2", "--r1", "0.5"]) == 0
    out = capsys.readouterr().out
    v_star = float(out.split()[1])
    assert v_star == pytest.approx(math.sqrt(0.2), rel=1e-12)
    target = tmp_path / "t2.csv"
    assert main(["bounds", "theorem2", "--v0", "0.1", "--r1", "1", "--out", str(target)]) == 0
    rows = read_csv(target)
    assert rows[0]["quantity"] == "r0_min"
    assert float(rows[0]["value"]) == pytest.approx(1.0465675066, rel=1e-9)
    capsys.readouterr()
    assert main(["bounds", "lemma2", "--v0", "0.6", "--k", "0.5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert float(lines[0].split()[1]) == pytest.approx(2.0 / 3.0, rel=1e-15)
    assert float(lines[1].split()[1]) == pytest.approx(0.64**2 * 0.5 / 0.6, rel=1e-15)
    assert main(["bounds", "lemma3", "--v0", "0.5", "--r0", "2", "--x", "-1"]) == 0
    assert "5.6250000000000000e-01" in capsys.readouterr().out


def write_spec(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def test_sweep_rows_in_case_order(tmp_path):
    spec = write_spec(tmp_path / "s.json", {
        "axes": {"v0": [0.05, 0.3], "r0": {"min": 2, "max": 20, "count": 2, "spacing": "log"}},
        "fixed": {"Q2": 1.0, "post_exit_tau": 2.0},
        "output_dir": str(tmp_path / "out"),
    })
    assert main(["sweep", spec]) == 0
    first = (tmp_path / "out/sweep.csv").read_bytes()
    rows = read_csv(tmp_path / "out/sweep.csv")
    assert list(rows[0]) == list(ROW_HEADER)
    assert [(float(r["v0"]), float(r["r0"])) for r in rows] == [
        (0.05, 2.0), (0.05, 20.0), (0.3, 2.0), (0.3, 20.0)]
    assert all(r["outcome"] == "TurnedAndEscaped" for r in rows)
    assert main(["sweep", spec, "--jobs", "2"]) == 0
    assert (tmp_path / "out/sweep.csv").read_bytes() == first


def test_sweep_small_grid_all_turn(tmp_path):
    spec = parse_sweep_spec({"axes": {"v0": [0.01, 0.1], "r0": [5, 50]}, "fixed": {"Q2": 1}}, tmp_path)
    rows = run_sweep(spec)
    assert len(rows) == 4
    assert all(r["outcome"] == "TurnedAndEscaped" for r in rows)
    assert all(r["min_bound_slack"] >= -1e-8 for r in rows)


def test_sweep_zero_profile(tmp_path):
    prof = tmp_path / "zero.txt"
    prof.write_text("1.0 0.0\n10.0 0.0\n")
    spec = parse_sweep_spec({"axes": {"v0": [0.05, 0.1]}, "fixed": {"tau_max": 5.0},
                             "profile": str(prof)}, output_dir=tmp_path)
    rows = run_sweep(spec)
    assert [r["outcome"] for r in rows] == ["HorizonCap", "HorizonCap"]
    assert all(r["r0"] == 10.0 for r in rows)


def test_sweep_records_failed_cases(tmp_path):
    spec = parse_sweep_spec({"axes": {"v0": [0.1, 1.5]}, "fixed": {"Q2": 1.0, "r0": 2.0}}, tmp_path)
    rows = run_sweep(spec)
    assert rows[0]["outcome"] == "TurnedAndEscaped"
    assert rows[1]["outcome"] == "Failed"
    assert "v0" in rows[1]["error"]


@pytest.mark.parametrize("doc", [
    {"axes": {}},
    {"axes": {"v0": []}, "fixed": {"Q2": 1, "r0": 2}},
    {"axes": {"speed": [0.1]}},
    {"axes": {"v0": [0.1]}, "fixed": {"Q2": 1}},
    {"axes": {"v0": [0.1], "Q2": [1]}, "fixed": {"Q2": 1, "r0": 2}},
    {"axes": {"v0": {"min": 0, "max": 1, "count": 3, "spacing": "log"}}, "fixed": {"Q2": 1, "r0": 2}},
    {"axes": {"v0": [0.1]}, "profile": "p.txt", "fixed": {"r0": 2}},
])
def test_bad_sweep_specs(doc):
    with pytest.raises(SweepSpecError):
        parse_sweep_spec(doc)


def test_bad_sweep_spec_exits_2(tmp_path):
    assert main(["sweep", write_spec(tmp_path / "s.json", {"axes": {}})]) == 2
    assert main(["sweep", str(tmp_path / "missing.json")]) == 2


def test_central_difference_is_exact_on_quartics():
    import numpy as np
    t = np.cumsum(np.r_[0.0, np.random.default_rng(1).uniform(0.5, 1.5, 20)])
    v = 3 * t**4 - t**3 + 2 * t
    got = central_difference(t, v)
    exact = 12 * t**3 - 3 * t**2 + 2
    np.testing.assert_allclose(got[2:-2], exact[2:-2], rtol=1e-9)


def test_quick_plan_is_small_and_full_plan_complete():
    assert len(canonical_plan(quick=True)) == 8
    assert len(canonical_plan(quick=False)) == 36 + 10 + 6


def test_negated_field_is_caught():
    # a sign error in the field must show up as verification failures
    flipped = FieldModel.tabulated([(0.5, -2.0), (1.0, -0.5), (2.0, -0.125)])
    record = grid_case(flipped, 0.1)
    assert not record.passed
    assert not record.predicates["acceleration_negative"]
    report = run_verification(quick=True, extra=[(flipped, 0.1)])
    assert report.failures == 1


def test_verify_quick_exit_code(tmp_path, capsys):
    start = time.perf_counter()
    assert main(["verify", "--quick", "--out", str(tmp_path)]) == 0
    assert time.perf_counter() - start < 10.0
    doc = json.loads((tmp_path / "verify.json").read_text())
    assert doc["summary"] == {"cases": 8, "failures": 0}
