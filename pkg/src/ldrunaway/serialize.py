"""CSV/JSON writers with byte-stable float formatting.

Floats are written with 17 significant digits in scientific notation, which
round-trips every IEEE double and keeps repeated runs byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
from enum import Enum
from pathlib import Path
from typing import Iterable

from .bounds import BoundReport
from .fields import scalar_field
from .integrator import Worldline

WORLDLINE_HEADER = ("tau", "t", "x", "v", "theta", "A", "Ac", "Ebar")
BOUND_HEADER = ("bound_kind", "analytic", "measured", "slack")


def fmt(value) -> str:
    """Deterministic text for one CSV/JSON scalar."""
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.16e}"
    return str(value)


def _csv_text(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def worldline_rows(worldline: Worldline):
    fm = worldline.config.field
    for s in worldline.samples:
        ebar = scalar_field(fm, s.x) if s.x < 0 else math.nan
        yield (s.tau, s.t, s.x, s.v, s.theta, s.A, s.A_c, ebar)


def worldline_csv(worldline: Worldline) -> str:
    return _csv_text(WORLDLINE_HEADER, worldline_rows(worldline))


def event_records(worldline: Worldline) -> list[dict]:
    return [
        {"kind": ev.kind.value, "tau": ev.state.tau, "t": ev.state.t,
         "x": ev.state.x, "v": ev.state.v, "A": ev.state.A}
        for ev in worldline.events
    ]


def bound_reports_csv(reports: Iterable[BoundReport]) -> str:
    return _csv_text(
        BOUND_HEADER,
        ((r.bound_kind, r.analytic_value, r.measured_value, r.slack) for r in reports),
    )


def table_csv(header: Iterable[str], rows: Iterable[Iterable]) -> str:
    return _csv_text(header, rows)


def to_json(obj, indent: int = 2) -> str:
    """JSON text with floats in the fixed 17-digit format; non-finite become null."""
    return _encode(obj, indent, 0) + "\n"


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, Enum):
        obj = obj.value
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{_encode(str(k), indent, level + 1)}: {_encode(v, indent, level + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + _encode(v, indent, level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path
