"""Tabular results and their CSV / JSON serialisation.

Output is deterministic: fixed column order, ``%.6e`` floats, rows sorted by
state, distance, temperature and provenance. Run timestamps are kept out of
the data payload and written only to a sidecar file.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone

COLUMNS = ("state", "distance_m", "temperature_K", "u_nonres_J", "u_res_J",
           "u_total_J", "force_N", "n_atoms", "flag")

_FLAG_ORDER = {"computed": 0, "scaling-law": 1, "reference": 2}


@dataclass(frozen=True)
class ReportRow:
    state: str
    distance_m: float
    temperature_K: float
    u_nonres_J: float | None = None
    u_res_J: float | None = None
    u_total_J: float | None = None
    force_N: float | None = None
    n_atoms: int | None = None
    flag: str = "computed"

    def sort_key(self):
        m = re.match(r"\s*(\d+)", self.state)
        n = int(m.group(1)) if m else 0
        source = self.flag.split(";")[0]
        return (n, self.state, self.distance_m, self.temperature_K, _FLAG_ORDER.get(source, 9), self.flag)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return "nan" if math.isnan(value) else "%.6e" % value
    return str(value)


def _jsonable(value):
    if isinstance(value, float):
        return None if not math.isfinite(value) else float("%.6e" % value)
    return value


@dataclass
class ScenarioReport:
    rows: list[ReportRow]
    meta: dict = field(default_factory=dict)
    created: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    def sorted(self) -> "ScenarioReport":
        return ScenarioReport(sorted(self.rows, key=ReportRow.sort_key), dict(self.meta), self.created)

    def select(self, flag: str) -> list[ReportRow]:
        return [r for r in self.rows if r.flag.split(";")[0] == flag]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in self.rows:
            writer.writerow([_fmt(getattr(row, c)) for c in COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        payload = {
            "meta": self.meta,
            "rows": [{c: _jsonable(getattr(r, c)) for c in COLUMNS} for r in self.rows],
        }
        return json.dumps(payload, indent=2, sort_keys=False) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}")

    def sidecar(self) -> str:
        """Run metadata including the timestamp, for ``<output>.meta.json``."""
        return json.dumps({"created": self.created, **self.meta}, indent=2) + "\n"


QUANTITY_COLUMNS = ("quantity", "value", "unit")


@dataclass
class QuantityReport:
    """Named scalar results, for outputs that are not per-state rows."""

    rows: list[tuple[str, object, str]]
    meta: dict = field(default_factory=dict)
    created: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec="seconds"))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(QUANTITY_COLUMNS)
        for name, value, unit in self.rows:
            writer.writerow([name, _fmt(value), unit])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [dict(zip(QUANTITY_COLUMNS, (n, _jsonable(v), u))) for n, v, u in self.rows]
        return json.dumps({"meta": self.meta, "rows": rows}, indent=2) + "\n"

    render = ScenarioReport.render
    sidecar = ScenarioReport.sidecar
