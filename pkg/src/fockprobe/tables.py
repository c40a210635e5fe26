"""Plot-ready tables: lossless CSV/JSON writers and their parsers.

Reals are written in scientific notation with 17 significant digits so that
every double survives a round trip.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field


@dataclass
class Table:
    columns: list[str]
    rows: list[dict] = field(default_factory=list)

    def add(self, **row) -> None:
        unknown = set(row) - set(self.columns)
        if unknown:
            raise KeyError(f"unknown columns {sorted(unknown)}")
        self.rows.append(row)

    def column(self, name: str) -> list:
        return [r.get(name) for r in self.rows]


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return format(value, ".16e")
    return str(value)


def parse_cell(text: str):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def to_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([format_cell(row.get(c)) for c in table.columns])
    return buf.getvalue()


def from_csv(text: str) -> Table:
    reader = csv.reader(io.StringIO(text))
    columns = next(reader)
    rows = [dict(zip(columns, map(parse_cell, rec))) for rec in reader]
    return Table(columns, rows)


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return format_cell(value)
    return value


def to_json(table: Table) -> str:
    rows = [{c: _json_value(r.get(c)) for c in table.columns} for r in table.rows]
    return json.dumps({"columns": table.columns, "rows": rows}, indent=1) + "\n"


def from_json(text: str) -> Table:
    d = json.loads(text)
    rows = [
        {k: (float(v) if v in ("inf", "-inf", "nan") else v) for k, v in r.items()}
        for r in d["rows"]
    ]
    return Table(d["columns"], rows)


def render(table: Table, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(table)
    if fmt == "json":
        return to_json(table)
    raise ValueError(f"unknown format {fmt!r}")


def parse(text: str, fmt: str) -> Table:
    return from_csv(text) if fmt == "csv" else from_json(text)
