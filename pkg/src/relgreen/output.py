"""Result tables, the run envelope and their CSV/JSON serialisations."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

SCHEMA_VERSION = "relgreen-envelope/1"


@dataclass
class Table:
    """Named columns with unit labels; ``None`` cells are flagged nulls."""

    kind: str
    columns: List[str]
    units: List[str]
    rows: List[List[Any]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} values for {len(self.columns)} columns")
        self.rows.append([_clean(v) for v in values])

    def column(self, name: str) -> List[Any]:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def to_dict(self) -> Dict[str, Any]:
        d = {"kind": self.kind, "columns": self.columns, "units": self.units, "rows": self.rows}
        if self.notes:
            d["notes"] = self.notes
        return d


def _clean(v):
    if v is None or isinstance(v, (str, bool, int)):
        return v
    v = float(v)
    return v if math.isfinite(v) else None


def green_table() -> Table:
    """The GreenTable layout shared by the amplitude commands."""
    return Table(
        "green-table",
        ["x_b", "x_a", "E_re", "E_im", "G_re", "G_im", "flag"],
        ["length", "length", "energy", "energy", "amplitude", "amplitude", ""],
    )


@dataclass
class Envelope:
    command: str
    config: Dict[str, Any]
    version: str
    wall_clock_s: float
    payload: Dict[str, Any]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "schema": SCHEMA_VERSION,
            "command": self.command,
            "artifact_version": self.version,
            "config": self.config,
            "wall_clock_s": self.wall_clock_s,
            "payload": self.payload,
        }


def payload_bytes(payload: Dict[str, Any]) -> bytes:
    """Canonical encoding used for determinism checks."""
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()


def to_json(env: Envelope) -> str:
    return json.dumps(env.to_dict(), sort_keys=True, indent=2) + "\n"


def to_csv(env: Envelope) -> str:
    """Comment header with envelope metadata, then one CSV table per payload table."""
    buf = io.StringIO()
    buf.write(f"# schema: {SCHEMA_VERSION}\n")
    buf.write(f"# command: {env.command}\n")
    buf.write(f"# artifact_version: {env.version}\n")
    buf.write(f"# config: {json.dumps(env.config, sort_keys=True, separators=(',', ':'))}\n")
    buf.write(f"# wall_clock_s: {env.wall_clock_s:.6f}\n")
    tables = env.payload["tables"] if "tables" in env.payload else [env.payload]
    writer = csv.writer(buf, lineterminator="\n")
    for k, t in enumerate(tables):
        if k:
            buf.write("\n")
        buf.write(f"# table: {t['kind']}\n")
        for note in t.get("notes", []):
            buf.write(f"# note: {note}\n")
        writer.writerow([f"{c} [{u}]" if u else c for c, u in zip(t["columns"], t["units"])])
        for row in t["rows"]:
            writer.writerow(["" if v is None else (repr(v) if isinstance(v, float) else v) for v in row])
    return buf.getvalue()
