"""CSV and JSON artifacts.

CSVs start with a ``# artifact <version>`` line, may carry further ``#``
metadata lines, then a header row; floats are written with 17 significant
digits so they round-trip exactly.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .boundary import BoundaryField, FreeBoundary
from .problem import Problem

VERSION = "0.1.0"


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path: str | Path, header, rows, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(f"# artifact {VERSION}\n")
        for k, v in (meta or {}).items():
            fh.write(f"# {k}={_fmt(v)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path: str | Path) -> tuple[dict, list, list]:
    """``(meta, header, rows)`` with numeric cells parsed as floats."""
    meta, lines = {}, []
    with Path(path).open() as fh:
        for line in fh:
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    k, v = body.split("=", 1)
                    meta[k.strip()] = v.strip()
            else:
                lines.append(line)
    reader = csv.reader(lines)
    header = next(reader)
    rows = []
    for row in reader:
        parsed = []
        for cell in row:
            try:
                parsed.append(float(cell))
            except ValueError:
                parsed.append(cell)
        rows.append(parsed)
    return meta, header, rows


def write_json(path: str | Path, doc: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not serialisable: {type(v).__name__}")


def write_boundary(path: str | Path, problem: Problem, boundary: FreeBoundary,
                   field: BoundaryField | None = None) -> Path:
    """Columns ``m, b, E(b, m), m_x(b)``; endpoint and bracket go in the metadata."""
    field = BoundaryField(problem) if field is None else field
    null = field.null_curve(boundary.b)
    meta = {"m_low": boundary.m_low, "bracket_lo": boundary.bracket[0],
            "bracket_hi": boundary.bracket[1], "horizon": boundary.horizon}
    rows = zip(boundary.m, boundary.b, boundary.slope, null)
    return write_csv(path, ["m", "b", "E", "m_x"], rows, meta)


def read_boundary(path: str | Path, x_R: float) -> FreeBoundary:
    meta, header, rows = read_csv(path)
    if header[:3] != ["m", "b", "E"]:
        raise ValueError(f"{path}: expected columns m, b, E")
    arr = np.array([r[:3] for r in rows], dtype=float)
    m_low = float(meta.get("m_low", arr[0, 0]))
    bracket = (float(meta.get("bracket_lo", math.nan)), float(meta.get("bracket_hi", math.nan)))
    return FreeBoundary(m_low, x_R, arr[:, 0], arr[:, 1], arr[:, 2], bracket,
                        float(meta.get("horizon", math.nan)))
