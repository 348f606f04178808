"""Deterministic CSV/JSON writers and the purity-grid CSV parser.

Floats are written with ``repr`` so every value round-trips exactly and two
runs with the same inputs produce identical bytes.
"""
from __future__ import annotations

import hashlib
import json
import math

import numpy as np

from .errors import ValidationError
from .thermal import PurityGrid

SCHEMA = 1
AXIS_TAG = "# axis_x:"


def _fmt(x: float) -> str:
    x = float(x)
    return "nan" if math.isnan(x) else repr(x)


def grid_to_csv(grid: PurityGrid) -> str:
    """First row ``# axis_x:`` then the x values; each later row is ``y, P(y, x_1), ...``."""
    lines = [",".join([AXIS_TAG] + [_fmt(x) for x in grid.x_axis])]
    for y, row in zip(grid.y_axis, grid.values):
        lines.append(",".join([_fmt(y)] + [_fmt(v) for v in row]))
    return "\n".join(lines) + "\n"


def grid_from_csv(text: str) -> PurityGrid:
    rows = [r for r in text.splitlines() if r.strip()]
    if not rows or not rows[0].startswith(AXIS_TAG):
        raise ValidationError(f"purity CSV must start with {AXIS_TAG!r}")
    head = rows[0].split(",")
    x = np.array([float(v) for v in head[1:]])
    ys, vals = [], []
    for lineno, r in enumerate(rows[1:], start=2):
        cells = r.split(",")
        if len(cells) != x.size + 1:
            raise ValidationError(f"line {lineno}: expected {x.size + 1} cells, got {len(cells)}")
        ys.append(float(cells[0]))
        vals.append([float(c) for c in cells[1:]])
    return PurityGrid(x, np.array(ys), np.array(vals).reshape(len(ys), x.size))


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, NaN as null, infinities as strings."""
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def grid_to_json(grid: PurityGrid) -> str:
    return dumps({
        "schema": SCHEMA,
        "x_axis": grid.x_axis,
        "y_axis": grid.y_axis,
        "purity": grid.values,
        "errors": grid.errors,
        "metadata": grid.metadata,
    })


def grid_from_json(text: str) -> PurityGrid:
    data = json.loads(text)
    if data.get("schema") != SCHEMA:
        raise ValidationError(f"unsupported schema {data.get('schema')!r}")
    vals = np.array([[math.nan if v is None else v for v in row] for row in data["purity"]], dtype=float)
    return PurityGrid(np.array(data["x_axis"]), np.array(data["y_axis"]), vals,
                      data.get("metadata", {}), data.get("errors", {}))


def sha256(data: bytes | str) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()
