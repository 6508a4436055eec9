"""Deterministic report serialization.

Reports are nested dicts and lists.  The JSON writer renders floats with 17
significant digits (so they parse back to the same double), exact rationals
as ``"p/q"`` strings and keeps key order as inserted, so identical inputs give
byte-identical output.
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction

import numpy as np


def _scalar(x) -> str:
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction):
        return json.dumps(str(x)) if x.denominator != 1 else str(x.numerator)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x) or math.isinf(x):
            return json.dumps(str(x))
        if x == 0:
            x = 0.0  # drop the sign of zero
        return format(x, ".17g")
    return json.dumps(str(x), ensure_ascii=False)


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in seq):
            return "[" + ", ".join(_scalar(v) for v in seq) + "]"
        return "[\n" + ",\n".join(pad + to_json(v, indent, _level + 1) for v in seq) + "\n" + end + "]"
    return _scalar(obj)


def from_json(text: str):
    """Inverse of :func:`to_json`; ``"p/q"`` strings come back as :class:`Fraction`."""

    def fix(v):
        if isinstance(v, dict):
            return {k: fix(x) for k, x in v.items()}
        if isinstance(v, list):
            return [fix(x) for x in v]
        if isinstance(v, str) and "/" in v:
            try:
                return Fraction(v)
            except ValueError:
                return v
        return v

    return fix(json.loads(text))


def fmt(x) -> str:
    """Human-readable cell."""
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".10g")
    if isinstance(x, (list, tuple, np.ndarray)):
        return "(" + ",".join(fmt(v) for v in x) + ")"
    if x is None:
        return "-"
    return str(x)


def table(headers, rows) -> str:
    """Aligned plain-text table."""
    cells = [[fmt(c) for c in r] for r in rows]
    widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(headers)]
    line = lambda r: "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()  # noqa: E731
    out = [line(headers), line(["-" * w for w in widths])]
    out += [line(r) for r in cells]
    return "\n".join(out)


def csv_text(headers, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(headers)
    for r in rows:
        w.writerow([fmt(c) if isinstance(c, (list, tuple, np.ndarray)) else _csv_cell(c) for c in r])
    return buf.getvalue()


def _csv_cell(c):
    if isinstance(c, (float, np.floating)):
        return format(float(c), ".17g")
    return c
