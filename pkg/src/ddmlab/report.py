"""Deterministic report emission: JSON and RFC-4180 CSV, atomic writes.

Rational values serialize as exact "p/q" strings, floats at 15 significant
digits.  Emission is idempotent: parsing an emitted CSV and re-emitting it
reproduces the bytes.  Files are written to a temp name and renamed.
"""

from __future__ import annotations

import json
import os
import tempfile
from fractions import Fraction


def fmt15(x) -> str:
    return format(float(x), ".15g")


def jsonable(obj):
    """Recursively convert report values; Fractions become 'p/q' strings."""
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, float):
        if obj != obj or obj in (float("inf"), float("-inf")):
            return repr(obj)
        return obj
    return obj


def atomic_write_text(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def write_json(path: str, payload) -> None:
    text = json.dumps(jsonable(payload), indent=2, sort_keys=True) + "\n"
    atomic_write_text(path, text)


def _csv_field(s: str) -> str:
    if any(c in s for c in ',"\r\n'):
        return '"' + s.replace('"', '""') + '"'
    return s


def write_csv(path: str, header: list[str], rows: list[list], rational_siblings=False) -> None:
    """Emit rows; with ``rational_siblings`` every value column gets a
    sibling '<name>_pq' column holding the exact rational when one exists."""
    cols = list(header)
    if rational_siblings:
        cols = []
        for name in header:
            cols.append(name)
            cols.append(name + "_pq")
    lines = [",".join(_csv_field(c) for c in cols)]
    for row in rows:
        fields = []
        for v in row:
            if v is None:
                main, sib = "", ""
            elif isinstance(v, Fraction):
                main, sib = fmt15(v), str(v)
            elif isinstance(v, int) and not isinstance(v, bool):
                main, sib = fmt15(v), str(v)
            else:
                main, sib = fmt15(v), ""
            fields.append(main)
            if rational_siblings:
                fields.append(sib)
        lines.append(",".join(_csv_field(f) for f in fields))
    atomic_write_text(path, "\r\n".join(lines) + "\r\n")


def read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    import csv

    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
