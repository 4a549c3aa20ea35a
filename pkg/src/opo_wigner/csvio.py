"""Deterministic CSV output shared by all writers."""

from __future__ import annotations

import csv
import io
import os
from pathlib import Path

DIV_TOKEN = "div"


def fmt(value) -> str:
    """Format a cell: floats with 17 significant digits, everything else via str."""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return format(value, ".17g")
    if hasattr(value, "dtype") and getattr(value, "ndim", 1) == 0:
        return fmt(value.item())
    return str(value)


def render(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_csv(path, header: list[str], rows) -> Path:
    """Write atomically: a failed render never leaves a partial file behind."""
    path = Path(path)
    text = render(header, rows)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]
