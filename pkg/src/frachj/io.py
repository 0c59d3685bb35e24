"""CSV and flat-summary writers with byte-stable output."""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np


def format_float(x: float) -> str:
    """17 significant digits, enough to round-trip any double."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def emit_csv(table: Mapping[str, Sequence[float]], path) -> None:
    """Write named equal-length columns as CSV with a header row."""
    names = list(table)
    cols = [np.asarray(table[k], dtype=np.float64).ravel() for k in names]
    lengths = {c.size for c in cols}
    if len(lengths) > 1:
        raise ValueError(f"columns have different lengths: {sorted(lengths)}")
    lines = [",".join(names)]
    for row in zip(*cols):
        lines.append(",".join(format_float(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_csv(path) -> dict[str, np.ndarray]:
    with open(Path(path), newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    names = rows[0]
    data = np.array([[float(v) for v in r] for r in rows[1:]], dtype=np.float64)
    data = data.reshape(len(rows) - 1, len(names))
    return {k: data[:, i] for i, k in enumerate(names)}


def emit_summary(items: Mapping[str, object], path) -> None:
    """Flat ``key = value`` text, one entry per line, in insertion order."""
    lines = []
    for key, val in items.items():
        if isinstance(val, bool):
            txt = "true" if val else "false"
        elif isinstance(val, (int, np.integer)):
            txt = str(int(val))
        elif isinstance(val, (float, np.floating)):
            txt = format_float(val)
        else:
            txt = '"%s"' % str(val).replace('"', "'")
        lines.append(f"{key} = {txt}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
