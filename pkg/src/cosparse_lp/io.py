"""Matrix text format, signal/cosupport CSV, and atomic file output.

Matrix format: first line ``rows cols``, then one row per line with
whitespace-separated decimal literals carrying 17 significant digits, which
round-trips IEEE doubles exactly.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


def format_float(v: float) -> str:
    return format(float(v), ".17g")


def dumps_matrix(mat) -> str:
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    lines = [f"{mat.shape[0]} {mat.shape[1]}"]
    lines.extend(" ".join(format_float(v) for v in row) for row in mat)
    return "\n".join(lines) + "\n"


def loads_matrix(text: str) -> np.ndarray:
    tokens = text.split()
    if len(tokens) < 2:
        raise ValueError("matrix text is missing its 'rows cols' header")
    rows, cols = int(tokens[0]), int(tokens[1])
    values = tokens[2:]
    if len(values) != rows * cols:
        raise ValueError(f"expected {rows * cols} entries, found {len(values)}")
    return np.array([float(v) for v in values], dtype=float).reshape(rows, cols)


def write_matrix(path, mat) -> None:
    atomic_write_text(path, dumps_matrix(mat))


def read_matrix(path) -> np.ndarray:
    return loads_matrix(Path(path).read_text())


def dumps_signal(x) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "value"])
    for i, v in enumerate(np.asarray(x, dtype=float)):
        w.writerow([i, format_float(v)])
    return buf.getvalue()


def loads_signal(text: str) -> np.ndarray:
    rows = list(csv.DictReader(io.StringIO(text)))
    out = np.zeros(len(rows))
    for row in rows:
        out[int(row["index"])] = float(row["value"])
    return out


def dumps_cosupport(indices: Iterable[int]) -> str:
    return "index\n" + "".join(f"{int(i)}\n" for i in indices)


def loads_cosupport(text: str) -> tuple[int, ...]:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != "index":
        raise ValueError("cosupport CSV must start with an 'index' header")
    return tuple(int(ln) for ln in lines[1:])


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format_float(v)
    return str(v)


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
