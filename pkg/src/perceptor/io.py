"""Plain-text file formats.

Matrix CSV::

    # optional comments
    rows,cols
    v11,v12,...
    ...

Labeled rows (activations, datasets)::

    # optional comments
    label,v1,...,vN

Blank lines and lines starting with ``#`` are ignored in both formats.
Parse errors raise :class:`~perceptor.errors.InputError` naming the line.
"""

from __future__ import annotations

import csv
import io as _io
from pathlib import Path

import numpy as np

from .errors import InputError


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line and not line.startswith("#"):
                yield lineno, line


def _floats(line: str, lineno: int, path) -> list[float]:
    try:
        vals = [float(tok) for tok in line.split(",")]
    except ValueError:
        raise InputError(f"{path}: line {lineno}: non-numeric value in {line[:60]!r}") from None
    if not all(np.isfinite(vals)):
        raise InputError(f"{path}: line {lineno}: non-finite value")
    return vals


def read_matrix(path) -> np.ndarray:
    lines = _data_lines(path)
    try:
        lineno, header = next(lines)
    except StopIteration:
        raise InputError(f"{path}: empty matrix file") from None
    try:
        rows, cols = (int(t) for t in header.split(","))
    except ValueError:
        raise InputError(f"{path}: line {lineno}: expected 'rows,cols' header") from None
    data = []
    for lineno, line in lines:
        vals = _floats(line, lineno, path)
        if len(vals) != cols:
            raise InputError(f"{path}: line {lineno}: expected {cols} values, got {len(vals)}")
        data.append(vals)
    if len(data) != rows:
        raise InputError(f"{path}: header promises {rows} rows, found {len(data)}")
    return np.array(data, dtype=float).reshape(rows, cols)


def write_matrix(path, a: np.ndarray, comment: str | None = None) -> None:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    with open(path, "w", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write(f"{a.shape[0]},{a.shape[1]}\n")
        for row in a:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_labeled(path) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(vectors, labels)`` from a ``label,v1,...,vN`` file."""
    labels, rows = [], []
    width = None
    for lineno, line in _data_lines(path):
        vals = _floats(line, lineno, path)
        if len(vals) < 2:
            raise InputError(f"{path}: line {lineno}: need a label and at least one value")
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise InputError(f"{path}: line {lineno}: expected {width - 1} values, "
                             f"got {len(vals) - 1}")
        if vals[0] != int(vals[0]) or vals[0] < 0:
            raise InputError(f"{path}: line {lineno}: label must be a non-negative integer")
        labels.append(int(vals[0]))
        rows.append(vals[1:])
    if not rows:
        raise InputError(f"{path}: no data rows")
    return np.array(rows, dtype=float), np.array(labels, dtype=np.int64)


def write_labeled(path, vectors: np.ndarray, labels) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for y, row in zip(labels, np.atleast_2d(vectors)):
            fh.write(f"{int(y)}," + ",".join(repr(float(v)) for v in row) + "\n")


def format_csv(header: list[str], rows, provenance: list[str] = ()) -> str:
    """Render rows as CSV text with ``#``-prefixed provenance lines on top.

    Floats are written with ``repr`` so reruns are byte-identical.
    """
    buf = _io.StringIO()
    for line in provenance:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v
                         for v in row])
    return buf.getvalue()


def split_provenance(text: str) -> tuple[str, str]:
    """Split CSV text into its leading ``#`` header and the body."""
    lines = text.splitlines(keepends=True)
    k = 0
    while k < len(lines) and lines[k].startswith("#"):
        k += 1
    return "".join(lines[:k]), "".join(lines[k:])


def bundled_path(name: str) -> Path:
    return Path(__file__).with_name("data") / f"{name}.csv"
