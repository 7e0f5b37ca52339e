"""matx v1: plain-text matrix exchange format.

A matx block is a header line "n m" followed by n lines of m
whitespace-separated decimal values. Values are written with 17
significant digits so doubles round-trip exactly.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import InvalidInput

FLOAT_FMT = "{:.17g}"


def format_float(value: float) -> str:
    """Render one double with enough digits to round-trip."""
    return FLOAT_FMT.format(float(value))


def dump_matrix(a) -> str:
    """Serialize a 1-d or 2-d array as one matx block (1-d becomes one row)."""
    arr = np.atleast_2d(np.asarray(a, dtype=float))
    if arr.ndim != 2:
        raise InvalidInput(f"matx supports 2-d matrices, got ndim={arr.ndim}")
    n, m = arr.shape
    lines = [f"{n} {m}"]
    for row in arr:
        lines.append(" ".join(format_float(v) for v in row))
    return "\n".join(lines) + "\n"


def _parse_block(lines: list[str], pos: int) -> tuple[np.ndarray, int]:
    """Parse one matx block starting at lines[pos]; returns (matrix, next position)."""
    while pos < len(lines) and not lines[pos].strip():
        pos += 1
    if pos >= len(lines):
        raise InvalidInput("matx: missing header line")
    header = lines[pos].split()
    if len(header) != 2:
        raise InvalidInput(f"matx: header must be 'n m', got {lines[pos]!r}")
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError as exc:
        raise InvalidInput(f"matx: non-integer header {lines[pos]!r}") from exc
    if n < 0 or m < 0:
        raise InvalidInput(f"matx: negative dimensions in header {lines[pos]!r}")
    pos += 1
    rows = []
    for i in range(n):
        if pos >= len(lines):
            raise InvalidInput(f"matx: expected {n} rows, file ends after {i}")
        fields = lines[pos].split()
        if len(fields) != m:
            raise InvalidInput(f"matx: row {i} has {len(fields)} values, expected {m}")
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise InvalidInput(f"matx: non-numeric value in row {i}") from exc
        pos += 1
    arr = np.array(rows, dtype=float) if n else np.zeros((0, m))
    return arr, pos


def parse_matrix(text: str) -> np.ndarray:
    """Parse text holding exactly one matx block."""
    lines = text.splitlines()
    arr, pos = _parse_block(lines, 0)
    for line in lines[pos:]:
        if line.strip():
            raise InvalidInput(f"matx: trailing content {line!r}")
    return arr


def save_matrix(path, a) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(dump_matrix(a))


def load_matrix(path) -> np.ndarray:
    if not os.path.isfile(path):
        raise InvalidInput(f"matx: no such file {path}")
    with open(path, "r", encoding="ascii") as fh:
        return parse_matrix(fh.read())
