"""
Text formats for binary matrices.

alist (MacKay's sparse format, 1-based on disk)::

    n m
    max_col_degree max_row_degree
    col_degree_1 ... col_degree_n
    row_degree_1 ... row_degree_m
    <n lines: row indices of each column, zero-padded to max_col_degree>
    <m lines: column indices of each row, zero-padded to max_row_degree>

An all-zero matrix has maximum degree 0; its index lines are written as a
single ``0`` so that no line is empty.

Dense text is one line per row of ``0``/``1`` characters with no separators.
Blank lines and lines starting with ``#`` are ignored when reading dense text.
"""

from __future__ import annotations

import os
from pathlib import Path

from .gf2 import BitMatrix


class FormatError(ValueError):
    """Raised when matrix text cannot be parsed."""


def to_alist(h: BitMatrix) -> str:
    colsupp = [[] for _ in range(h.ncols)]
    rowsupp = []
    for i in range(h.nrows):
        s = h.row_support(i)
        rowsupp.append(s)
        for j in s:
            colsupp[j].append(i)
    cdeg = [len(c) for c in colsupp]
    rdeg = [len(r) for r in rowsupp]
    maxc = max(cdeg, default=0)
    maxr = max(rdeg, default=0)

    def padded(idx, width):
        # a lone 0 keeps the line non-empty when the maximum degree is zero
        vals = [str(x + 1) for x in idx] + ["0"] * (max(width, 1) - len(idx))
        return " ".join(vals)

    lines = [
        f"{h.ncols} {h.nrows}",
        f"{maxc} {maxr}",
        " ".join(map(str, cdeg)),
        " ".join(map(str, rdeg)),
    ]
    lines += [padded(c, maxc) for c in colsupp]
    lines += [padded(r, maxr) for r in rowsupp]
    return "\n".join(lines) + "\n"


def _ints(line: str, lineno: int) -> list[int]:
    try:
        return [int(t) for t in line.split()]
    except ValueError as e:
        raise FormatError(f"line {lineno}: expected integers") from e


def from_alist(text: str) -> BitMatrix:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 4:
        raise FormatError("alist text is truncated")
    head = _ints(lines[0], 1)
    if len(head) != 2 or head[0] <= 0 or head[1] <= 0:
        raise FormatError("alist header must be two positive integers 'n m'")
    n, m = head
    if len(_ints(lines[1], 2)) != 2:
        raise FormatError("alist line 2 must hold 'max_col_degree max_row_degree'")
    cdeg = _ints(lines[2], 3)
    rdeg = _ints(lines[3], 4)
    if len(cdeg) != n or len(rdeg) != m:
        raise FormatError("degree lists do not match the declared dimensions")
    if len(lines) != 4 + n + m:
        raise FormatError(f"expected {4 + n + m} non-empty lines, found {len(lines)}")

    rows = [0] * m
    for j in range(n):
        idx = [x for x in _ints(lines[4 + j], 5 + j) if x != 0]
        if len(idx) != cdeg[j]:
            raise FormatError(f"column {j + 1}: degree {cdeg[j]} but {len(idx)} indices")
        for x in idx:
            if not 1 <= x <= m:
                raise FormatError(f"column {j + 1}: row index {x} out of range")
            rows[x - 1] |= 1 << j
    for i in range(m):
        idx = [x for x in _ints(lines[4 + n + i], 5 + n + i) if x != 0]
        if len(idx) != rdeg[i]:
            raise FormatError(f"row {i + 1}: degree {rdeg[i]} but {len(idx)} indices")
        r = 0
        for x in idx:
            if not 1 <= x <= n:
                raise FormatError(f"row {i + 1}: column index {x} out of range")
            r |= 1 << (x - 1)
        if r != rows[i]:
            raise FormatError(f"row {i + 1}: row list disagrees with column lists")
    return BitMatrix(m, n, rows)


def to_dense_text(h: BitMatrix) -> str:
    return str(h) + "\n" if h.nrows else ""


def from_dense_text(text: str) -> BitMatrix:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise FormatError("dense text holds no rows")
    width = len(lines[0])
    rows = []
    for k, ln in enumerate(lines):
        if len(ln) != width or set(ln) - {"0", "1"}:
            raise FormatError(f"dense row {k + 1}: expected {width} characters of 0/1")
        rows.append(int(ln[::-1], 2))
    return BitMatrix(len(rows), width, rows)


def parse_matrix(text: str) -> BitMatrix:
    """Parse alist or dense text, deciding by the first non-blank line."""
    first = next((ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")), "")
    if not first:
        raise FormatError("empty matrix text")
    if " " in first or "\t" in first:
        return from_alist(text)
    return from_dense_text(text)


def read_matrix(path: str | os.PathLike) -> BitMatrix:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise OSError(f"cannot read matrix from {path}: {e.strerror}") from e
    try:
        return parse_matrix(text)
    except FormatError as e:
        raise FormatError(f"{path}: {e}") from e


def write_matrix(h: BitMatrix, path: str | os.PathLike, fmt: str = "alist") -> None:
    if fmt == "alist":
        text = to_alist(h)
    elif fmt == "dense":
        text = to_dense_text(h)
    else:
        raise ValueError(f"unknown matrix format {fmt!r}")
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise OSError(f"cannot write matrix to {path}: {e.strerror}") from e
