"""
Binary matrices over GF(2).

Rows are stored as packed bitsets (Python ints, bit ``j`` is column ``j``),
so row XOR and inner products reduce to ``^`` and ``(a & b).bit_count()``.
Column weights are cached and kept current by :func:`xor_patch`.

All indices are 0-based.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


def _parity(x: int) -> int:
    return x.bit_count() & 1


def bits_of(x: int) -> list[int]:
    """Positions of the set bits of ``x`` in increasing order."""
    out = []
    while x:
        low = x & -x
        out.append(low.bit_length() - 1)
        x ^= low
    return out


def pack_bits(values: Iterable[int]) -> int:
    """Pack a 0/1 sequence into an int, element ``t`` going to bit ``t``."""
    x = 0
    for t, b in enumerate(values):
        if b:
            x |= 1 << t
    return x


def unpack_bits(x: int, length: int) -> np.ndarray:
    out = np.zeros(length, dtype=np.uint8)
    for t in bits_of(x):
        out[t] = 1
    return out


def as_index_set(indices: Iterable[int], bound: int | None = None) -> tuple[int, ...]:
    """Normalise to a strictly increasing tuple, checking ``0 <= i < bound``."""
    out = tuple(sorted(set(int(i) for i in indices)))
    if out and (out[0] < 0 or (bound is not None and out[-1] >= bound)):
        raise IndexError(f"index set {out} out of range for dimension {bound}")
    return out


class BitMatrix:
    """Dense-indexable binary matrix with packed rows.

    Treat instances as immutable once handed out; every operation in this
    package returns a new matrix rather than editing one in place.
    """

    __slots__ = ("nrows", "ncols", "rows", "_colw")

    def __init__(self, nrows: int, ncols: int, rows: Sequence[int] | None = None):
        if nrows < 0 or ncols < 0:
            raise ValueError("matrix dimensions must be non-negative")
        self.nrows = nrows
        self.ncols = ncols
        if rows is None:
            self.rows = [0] * nrows
        else:
            if len(rows) != nrows:
                raise ValueError(f"expected {nrows} rows, got {len(rows)}")
            limit = 1 << ncols
            for r in rows:
                if r < 0 or r >= limit:
                    raise ValueError("row has bits beyond the column count")
            self.rows = list(rows)
        self._colw: np.ndarray | None = None

    # construction -------------------------------------------------------

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "BitMatrix":
        return cls(nrows, ncols)

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, n, [1 << i for i in range(n)])

    @classmethod
    def from_dense(cls, array) -> "BitMatrix":
        a = np.asarray(array)
        if a.ndim != 2:
            raise ValueError("expected a 2-D array")
        if not np.isin(a, (0, 1)).all():
            raise ValueError("entries must be 0 or 1")
        return cls(a.shape[0], a.shape[1], [pack_bits(row) for row in a.tolist()])

    @classmethod
    def from_supports(cls, nrows: int, ncols: int, supports: Iterable[Iterable[int]]) -> "BitMatrix":
        rows = []
        for cols in supports:
            r = 0
            for j in cols:
                if not 0 <= j < ncols:
                    raise IndexError(f"column {j} out of range for {ncols} columns")
                r |= 1 << j
            rows.append(r)
        return cls(nrows, ncols, rows)

    def copy(self) -> "BitMatrix":
        out = BitMatrix(self.nrows, self.ncols)
        out.rows = list(self.rows)
        if self._colw is not None:
            out._colw = self._colw.copy()
        return out

    # access -------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, key: tuple[int, int]) -> int:
        i, j = key
        if not (0 <= i < self.nrows and 0 <= j < self.ncols):
            raise IndexError(f"entry {key} out of range for shape {self.shape}")
        return (self.rows[i] >> j) & 1

    def row_support(self, i: int) -> list[int]:
        return bits_of(self.rows[i])

    def col_support(self, j: int) -> list[int]:
        return [i for i, r in enumerate(self.rows) if (r >> j) & 1]

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=np.uint8)
        for i, r in enumerate(self.rows):
            for j in bits_of(r):
                out[i, j] = 1
        return out

    def transpose(self) -> "BitMatrix":
        cols = [0] * self.ncols
        for i, r in enumerate(self.rows):
            for j in bits_of(r):
                cols[j] |= 1 << i
        return BitMatrix(self.ncols, self.nrows, cols)

    def nnz(self) -> int:
        return sum(r.bit_count() for r in self.rows)

    def is_zero(self) -> bool:
        return not any(self.rows)

    def row_weights(self) -> np.ndarray:
        return np.array([r.bit_count() for r in self.rows], dtype=np.int64)

    def col_weights(self) -> np.ndarray:
        if self._colw is None:
            w = np.zeros(self.ncols, dtype=np.int64)
            for r in self.rows:
                for j in bits_of(r):
                    w[j] += 1
            self._colw = w
        return self._colw.copy()

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitMatrix):
            return NotImplemented
        return self.shape == other.shape and self.rows == other.rows

    def __hash__(self):
        return hash((self.nrows, self.ncols, tuple(self.rows)))

    def __repr__(self) -> str:
        return f"BitMatrix({self.nrows}x{self.ncols}, nnz={self.nnz()})"

    def __str__(self) -> str:
        return "\n".join(
            "".join("1" if (r >> j) & 1 else "0" for j in range(self.ncols)) for r in self.rows
        )


def mat_mul_transpose(a: BitMatrix, b: BitMatrix) -> BitMatrix:
    """``a @ b.T`` over GF(2); entry ``(k, i)`` is the parity of row k of a AND row i of b."""
    if a.ncols != b.ncols:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    out = []
    for ra in a.rows:
        x = 0
        for i, rb in enumerate(b.rows):
            if (ra & rb).bit_count() & 1:
                x |= 1 << i
        out.append(x)
    return BitMatrix(a.nrows, b.nrows, out)


def row_col_weights(h: BitMatrix) -> tuple[np.ndarray, np.ndarray]:
    return h.row_weights(), h.col_weights()


def submatrix(h: BitMatrix, rows: Sequence[int], cols: Sequence[int]) -> BitMatrix:
    """Entries ``h[rows[a], cols[b]]`` in index-set order."""
    rows = as_index_set(rows, h.nrows)
    cols = as_index_set(cols, h.ncols)
    out = []
    for i in rows:
        r = h.rows[i]
        x = 0
        for b, j in enumerate(cols):
            if (r >> j) & 1:
                x |= 1 << b
        out.append(x)
    return BitMatrix(len(rows), len(cols), out)


def xor_patch(h: BitMatrix, rows: Sequence[int], cols: Sequence[int], patch: BitMatrix) -> BitMatrix:
    """Return ``h`` with the ``rows x cols`` block XORed by ``patch``."""
    rows = as_index_set(rows, h.nrows)
    cols = as_index_set(cols, h.ncols)
    if patch.shape != (len(rows), len(cols)):
        raise ValueError(f"patch shape {patch.shape} does not match {len(rows)}x{len(cols)} block")
    out = h.copy()
    colw = out._colw
    for a, i in enumerate(rows):
        mask = 0
        for b in bits_of(patch.rows[a]):
            mask |= 1 << cols[b]
        if not mask:
            continue
        old = out.rows[i]
        out.rows[i] = old ^ mask
        if colw is not None:
            for j in bits_of(mask):
                colw[j] += -1 if (old >> j) & 1 else 1
    return out


@dataclass
class EliminationResult:
    """Outcome of solving ``A x = b`` over GF(2).

    ``particular`` is ``None`` when the system is inconsistent. Vectors are
    uint8 arrays of length ``A.ncols``; the nullspace basis is stacked row-wise.
    """

    rank: int
    consistent: bool
    particular: np.ndarray | None
    nullspace_basis: np.ndarray
    pivot_columns: tuple[int, ...] = field(default_factory=tuple)

    @property
    def nullity(self) -> int:
        return self.nullspace_basis.shape[0]


def reduce_rows(rows: Sequence[int], rhs: Sequence[int], column_order: Iterable[int]):
    """Gauss-Jordan elimination on packed rows with an augmented rhs bit.

    Columns are visited in ``column_order``; the pivot for each column is the
    lowest-index remaining row with a 1 there. Returns
    ``(pivots, consistent)`` where ``pivots`` maps pivot column to the
    reduced row (pivot bit included) and its rhs bit.
    """
    work = list(rows)
    b = [int(x) & 1 for x in rhs]
    r = 0
    n = len(work)
    pivots: dict[int, tuple[int, int]] = {}
    order = []
    for c in column_order:
        if r == n:
            break
        bit = 1 << c
        p = next((t for t in range(r, n) if work[t] & bit), None)
        if p is None:
            continue
        work[r], work[p] = work[p], work[r]
        b[r], b[p] = b[p], b[r]
        pr, pb = work[r], b[r]
        for t in range(n):
            if t != r and work[t] & bit:
                work[t] ^= pr
                b[t] ^= pb
        order.append(c)
        r += 1
    consistent = all(b[t] == 0 for t in range(r, n))
    for t, c in enumerate(order):
        pivots[c] = (work[t], b[t])
    return pivots, consistent


def gf2_eliminate(a: BitMatrix, b) -> EliminationResult:
    b = [int(x) & 1 for x in b]
    if len(b) != a.nrows:
        raise ValueError(f"rhs has length {len(b)}, expected {a.nrows}")
    v = a.ncols
    pivots, consistent = reduce_rows(a.rows, b, range(v))
    pivot_cols = tuple(sorted(pivots))
    free = [c for c in range(v) if c not in pivots]

    basis = np.zeros((len(free), v), dtype=np.uint8)
    for t, f in enumerate(free):
        basis[t, f] = 1
        for c, (row, _) in pivots.items():
            if (row >> f) & 1:
                basis[t, c] = 1

    particular = None
    if consistent:
        particular = np.zeros(v, dtype=np.uint8)
        for c, (_, rb) in pivots.items():
            particular[c] = rb
    return EliminationResult(len(pivots), consistent, particular, basis, pivot_cols)


def gf2_rank(a: BitMatrix) -> int:
    pivots, _ = reduce_rows(a.rows, [0] * a.nrows, range(a.ncols))
    return len(pivots)


def mat_vec(a: BitMatrix, x) -> np.ndarray:
    """``a @ x`` over GF(2) for a 0/1 vector ``x``."""
    xv = pack_bits(np.asarray(x).tolist())
    return np.array([_parity(r & xv) for r in a.rows], dtype=np.uint8)
