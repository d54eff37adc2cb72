"""Initial orthogonal pairs: the tiled-identity seed and loading from text."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from .formats import parse_matrix
from .gf2 import BitMatrix, mat_mul_transpose


class NotOrthogonalError(ValueError):
    pass


def weight_histogram(weights) -> dict[int, int]:
    return dict(sorted(Counter(int(w) for w in weights).items()))


@dataclass
class OrthoPair:
    """An (H_X, H_Z) pair with ``hx @ hz.T == 0``.

    The weight histograms are the ones recorded at construction and serve as
    the reference for later verification; they are not refreshed when the
    matrices are replaced.
    """

    hx: BitMatrix
    hz: BitMatrix
    row_hist_x: dict[int, int] = field(default_factory=dict)
    col_hist_x: dict[int, int] = field(default_factory=dict)
    row_hist_z: dict[int, int] = field(default_factory=dict)
    col_hist_z: dict[int, int] = field(default_factory=dict)

    @classmethod
    def create(cls, hx: BitMatrix, hz: BitMatrix, check: bool = True) -> "OrthoPair":
        if hx.ncols != hz.ncols:
            raise ValueError(f"column counts differ: H_X has {hx.ncols}, H_Z has {hz.ncols}")
        if check and not mat_mul_transpose(hx, hz).is_zero():
            raise NotOrthogonalError("pair not orthogonal")
        return cls(
            hx,
            hz,
            weight_histogram(hx.row_weights()),
            weight_histogram(hx.col_weights()),
            weight_histogram(hz.row_weights()),
            weight_histogram(hz.col_weights()),
        )

    @property
    def n(self) -> int:
        return self.hx.ncols

    def max_degrees(self) -> tuple[int, int]:
        """Maximum (column, row) weight over both matrices."""
        dc = max(max(self.col_hist_x, default=0), max(self.col_hist_z, default=0))
        dr = max(max(self.row_hist_x, default=0), max(self.row_hist_z, default=0))
        return dc, dr


@dataclass(frozen=True)
class SeedParams:
    P: int
    dc: int
    dr: int

    def __post_init__(self):
        if self.P < 1 or self.dc < 1 or self.dr < 1:
            raise ValueError("P, dc and dr must be positive")
        if self.dr % 2:
            raise ValueError("tiled seed requires even row weight")


def tiled_matrix(P: int, dc: int, dr: int) -> BitMatrix:
    """The ``dc x dr`` block array of ``P x P`` identities."""
    rows = []
    for a in range(dc):
        for p in range(P):
            r = 0
            for b in range(dr):
                r |= 1 << (b * P + p)
            rows.append(r)
    return BitMatrix(dc * P, dr * P, rows)


def build_tiled_seed(params: SeedParams) -> OrthoPair:
    # Rows with the same residue overlap in dr columns, so dr must be even.
    h = tiled_matrix(params.P, params.dc, params.dr)
    return OrthoPair.create(h, h.copy(), check=False)


def load_pair(hx_source: str, hz_source: str) -> OrthoPair:
    """Build a pair from alist or dense text; orthogonality is enforced."""
    return OrthoPair.create(parse_matrix(hx_source), parse_matrix(hz_source))
