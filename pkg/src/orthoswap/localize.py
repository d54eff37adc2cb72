"""
Localising an orthogonality violation and building the repair system.

After a perturbation of H_X the product S = H'_X H_Z^T is nonzero only in a
few columns. With

    I = columns of S that are nonzero          (rows of H_Z to repair)
    J = union of the supports of H_Z rows in I (columns a repair may touch)
    K = rows of H'_X meeting J                 (checks that see the repair)

any correction Delta supported on I x J must satisfy

    (H'_X)_{K,J} Delta_{I,J}^T = S_{K,I}      over GF(2).

Each flattened equation (k, i) involves only row i of Delta. Row and column
weights of H_Z are preserved by the signed balance constraints

    sum_j Delta[i,j] * (1 - 2 H_Z[i,j]) = 0   for i in I
    sum_i Delta[i,j] * (1 - 2 H_Z[i,j]) = 0   for j in J

which are integer equalities and are kept separately from the parity rows.
Their mod-2 images (each line flips an even number of entries) are implied
parities and are appended to the GF(2) system used for elimination.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .gf2 import BitMatrix, as_index_set, bits_of, gf2_rank
from .perturb import CrossSwap

log = logging.getLogger(__name__)


class EmptyPatchError(ValueError):
    pass


class BoundViolation(AssertionError):
    pass


@dataclass
class ViolationPatch:
    I: tuple[int, ...]
    J: tuple[int, ...]
    K: tuple[int, ...]
    residual: BitMatrix  # |K| x |I| block of H'_X H_Z^T

    @property
    def empty(self) -> bool:
        return not self.I


def _product_column_mask(hx_prime: BitMatrix, hz: BitMatrix, rows) -> int:
    """Bitmask over H_Z rows i with (H'_X H_Z^T)[k, i] = 1 for some k in ``rows``."""
    mask = 0
    hz_rows = hz.rows
    for k in rows:
        rk = hx_prime.rows[k]
        for i, ri in enumerate(hz_rows):
            if (rk & ri).bit_count() & 1:
                mask |= 1 << i
    return mask


def compute_violation(hx_prime: BitMatrix, hz: BitMatrix, swap: CrossSwap | None = None) -> ViolationPatch:
    """Find I, J, K and the residual block for ``hx_prime`` against ``hz``.

    When ``swap`` is given the pair is assumed orthogonal before the swap, so
    only rows ``swap.i1`` and ``swap.i2`` of the product can be nonzero.
    Without it the full product is scanned.
    """
    if hx_prime.ncols != hz.ncols:
        raise ValueError(f"dimension mismatch: {hx_prime.shape} vs {hz.shape}")
    rows = (swap.i1, swap.i2) if swap is not None else range(hx_prime.nrows)
    imask = _product_column_mask(hx_prime, hz, rows)
    I = tuple(bits_of(imask))
    if not I:
        return ViolationPatch((), (), (), BitMatrix(0, 0))

    jmask = 0
    for i in I:
        jmask |= hz.rows[i]
    J = tuple(bits_of(jmask))
    K = tuple(k for k, r in enumerate(hx_prime.rows) if r & jmask)

    res_rows = []
    for k in K:
        rk = hx_prime.rows[k]
        x = 0
        for a, i in enumerate(I):
            if (rk & hz.rows[i]).bit_count() & 1:
                x |= 1 << a
        res_rows.append(x)
    return ViolationPatch(I, J, K, BitMatrix(len(K), len(I), res_rows))


def check_locality_bounds(patch: ViolationPatch, dc: int, dr: int) -> None:
    """Assert the size bounds of a localized violation.

    A swap on rows (i1, i2) adds e_j1 + e_j2 to both rows, so only H_Z rows
    with H_Z[i, j1] != H_Z[i, j2] are hit and |I| <= 2 dc. Then |J| <= |I| dr
    and |K| <= |J| dc. The hard limit used here is the looser |I| <= 4 dc
    (one 2 dc per changed row), which also covers a patch found by a full
    scan; exceeding the tight bound is only logged.
    """
    nI, nJ, nK = len(patch.I), len(patch.J), len(patch.K)
    if nI > 4 * dc or nJ > 4 * dc * dr or nK > 4 * dc * dc * dr:
        raise BoundViolation(
            f"|I|={nI}, |J|={nJ}, |K|={nK} exceed the bounds for dc={dc}, dr={dr}"
        )
    if nI > 2 * dc:
        log.warning("|I|=%d exceeds the single-swap bound 2*dc=%d", nI, 2 * dc)


@dataclass
class RepairSystem:
    """Flattened repair problem for Delta restricted to I x J.

    Variable ``a * |J| + b`` is Delta[I[a], J[b]] (row-major). ``parity_rows``
    holds the m = |K||I| orthogonality equations as packed rows, equation
    ``c * |I| + a`` being (K[c], I[a]). ``signs[t]`` is 1 - 2 H_Z at variable t.
    """

    I: tuple[int, ...]
    J: tuple[int, ...]
    K: tuple[int, ...]
    parity_rows: list[int]
    parity_rhs: list[int]
    signs: list[int]
    hz_block: BitMatrix  # (H_Z)_{I,J}
    _rank: int | None = field(default=None, repr=False)

    @property
    def v(self) -> int:
        return len(self.I) * len(self.J)

    @property
    def m(self) -> int:
        return len(self.parity_rows)

    def var_index(self, i: int, j: int) -> int:
        """Position of Delta[i, j] (global indices) in vec(Delta_{I,J})."""
        return self.I.index(i) * len(self.J) + self.J.index(j)

    def var_of(self, t: int) -> tuple[int, int]:
        a, b = divmod(t, len(self.J))
        return self.I[a], self.J[b]

    def balance_row_masks(self) -> list[int]:
        nJ = len(self.J)
        full = (1 << nJ) - 1
        return [full << (a * nJ) for a in range(len(self.I))]

    def balance_col_masks(self) -> list[int]:
        nJ = len(self.J)
        col = 0
        for a in range(len(self.I)):
            col |= 1 << (a * nJ)
        return [col << b for b in range(nJ)]

    def balance_rows(self) -> list[dict[int, int]]:
        """Signed coefficients {variable: +-1} of each row balance constraint."""
        return [{t: self.signs[t] for t in bits_of(m)} for m in self.balance_row_masks()]

    def balance_cols(self) -> list[dict[int, int]]:
        return [{t: self.signs[t] for t in bits_of(m)} for m in self.balance_col_masks()]

    def elimination_rows(self) -> tuple[list[int], list[int]]:
        """Parity rows plus the implied even-flip parities of every balance line."""
        extra = self.balance_row_masks() + self.balance_col_masks()
        return self.parity_rows + extra, self.parity_rhs + [0] * len(extra)

    def parity_matrix(self) -> BitMatrix:
        rows, _ = self.elimination_rows()
        return BitMatrix(len(rows), self.v, rows)

    def orthogonality_matrix(self) -> BitMatrix:
        return BitMatrix(self.m, self.v, self.parity_rows)

    @property
    def rank(self) -> int:
        """GF(2) rank of the full parity system (orthogonality + balance parities)."""
        if self._rank is None:
            self._rank = gf2_rank(self.parity_matrix())
        return self._rank

    @property
    def nullity(self) -> int:
        return self.v - self.rank

    def check_bounds(self, dc: int, dr: int) -> None:
        if self.v > 4 * dc * dc * dr or self.m > 4 * dc**3 * dr:
            raise BoundViolation(f"v={self.v}, m={self.m} exceed bounds for dc={dc}, dr={dr}")


def assemble_repair_system(patch: ViolationPatch, hx_prime: BitMatrix, hz: BitMatrix) -> RepairSystem:
    if patch.empty:
        raise EmptyPatchError("nothing to repair")
    I = as_index_set(patch.I, hz.nrows)
    J = as_index_set(patch.J, hz.ncols)
    K = as_index_set(patch.K, hx_prime.nrows)
    nI, nJ = len(I), len(J)

    # row k of (H'_X)_{K,J} packed over J positions
    kj = []
    for k in K:
        rk = hx_prime.rows[k]
        x = 0
        for b, j in enumerate(J):
            if (rk >> j) & 1:
                x |= 1 << b
        kj.append(x)

    rows, rhs = [], []
    for c, k in enumerate(K):
        res = patch.residual.rows[c]
        for a in range(nI):
            rows.append(kj[c] << (a * nJ))
            rhs.append((res >> a) & 1)

    block_rows = []
    signs = []
    for i in I:
        ri = hz.rows[i]
        x = 0
        for b, j in enumerate(J):
            bit = (ri >> j) & 1
            x |= bit << b
            signs.append(1 - 2 * bit)
        block_rows.append(x)
    return RepairSystem(I, J, K, rows, rhs, signs, BitMatrix(nI, nJ, block_rows))
