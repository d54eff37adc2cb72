"""
Minimum-flip repair of H_Z.

Given a :class:`RepairSystem`, find a binary Delta on I x J that satisfies
the orthogonality parities and the signed balance constraints with as few
ones as possible, then XOR it into H_Z.

The solver is a deterministic branch-and-bound over the GF(2) solution coset.
Because parity equation (k, i) only involves row i of Delta, the coset is a
product of per-row cosets ``{y : M y = s_i}`` with ``M = (H'_X)_{K,J}``, cut
down by the column parities. The default search therefore branches on whole
rows:

* each row's coset is enumerated (vectorised) and filtered by that row's
  balance constraint, then sorted by weight;
* rows are chosen in order of increasing candidate count; a node is pruned
  when the flips so far plus the lightest completion of the remaining rows
  reach the incumbent, or when some column imbalance can no longer be
  cancelled by the rows left;
* the last row is forced by the column imbalance and found by lookup.

When a row coset is too large to enumerate the solver falls back to a
bit-level search: free variables of the reduced echelon form in ascending
order, value 0 before 1, pivots forced as soon as their free variables are
fixed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Union

import numpy as np

from .gf2 import BitMatrix, bits_of, reduce_rows, xor_patch
from .localize import RepairSystem

log = logging.getLogger(__name__)

MODES = ("prove-optimal", "first-feasible", "best-within-budget")

# Largest per-row coset dimension enumerated explicitly (2**20 members).
ENUM_DIM_CAP = 20


@dataclass(frozen=True)
class SolverBudget:
    max_nodes: int = 1_000_000
    mode: str = "best-within-budget"

    def __post_init__(self):
        if self.max_nodes < 1:
            raise ValueError("max_nodes must be at least 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


@dataclass
class DeltaPatch:
    I: tuple[int, ...]
    J: tuple[int, ...]
    delta: BitMatrix
    flip_count: int
    optimal: bool


@dataclass
class Solution:
    patch: DeltaPatch
    nodes: int = 0
    rank: int = 0


@dataclass
class Infeasible:
    nodes: int = 0
    rank: int = 0
    reason: str = ""


@dataclass
class BudgetExhausted:
    incumbent: DeltaPatch | None = None
    nodes: int = 0
    rank: int = 0


SolveOutcome = Union[Solution, Infeasible, BudgetExhausted]


class _OutOfNodes(Exception):
    pass


def _popcount(a: np.ndarray) -> np.ndarray:
    return np.bitwise_count(a).astype(np.int64)


def _span(basis: list[int]) -> np.ndarray:
    out = np.zeros(1, dtype=np.uint64)
    for b in basis:
        out = np.concatenate([out, out ^ np.uint64(b)])
    return out


def _row_cosets(sys: RepairSystem):
    """Particular solution of ``M y = s_a`` for every row a, and a basis of ker M.

    Returns ``(particulars, basis)``; ``particulars`` is ``None`` when some
    row system is inconsistent.
    """
    nI, nJ = len(sys.I), len(sys.J)
    full = (1 << nJ) - 1
    # row c of M, with the rhs bits of every Delta row carried above bit nJ
    work = []
    for c in range(len(sys.K)):
        hi = 0
        for a in range(nI):
            hi |= sys.parity_rhs[c * nI + a] << a
        work.append((sys.parity_rows[c * nI] & full) | (hi << nJ))
    r = 0
    pivots = []
    for col in range(nJ):
        bit = 1 << col
        p = next((t for t in range(r, len(work)) if work[t] & bit), None)
        if p is None:
            continue
        work[r], work[p] = work[p], work[r]
        for t in range(len(work)):
            if t != r and work[t] & bit:
                work[t] ^= work[r]
        pivots.append(col)
        r += 1
    if any(w >> nJ for w in work[r:]):
        return None, []
    particulars = []
    for a in range(nI):
        y = 0
        for t, col in enumerate(pivots):
            if (work[t] >> (nJ + a)) & 1:
                y |= 1 << col
        particulars.append(y)
    pivset = set(pivots)
    basis = []
    for f in range(nJ):
        if f in pivset:
            continue
        vec = 1 << f
        for t, col in enumerate(pivots):
            if (work[t] >> f) & 1:
                vec |= 1 << col
        basis.append(vec)
    return particulars, basis


class _Search:
    def __init__(self, sys: RepairSystem, budget: SolverBudget):
        self.sys = sys
        self.budget = budget
        self.nodes = 0
        self.cap = budget.max_nodes
        self.best_weight = sys.v + 1
        self.best: list[int] | None = None  # Delta rows over J positions, in I order
        self.stop = False
        self.stop_on_first = budget.mode == "first-feasible"

    def tick(self):
        self.nodes += 1
        if self.nodes > self.cap:
            raise _OutOfNodes

    def record(self, weight: int, rows: list[int]):
        if weight < self.best_weight:
            self.best_weight = weight
            self.best = list(rows)
            if self.stop_on_first:
                self.stop = True


def _row_order(ones: list[int], nI: int) -> list[int]:
    """Greedy row order that closes columns early.

    A column stops accepting new additions once every row with a 1 there has
    been fixed, so rows sharing ones with the rows already placed go first.
    """
    order: list[int] = []
    placed = 0
    remaining = list(range(nI))
    while remaining:
        def key(a):
            return (-(ones[a] & placed).bit_count(), a)
        nxt = min(remaining, key=key)
        remaining.remove(nxt)
        order.append(nxt)
        placed |= ones[nxt]
    return order


class _RowSearch:
    """Row-level branch and bound over the per-row balanced cosets."""

    def __init__(self, sys: RepairSystem, particulars, basis, st: _Search):
        self.sys = sys
        self.st = st
        nI, nJ = len(sys.I), len(sys.J)
        self.nI, self.nJ = nI, nJ
        full = (1 << nJ) - 1
        ones = list(sys.hz_block.rows)
        self.ones = ones
        span = _span(basis)

        cands = {}
        for a in range(nI):
            c = span ^ np.uint64(particulars[a])
            o = np.uint64(ones[a])
            w1 = _popcount(c & o)
            w0 = _popcount(c & ~o & np.uint64(full))
            keep = w1 == w0
            c, w = c[keep], (w1 + w0)[keep]
            order = np.lexsort((c, w))
            cands[a] = (c[order], w[order])
        self.cands = cands
        self.feasible = all(cands[a][0].size for a in range(nI))
        if not self.feasible:
            return

        levels = _row_order(ones, nI)
        self.levels = levels
        L = nI
        minrest = [0] * (L + 1)
        maxrest = [0] * (L + 1)
        for l in range(L - 1, -1, -1):
            minrest[l] = minrest[l + 1] + int(cands[levels[l]][1][0])
            maxrest[l] = maxrest[l + 1] + int(cands[levels[l]][1][-1])
        self.minrest, self.maxrest = minrest, maxrest
        # removals / additions still available from rows at levels >= l
        remcap = [[0] * nJ for _ in range(L + 1)]
        addcap = [[0] * nJ for _ in range(L + 1)]
        for l in range(L - 1, -1, -1):
            rc, ac = remcap[l + 1][:], addcap[l + 1][:]
            o = ones[levels[l]]
            for b in range(nJ):
                if (o >> b) & 1:
                    rc[b] += 1
                else:
                    ac[b] += 1
            remcap[l], addcap[l] = rc, ac
        self.remcap, self.addcap = remcap, addcap

        self.last = levels[-1]
        by_value = np.argsort(cands[self.last][0], kind="stable")
        self.last_vals = cands[self.last][0][by_value]
        self.last_wts = cands[self.last][1][by_value]
        self.e = [0] * nJ  # additions minus removals per column
        self.chosen = [0] * nI

    @property
    def lower_bound(self) -> int:
        return self.minrest[0]

    @property
    def upper_bound(self) -> int:
        return self.maxrest[0]

    def _masks(self, l: int):
        """Bit constraints on the row placed at level l, given the current e.

        Returns None for a dead node, else ``(must, forbid, nz0, nz1, dec)``:
        bits that must / must not be flipped, columns left unbalanced when
        the bit is 0 / 1, and the columns where a flip reduces |e|.
        """
        o = self.ones[self.levels[l]]
        rc, ac = self.remcap[l + 1], self.addcap[l + 1]
        e = self.e
        must = forbid = nz0 = nz1 = dec = 0
        for b in range(self.nJ):
            x = e[b]
            x1 = x - 1 if (o >> b) & 1 else x + 1
            ok0 = -ac[b] <= x <= rc[b]
            ok1 = -ac[b] <= x1 <= rc[b]
            bit = 1 << b
            if not ok0:
                if not ok1:
                    return None
                must |= bit
            elif not ok1:
                forbid |= bit
            if x:
                nz0 |= bit
            if abs(x1) < abs(x):
                dec |= bit
            if x1:
                nz1 |= bit
        return must, forbid, nz0, nz1, dec

    def _survivors(self, l: int, cur: int, sum_abs: int):
        """Candidates for level l that pass capacity and bound checks.

        Every unit of column imbalance left after level l costs at least one
        more flip, so the remaining rows need max(sum |e|, their minimum
        weights) flips.
        """
        got = self._masks(l)
        if got is None:
            return None
        must, forbid, nz0, nz1, dec = got
        ys, ws = self.cands[self.levels[l]]
        rest = self.minrest[l + 1]
        room = self.st.best_weight - cur
        k = int(np.searchsorted(ws, room - rest, side="left"))
        ys, ws = ys[:k], ws[:k]
        if must or forbid:
            sel = (ys & np.uint64(must | forbid)) == np.uint64(must)
            ys, ws = ys[sel], ws[sel]
        s_new = sum_abs + ws - 2 * _popcount(ys & np.uint64(dec))
        sel = np.maximum(s_new, rest) + ws < room
        return ys[sel], ws[sel], s_new[sel], nz0, nz1

    def _finish(self, l: int, cur: int, sum_abs: int):
        # the last row is forced by the column imbalance left after level l
        st = self.st
        st.tick()
        got = self._survivors(l, cur, sum_abs)
        if got is None:
            return
        ys, ws, _, nz0, nz1 = got
        if ys.size == 0:
            return
        need = (np.uint64(nz0) & ~ys) | (np.uint64(nz1) & ys)
        at = np.searchsorted(self.last_vals, need)
        at = np.minimum(at, self.last_vals.size - 1)
        hit = self.last_vals[at] == need
        if not hit.any():
            return
        totals = np.where(hit, ws + self.last_wts[at], self.sys.v + 1)
        k = int(np.argmin(totals))
        if cur + int(totals[k]) < st.best_weight:
            self.chosen[self.levels[l]] = int(ys[k])
            self.chosen[self.last] = int(need[k])
            st.record(cur + int(totals[k]), self.chosen)

    def _descend(self, l: int, cur: int, sum_abs: int):
        st = self.st
        if l == self.nI - 2:
            self._finish(l, cur, sum_abs)
            return
        st.tick()
        got = self._survivors(l, cur, sum_abs)
        if got is None:
            return
        ys, ws, ss, _, _ = got
        a = self.levels[l]
        o = self.ones[a]
        e = self.e
        rest = self.minrest[l + 1]
        for y, w, s1 in zip(ys.tolist(), ws.tolist(), ss.tolist()):
            if cur + w + max(rest, s1) >= st.best_weight:
                continue
            touched = bits_of(y)
            for b in touched:
                e[b] += -1 if (o >> b) & 1 else 1
            self.chosen[a] = y
            self._descend(l + 1, cur + w, s1)
            for b in touched:
                e[b] -= -1 if (o >> b) & 1 else 1
            if st.stop:
                return

    def run(self):
        """Search for a solution lighter than ``st.best_weight``."""
        if self.nI == 1:
            self.st.tick()
            if (self.cands[self.last][0] == 0).any() and self.st.best_weight > 0:
                self.st.record(0, [0])
            return
        # an interrupted pass can leave e dirty, so every pass starts clean
        self.e = [0] * self.nJ
        self._descend(0, 0, 0)


def _search_bits(sys: RepairSystem, st: _Search) -> bool:
    """Bit-level coset search. Returns False if the parity system is inconsistent."""
    nI, nJ = len(sys.I), len(sys.J)
    v = sys.v
    rows, rhs = sys.elimination_rows()
    pivots, consistent = reduce_rows(rows, rhs, range(v - 1, -1, -1))
    if not consistent:
        return False
    # pivot t is determined by the free variables below it
    forced = {c: (row ^ (1 << c), b) for c, (row, b) in pivots.items()}
    signs = sys.signs
    rowbal = [0] * nI
    colbal = [0] * nJ
    # capacities of variables >= t per line
    pos_r = [[0] * nI for _ in range(v + 1)]
    neg_r = [[0] * nI for _ in range(v + 1)]
    pos_c = [[0] * nJ for _ in range(v + 1)]
    neg_c = [[0] * nJ for _ in range(v + 1)]
    for t in range(v - 1, -1, -1):
        a, b = divmod(t, nJ)
        pr, nr, pc, nc = pos_r[t + 1][:], neg_r[t + 1][:], pos_c[t + 1][:], neg_c[t + 1][:]
        if signs[t] > 0:
            pr[a] += 1
            pc[b] += 1
        else:
            nr[a] += 1
            nc[b] += 1
        pos_r[t], neg_r[t], pos_c[t], neg_c[t] = pr, nr, pc, nc
    sums = [0, 0]  # sum |rowbal|, sum |colbal|

    def rec(t: int, assign: int, f: int):
        if t == v:
            if f < st.best_weight:
                out = []
                mask = (1 << nJ) - 1
                for a in range(nI):
                    out.append((assign >> (a * nJ)) & mask)
                st.record(f, out)
            return
        if t in forced:
            m, c = forced[t]
            vals = ((c ^ ((assign & m).bit_count() & 1)),)
        else:
            vals = (0, 1)
        a, b = divmod(t, nJ)
        s = signs[t]
        for x in vals:
            st.tick()
            if x:
                ro, co = rowbal[a], colbal[b]
                rowbal[a] = ro + s
                colbal[b] = co + s
                sums[0] += abs(ro + s) - abs(ro)
                sums[1] += abs(co + s) - abs(co)
            nf = f + x
            rb, cb = rowbal[a], colbal[b]
            ok = -neg_r[t + 1][a] <= -rb <= pos_r[t + 1][a] and -neg_c[t + 1][b] <= -cb <= pos_c[t + 1][b]
            if ok and nf + max(sums) < st.best_weight:
                rec(t + 1, assign | (x << t), nf)
            if x:
                rowbal[a] = ro
                colbal[b] = co
                sums[0] -= abs(ro + s) - abs(ro)
                sums[1] -= abs(co + s) - abs(co)
            if st.stop:
                return

    rec(0, 0, 0)
    return True


def _deepen(search: _RowSearch, st: _Search, budget: SolverBudget) -> bool:
    """Raise the weight limit two flips at a time (totals are even).

    The first pass that succeeds has found the optimum. In best-within-budget
    mode deepening gets a quarter of the budget first; if that runs out, a
    greedy dive looks for an incumbent and deepening resumes below it with
    whatever budget is left. Returns True when the outcome is proven.
    """
    v = search.sys.v
    st.stop_on_first = True
    limit = search.lower_bound
    ceiling = search.upper_bound
    incumbent, incumbent_weight = None, v + 1

    def deepen():
        nonlocal limit
        while limit <= ceiling:
            st.best, st.best_weight, st.stop = None, limit + 1, False
            search.run()
            if st.best is not None:
                return True
            limit += 2
        return False

    if budget.mode == "best-within-budget":
        st.cap = max(1, budget.max_nodes // 4)
        try:
            if deepen():
                return True
            st.best, st.best_weight = None, v + 1
            return True
        except _OutOfNodes:
            pass
        st.cap = budget.max_nodes
        st.best, st.best_weight, st.stop = None, v + 1, False
        search.run()  # raises _OutOfNodes with no incumbent if the dive stalls
        if st.best is None:
            return True  # the dive covered the whole tree
        incumbent, incumbent_weight = st.best, st.best_weight
        ceiling = min(ceiling, incumbent_weight - 2)

    try:
        found = deepen()
    except _OutOfNodes:
        st.best, st.best_weight = incumbent, incumbent_weight
        raise
    if not found:
        st.best, st.best_weight = incumbent, incumbent_weight
    return True


def solve_min_flip(sys: RepairSystem, hz: BitMatrix | None = None,
                   budget: SolverBudget | None = None, method: str = "auto") -> SolveOutcome:
    """Find the minimum-weight Delta satisfying parities and balance.

    ``hz`` is only used to check that the system's indices fit it. ``method``
    is ``"auto"``, ``"rows"`` or ``"bits"``; auto picks the row search unless a
    row coset is too large to enumerate.
    """
    budget = budget or SolverBudget()
    if hz is not None and (max(sys.I, default=-1) >= hz.nrows or max(sys.J, default=-1) >= hz.ncols):
        raise IndexError("repair system does not fit the given H_Z")
    rows, rhs = sys.elimination_rows()
    pivots, consistent = reduce_rows(rows, rhs, range(sys.v))
    rank = sys._rank = len(pivots)
    if not consistent:
        return Infeasible(0, rank, "parity system inconsistent")

    st = _Search(sys, budget)
    particulars, basis = _row_cosets(sys)
    if particulars is None:
        return Infeasible(0, rank, "row parity system inconsistent")
    use_rows = method == "rows" or (
        method == "auto" and len(sys.J) <= 64 and len(basis) <= ENUM_DIM_CAP
    )
    exhausted = False
    proven = False
    try:
        if use_rows:
            search = _RowSearch(sys, particulars, basis, st)
            if not search.feasible:
                return Infeasible(0, rank, "a row admits no balanced repair")
            if budget.mode == "first-feasible":
                search.run()
            else:
                proven = _deepen(search, st, budget)
        else:
            if not _search_bits(sys, st):
                return Infeasible(st.nodes, rank, "parity system inconsistent")
            proven = not st.stop
    except _OutOfNodes:
        exhausted = True
        st.nodes = budget.max_nodes

    patch = None
    if st.best is not None:
        delta = BitMatrix(len(sys.I), len(sys.J), st.best)
        patch = DeltaPatch(sys.I, sys.J, delta, st.best_weight, proven and not exhausted)
    if exhausted:
        if patch is not None and budget.mode != "prove-optimal":
            return Solution(patch, st.nodes, rank)
        return BudgetExhausted(patch, st.nodes, rank)
    if patch is None:
        return Infeasible(st.nodes, rank, "no balanced member of the solution coset")
    return Solution(patch, st.nodes, rank)


def check_delta(sys: RepairSystem, delta: BitMatrix) -> list[str]:
    """List the constraints of ``sys`` that ``delta`` violates (empty if none)."""
    nJ = len(sys.J)
    x = 0
    for a, r in enumerate(delta.rows):
        x |= r << (a * nJ)
    problems = []
    for r, (row, b) in enumerate(zip(sys.parity_rows, sys.parity_rhs)):
        if (row & x).bit_count() & 1 != b:
            problems.append(f"parity row {r}")
    for name, masks in (("row", sys.balance_row_masks()), ("column", sys.balance_col_masks())):
        for q, m in enumerate(masks):
            total = sum(sys.signs[t] for t in bits_of(m & x))
            if total:
                problems.append(f"{name} balance {q}")
    return problems


def apply_delta(hz: BitMatrix, dp: DeltaPatch) -> BitMatrix:
    return xor_patch(hz, dp.I, dp.J, dp.delta)


def _lp_terms(coeffs: list[tuple[int, str]]) -> str:
    parts = []
    for c, name in coeffs:
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        term = name if mag == 1 else f"{mag} {name}"
        parts.append(f"{sign} {term}")
    text = " ".join(parts)
    return text[2:] if text.startswith("+ ") else text


def _wrap(prefix: str, body: str, width: int = 240) -> list[str]:
    # LP readers limit line length; break on term boundaries
    words = body.split(" ")
    lines, cur = [], prefix
    for w in words:
        if len(cur) + len(w) + 1 > width and cur.strip():
            lines.append(cur)
            cur = "   "
        cur = f"{cur} {w}" if cur else w
    lines.append(cur)
    return lines


def export_ilp(sys: RepairSystem) -> str:
    """CPLEX LP text for the repair ILP.

    Parity ``(k, i)`` becomes ``sum x - 2 s = b`` with integer slack
    ``0 <= s <= floor(support / 2)``; each balance line is an equality with
    coefficients ``1 - 2 H_Z[i, j]``; the objective minimises the total flips.
    Variable ``x_i_j`` is Delta[i, j] in global (0-based) indices.
    """
    names = [f"x_{i}_{j}" for i in sys.I for j in sys.J]
    nI = len(sys.I)
    out = [
        "\\ repair ILP for Delta on I x J",
        f"\\ I = {' '.join(map(str, sys.I))}",
        f"\\ J = {' '.join(map(str, sys.J))}",
        f"\\ K = {' '.join(map(str, sys.K))}",
        f"\\ v = {sys.v}, m = {sys.m}",
        "Minimize",
    ]
    out += _wrap(" obj:", _lp_terms([(1, n) for n in names]))
    out.append("Subject To")
    slack_ub = []
    for r, (row, b) in enumerate(zip(sys.parity_rows, sys.parity_rhs)):
        k, a = divmod(r, nI)
        support = bits_of(row)
        terms = [(1, names[t]) for t in support] + [(-2, f"s_{r}")]
        out += _wrap(f" par_{sys.K[k]}_{sys.I[a]}:", _lp_terms(terms) + f" = {b}")
        slack_ub.append(len(support) // 2)
    for a, m in enumerate(sys.balance_row_masks()):
        terms = [(sys.signs[t], names[t]) for t in bits_of(m)]
        out += _wrap(f" rowbal_{sys.I[a]}:", _lp_terms(terms) + " = 0")
    for b, m in enumerate(sys.balance_col_masks()):
        terms = [(sys.signs[t], names[t]) for t in bits_of(m)]
        out += _wrap(f" colbal_{sys.J[b]}:", _lp_terms(terms) + " = 0")
    out.append("Bounds")
    for r, ub in enumerate(slack_ub):
        out.append(f" 0 <= s_{r} <= {ub}")
    out.append("Binaries")
    out += _wrap("", " ".join(names))
    out.append("Generals")
    out += _wrap("", " ".join(f"s_{r}" for r in range(len(slack_ub))))
    out.append("End")
    return "\n".join(out) + "\n"
