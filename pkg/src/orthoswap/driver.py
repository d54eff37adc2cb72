"""
The switch-and-repair loop.

Each accepted iteration perturbs one matrix of the pair with a random cross
swap and repairs the other so that ``H_X @ H_Z.T == 0`` again. Iteration t
perturbs H_X when t is even and H_Z when t is odd; the roles only alternate
on success, and rejected attempts do not use up an iteration.

A run is a pure function of its config: the swap stream comes from
``Xoshiro256(rng_seed)`` and the solver is deterministic, so the final pair,
the stats (minus wall times) and the manifest are reproducible bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from dataclasses import asdict, dataclass, field
from math import comb
from pathlib import Path

import numpy as np

from . import __version__
from .formats import read_matrix, to_alist, write_matrix
from .gf2 import BitMatrix, gf2_rank, mat_mul_transpose
from .localize import assemble_repair_system, check_locality_bounds, compute_violation
from .perturb import CrossSwap, Xoshiro256, apply_cross_swap, sample_cross_swap
from .repair import BudgetExhausted, Infeasible, SolverBudget, apply_delta, solve_min_flip
from .seedgen import OrthoPair, SeedParams, build_tiled_seed, weight_histogram

log = logging.getLogger(__name__)

RNG_NAME = "xoshiro256** seeded by splitmix64"

# Large enough that nearly every repair at (dc, dr) = (3, 8) is proven
# optimal, small enough that a stalled search costs well under a second.
DEFAULT_DRIVER_BUDGET = SolverBudget(max_nodes=20_000, mode="best-within-budget")


class VerificationError(RuntimeError):
    """A repaired pair failed the full check. This indicates a bug."""


class RunAborted(RuntimeError):
    """Too many consecutive rejected swaps; carries the partial result."""

    def __init__(self, message: str, pair: OrthoPair, stats: "RunStats"):
        super().__init__(message)
        self.pair = pair
        self.stats = stats


@dataclass
class RunConfig:
    seed_params: SeedParams | None = None
    hx_path: str | None = None
    hz_path: str | None = None
    iterations: int = 0
    rng_seed: int = 0
    budget: SolverBudget = DEFAULT_DRIVER_BUDGET
    max_consecutive_rejects: int = 1000
    out_hx: str | None = None
    out_hz: str | None = None
    out_format: str = "alist"
    manifest_path: str | None = None
    stats_path: str | None = None
    emit_manifest: bool = False

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if self.max_consecutive_rejects < 1:
            raise ValueError("max_consecutive_rejects must be at least 1")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must fit in 64 bits")
        has_paths = self.hx_path is not None or self.hz_path is not None
        if (self.seed_params is None) == (not has_paths):
            raise ValueError("give either seed_params or both input paths")
        if has_paths and (self.hx_path is None or self.hz_path is None):
            raise ValueError("both hx_path and hz_path are required")

    def describe(self) -> dict:
        """JSON-ready view of the settings that determine the run's output."""
        return {
            "seed_params": asdict(self.seed_params) if self.seed_params else None,
            "hx_path": self.hx_path,
            "hz_path": self.hz_path,
            "iterations": self.iterations,
            "rng_seed": self.rng_seed,
            "budget": {"max_nodes": self.budget.max_nodes, "mode": self.budget.mode},
            "max_consecutive_rejects": self.max_consecutive_rejects,
        }


@dataclass
class IterationRecord:
    iteration: int
    perturbed: str  # "hx" or "hz"
    swap: tuple[int, int, int, int]
    nI: int
    nJ: int
    nK: int
    v: int
    m: int
    rank: int
    flip_count: int
    nodes: int
    optimal: bool
    wall_time: float


@dataclass
class RunStats:
    iterations_completed: int = 0
    attempts: int = 0
    swaps_rejected_infeasible: int = 0
    swaps_rejected_budget: int = 0
    swaps_no_violation: int = 0
    records: list[IterationRecord] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    @property
    def swaps_rejected(self) -> int:
        return self.swaps_rejected_infeasible + self.swaps_rejected_budget

    def to_dict(self, timings: bool = True) -> dict:
        """JSON-ready stats. ``timings=False`` drops the only non-reproducible field."""
        recs = []
        for r in self.records:
            d = asdict(r)
            d["swap"] = list(r.swap)
            if not timings:
                del d["wall_time"]
            recs.append(d)
        return {
            "iterations_completed": self.iterations_completed,
            "attempts": self.attempts,
            "swaps_rejected_infeasible": self.swaps_rejected_infeasible,
            "swaps_rejected_budget": self.swaps_rejected_budget,
            "swaps_no_violation": self.swaps_no_violation,
            "records": recs,
            "diagnostics": self.diagnostics,
        }

    def summary(self) -> dict:
        repaired = [r for r in self.records if r.v]
        return {
            "iterations_completed": self.iterations_completed,
            "attempts": self.attempts,
            "swaps_rejected_infeasible": self.swaps_rejected_infeasible,
            "swaps_rejected_budget": self.swaps_rejected_budget,
            "swaps_no_violation": self.swaps_no_violation,
            "max_v": max((r.v for r in repaired), default=0),
            "max_m": max((r.m for r in repaired), default=0),
            "total_flips": sum(r.flip_count for r in repaired),
            "non_optimal_repairs": sum(not r.optimal for r in repaired),
        }


@dataclass
class VerifyReport:
    orthogonal: bool
    histograms_match: bool
    lines_match: bool | None = None  # per-line weights against a reference pair
    nonzero_products: int = 0

    @property
    def ok(self) -> bool:
        return self.orthogonal and self.histograms_match and self.lines_match is not False


def verify_pair(pair: OrthoPair, reference: OrthoPair | None = None) -> VerifyReport:
    """Recompute orthogonality and weights from scratch.

    Histograms are compared with the ones recorded on ``pair`` (or on
    ``reference`` when given). With a reference, every row and column weight
    is also compared line by line.
    """
    prod = mat_mul_transpose(pair.hx, pair.hz)
    ref = reference if reference is not None else pair
    hist = (
        weight_histogram(pair.hx.row_weights()) == ref.row_hist_x
        and weight_histogram(pair.hx.col_weights()) == ref.col_hist_x
        and weight_histogram(pair.hz.row_weights()) == ref.row_hist_z
        and weight_histogram(pair.hz.col_weights()) == ref.col_hist_z
    )
    lines = None
    if reference is not None:
        lines = _same_line_weights(pair.hx, reference.hx) and _same_line_weights(pair.hz, reference.hz)
    return VerifyReport(prod.is_zero(), hist, lines, prod.nnz())


def _same_line_weights(a: BitMatrix, b: BitMatrix) -> bool:
    return (
        a.shape == b.shape
        and np.array_equal(a.row_weights(), b.row_weights())
        and np.array_equal(a.col_weights(), b.col_weights())
    )


def four_cycles(h: BitMatrix) -> int:
    """Number of length-4 cycles in the Tanner graph of ``h``.

    Two rows sharing s columns close C(s, 2) of them.
    """
    rows = h.rows
    total = 0
    for a in range(len(rows)):
        ra = rows[a]
        if not ra:
            continue
        for b in range(a + 1, len(rows)):
            s = (ra & rows[b]).bit_count()
            if s > 1:
                total += comb(s, 2)
    return total


def diagnostics(pair: OrthoPair) -> dict:
    rank_x, rank_z = gf2_rank(pair.hx), gf2_rank(pair.hz)
    out = {"n": pair.n, "k": pair.n - rank_x - rank_z}
    for name, h, r in (("hx", pair.hx, rank_x), ("hz", pair.hz, rank_z)):
        out[name] = {
            "shape": list(h.shape),
            "rank": r,
            "four_cycles": four_cycles(h),
            "row_weights": {str(w): c for w, c in weight_histogram(h.row_weights()).items()},
            "col_weights": {str(w): c for w, c in weight_histogram(h.col_weights()).items()},
        }
    return out


def save_pair(pair: OrthoPair, hx_path, hz_path, fmt: str = "alist") -> None:
    write_matrix(pair.hx, hx_path, fmt)
    write_matrix(pair.hz, hz_path, fmt)


def load_pair_files(hx_path, hz_path) -> OrthoPair:
    return OrthoPair.create(read_matrix(hx_path), read_matrix(hz_path))


def initial_pair(cfg: RunConfig) -> OrthoPair:
    if cfg.seed_params is not None:
        return build_tiled_seed(cfg.seed_params)
    return load_pair_files(cfg.hx_path, cfg.hz_path)


def matrix_digest(h: BitMatrix) -> str:
    return hashlib.sha256(to_alist(h).encode()).hexdigest()


def build_manifest(cfg: RunConfig, seed: OrthoPair, final: OrthoPair, stats: RunStats) -> dict:
    """Everything needed to reproduce and check a run; contains no timings."""
    return {
        "generator": "orthoswap",
        "version": __version__,
        "rng": {"algorithm": RNG_NAME, "seed": cfg.rng_seed},
        "config": cfg.describe(),
        "seed_sha256": {"hx": matrix_digest(seed.hx), "hz": matrix_digest(seed.hz)},
        "final_sha256": {"hx": matrix_digest(final.hx), "hz": matrix_digest(final.hz)},
        "stats": stats.summary(),
        "diagnostics": stats.diagnostics,
    }


def _dump_json(obj, path) -> None:
    try:
        Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    except OSError as e:
        raise OSError(f"cannot write {path}: {e.strerror}") from e


def randomize_run(cfg: RunConfig, on_accept=None) -> tuple[OrthoPair, RunStats]:
    """Run ``cfg.iterations`` accepted switch-and-repair iterations.

    ``on_accept(record, hx, hz)``, if given, is called after every accepted
    iteration with the new matrices.

    Raises:
        RunAborted: ``cfg.max_consecutive_rejects`` swaps in a row had no
            usable repair. The exception carries the pair and stats so far.
        VerificationError: a repaired pair failed the full check.
    """
    seed = initial_pair(cfg)
    dc, dr = seed.max_degrees()
    rng = Xoshiro256(cfg.rng_seed)
    hx, hz = seed.hx, seed.hz
    stats = RunStats()
    rejects_in_row = 0

    def current() -> OrthoPair:
        return OrthoPair(hx, hz, seed.row_hist_x, seed.col_hist_x, seed.row_hist_z, seed.col_hist_z)

    t = 0
    while t < cfg.iterations:
        stats.attempts += 1
        perturb_x = t % 2 == 0
        active, passive = (hx, hz) if perturb_x else (hz, hx)
        sw = sample_cross_swap(active, rng)

        start = time.perf_counter()
        active2 = apply_cross_swap(active, sw)
        patch = compute_violation(active2, passive, sw)
        if patch.empty:
            passive2 = passive
            rec = dict(nI=0, nJ=0, nK=0, v=0, m=0, rank=0, flip_count=0, nodes=0, optimal=True)
        else:
            check_locality_bounds(patch, dc, dr)
            sys = assemble_repair_system(patch, active2, passive)
            sys.check_bounds(dc, dr)
            outcome = solve_min_flip(sys, passive, cfg.budget)
            if isinstance(outcome, (Infeasible, BudgetExhausted)):
                if isinstance(outcome, Infeasible):
                    stats.swaps_rejected_infeasible += 1
                else:
                    stats.swaps_rejected_budget += 1
                rejects_in_row += 1
                log.debug("iteration %d: %s rejected (%s)", t, sw, type(outcome).__name__)
                if rejects_in_row >= cfg.max_consecutive_rejects:
                    stats.diagnostics = diagnostics(current())
                    raise RunAborted(
                        f"{rejects_in_row} consecutive swaps rejected at iteration {t}", current(), stats
                    )
                continue
            dp = outcome.patch
            passive2 = apply_delta(passive, dp)
            rec = dict(
                nI=len(patch.I), nJ=len(patch.J), nK=len(patch.K), v=sys.v, m=sys.m,
                rank=outcome.rank, flip_count=dp.flip_count, nodes=outcome.nodes, optimal=dp.optimal,
            )
        elapsed = time.perf_counter() - start

        new_hx, new_hz = (active2, passive2) if perturb_x else (passive2, active2)
        if not mat_mul_transpose(new_hx, new_hz).is_zero():
            raise VerificationError(f"iteration {t}: pair not orthogonal after repairing {sw}")
        if not (_same_line_weights(new_hx, seed.hx) and _same_line_weights(new_hz, seed.hz)):
            raise VerificationError(f"iteration {t}: line weights changed after repairing {sw}")

        hx, hz = new_hx, new_hz
        if not rec["v"]:
            stats.swaps_no_violation += 1
        stats.records.append(
            IterationRecord(t, "hx" if perturb_x else "hz", (sw.i1, sw.j1, sw.i2, sw.j2), wall_time=elapsed, **rec)
        )
        rejects_in_row = 0
        t += 1
        stats.iterations_completed = t
        if on_accept is not None:
            on_accept(stats.records[-1], hx, hz)

    final = current()
    stats.diagnostics = diagnostics(final)
    _write_outputs(cfg, seed, final, stats)
    return final, stats


def _write_outputs(cfg: RunConfig, seed: OrthoPair, final: OrthoPair, stats: RunStats) -> None:
    if cfg.out_hx:
        write_matrix(final.hx, cfg.out_hx, cfg.out_format)
    if cfg.out_hz:
        write_matrix(final.hz, cfg.out_hz, cfg.out_format)
    if cfg.stats_path:
        _dump_json(stats.to_dict(), cfg.stats_path)
    if cfg.emit_manifest:
        path = cfg.manifest_path or os.path.join(os.getcwd(), "manifest.json")
        _dump_json(build_manifest(cfg, seed, final, stats), path)


def replay_swap(pair: OrthoPair, sw: CrossSwap, perturb: str = "hx"):
    """Apply one swap to ``pair`` and return the violation patch and system inputs.

    A convenience for inspecting a single step; ``perturb`` names the matrix
    that receives the swap.
    """
    active, passive = (pair.hx, pair.hz) if perturb == "hx" else (pair.hz, pair.hx)
    active2 = apply_cross_swap(active, sw)
    return compute_violation(active2, passive, sw), active2, passive
