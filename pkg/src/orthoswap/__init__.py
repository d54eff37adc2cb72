"""Random orthogonal (H_X, H_Z) pairs for CSS LDPC codes by swap-and-repair."""

__version__ = "0.1.0"

from .gf2 import BitMatrix, gf2_eliminate, gf2_rank, mat_mul_transpose, row_col_weights
from .formats import FormatError, from_alist, parse_matrix, read_matrix, to_alist, write_matrix
from .seedgen import NotOrthogonalError, OrthoPair, SeedParams, build_tiled_seed, load_pair
from .perturb import CrossSwap, Xoshiro256, apply_cross_swap, sample_cross_swap
from .localize import RepairSystem, ViolationPatch, assemble_repair_system, compute_violation
from .repair import (
    BudgetExhausted,
    DeltaPatch,
    Infeasible,
    Solution,
    SolverBudget,
    apply_delta,
    export_ilp,
    solve_min_flip,
)
from .driver import RunAborted, RunConfig, RunStats, diagnostics, randomize_run, verify_pair

__all__ = [
    "BitMatrix", "gf2_eliminate", "gf2_rank", "mat_mul_transpose", "row_col_weights",
    "FormatError", "from_alist", "parse_matrix", "read_matrix", "to_alist", "write_matrix",
    "NotOrthogonalError", "OrthoPair", "SeedParams", "build_tiled_seed", "load_pair",
    "CrossSwap", "Xoshiro256", "apply_cross_swap", "sample_cross_swap",
    "RepairSystem", "ViolationPatch", "assemble_repair_system", "compute_violation",
    "BudgetExhausted", "DeltaPatch", "Infeasible", "Solution", "SolverBudget",
    "apply_delta", "export_ilp", "solve_min_flip",
    "RunAborted", "RunConfig", "RunStats", "diagnostics", "randomize_run", "verify_pair",
]
