"""
Cross-check a repair with an off-the-shelf MILP solver.

Writes the repair problem of the single-swap example as a CPLEX LP file and,
if SciPy is installed, solves it with HiGHS through ``scipy.optimize.milp``.
Any MILP solver that reads LP files (HiGHS, CBC, Gurobi, CPLEX) can be used
on the written file instead.

    python3 demos/03_external_solver.py [out.lp]
"""

import sys
import time
from pathlib import Path

from orthoswap import (
    CrossSwap,
    SeedParams,
    SolverBudget,
    apply_cross_swap,
    assemble_repair_system,
    build_tiled_seed,
    compute_violation,
    export_ilp,
    solve_min_flip,
)

out = Path(sys.argv[1] if len(sys.argv) > 1 else "repair.lp")
pair = build_tiled_seed(SeedParams(4, 3, 8))
swap = CrossSwap(10, 6, 7, 23)
hx2 = apply_cross_swap(pair.hx, swap)
sys_ = assemble_repair_system(compute_violation(hx2, pair.hz, swap), hx2, pair.hz)

text = export_ilp(sys_)
out.write_text(text)
print(f"wrote {out} ({len(text.splitlines())} lines)")

t = time.perf_counter()
ours = solve_min_flip(sys_, pair.hz, SolverBudget(mode="prove-optimal"))
print(f"built-in search: {ours.patch.flip_count} flips in {time.perf_counter() - t:.3f} s")

try:
    import numpy as np
    from scipy.optimize import Bounds, LinearConstraint, milp
except ImportError:
    print("SciPy not installed; solve the LP file with any MILP solver")
    sys.exit(0)

# the same model built directly: x then one slack per parity row
v, m = sys_.v, sys_.m
A = np.zeros((m + len(sys_.I) + len(sys_.J), v + m))
b = np.zeros(A.shape[0])
for r, (row, rhs) in enumerate(zip(sys_.parity_rows, sys_.parity_rhs)):
    for t_ in range(v):
        A[r, t_] = (row >> t_) & 1
    A[r, v + r] = -2
    b[r] = rhs
for q, line in enumerate(sys_.balance_rows() + sys_.balance_cols()):
    for t_, s in line.items():
        A[m + q, t_] = s
ub = np.concatenate([np.ones(v), [bin(r).count("1") // 2 for r in sys_.parity_rows]])
c = np.concatenate([np.ones(v), np.zeros(m)])
t = time.perf_counter()
res = milp(c, constraints=LinearConstraint(A, b, b), bounds=Bounds(0, ub), integrality=np.ones(v + m))
print(f"HiGHS:           {round(res.fun)} flips in {time.perf_counter() - t:.3f} s ({res.message})")
