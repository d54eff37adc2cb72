"""
One swap, one repair, step by step.

Starts from the tiled seed with P=4, dc=3, dr=8 (a 12 x 32 pair), swaps
rows 10 and 7 of H_X at columns 6 and 23, and walks through localization,
the repair system, the solve and the final check.

    python3 demos/01_single_repair.py
"""

import numpy as np

from orthoswap import (
    CrossSwap,
    SeedParams,
    SolverBudget,
    apply_cross_swap,
    apply_delta,
    assemble_repair_system,
    build_tiled_seed,
    compute_violation,
    mat_mul_transpose,
    solve_min_flip,
)

pair = build_tiled_seed(SeedParams(P=4, dc=3, dr=8))
print(f"seed: H_X and H_Z are {pair.hx.shape}, orthogonal:", mat_mul_transpose(pair.hx, pair.hz).is_zero())

swap = CrossSwap(10, 6, 7, 23)
hx2 = apply_cross_swap(pair.hx, swap)
product = mat_mul_transpose(hx2, pair.hz).to_dense()
print(f"\nafter {swap}: {int(product.sum())} odd inner products")

patch = compute_violation(hx2, pair.hz, swap)
print("I =", patch.I)
print("J =", patch.J)
print("K =", patch.K)

sys = assemble_repair_system(patch, hx2, pair.hz)
print(f"\nrepair system: v = {sys.v} unknowns, m = {sys.m} parity rows")
print(f"rank with the balance parities = {sys.rank}, free bits = {sys.nullity}")

out = solve_min_flip(sys, pair.hz, SolverBudget(mode="prove-optimal"))
dp = out.patch
print(f"\nsolver: {dp.flip_count} flips, proven minimal = {dp.optimal}, {out.nodes} search nodes")
print("Delta restricted to I x J:")
print(dp.delta)

hz2 = apply_delta(pair.hz, dp)
print("\nrepaired pair orthogonal:", mat_mul_transpose(hx2, hz2).is_zero())
print("row weights of H'_Z:", sorted(set(hz2.row_weights().tolist())))
print("column weights of H'_Z:", sorted(set(hz2.col_weights().tolist())))
changed = np.argwhere(pair.hz.to_dense() != hz2.to_dense())
print(f"{len(changed)} entries of H_Z changed, all inside I x J:",
      set(map(int, changed[:, 0])) <= set(patch.I) and set(map(int, changed[:, 1])) <= set(patch.J))
