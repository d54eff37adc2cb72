"""
Repair cost does not depend on the code length.

Runs 50 iterations at P = 4, 16, 64 (n = 32, 128, 512) with dc=3, dr=8
and prints the size of the repair systems and the time per repair.

    python3 demos/04_size_independence.py
"""

import statistics

from orthoswap import RunConfig, SeedParams, randomize_run

print(f"{'P':>4} {'n':>5} {'max v':>6} {'max m':>6} {'median v':>9} {'median ms':>10} {'rejected':>9}")
for P in (4, 16, 64):
    _, stats = randomize_run(RunConfig(seed_params=SeedParams(P, 3, 8), iterations=50, rng_seed=2026))
    recs = [r for r in stats.records if r.v]
    print(f"{P:>4} {8 * P:>5} {max(r.v for r in recs):>6} {max(r.m for r in recs):>6} "
          f"{statistics.median(r.v for r in recs):>9} "
          f"{1e3 * statistics.median(r.wall_time for r in recs):>10.1f} {stats.swaps_rejected:>9}")
print("\nbounds for dc=3, dr=8: v <= 288, m <= 864")
