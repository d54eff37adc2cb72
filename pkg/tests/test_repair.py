import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from orthoswap.gf2 import BitMatrix, mat_mul_transpose
from orthoswap.localize import assemble_repair_system, compute_violation
from orthoswap.perturb import Xoshiro256, apply_cross_swap, sample_cross_swap
from orthoswap.repair import (
    BudgetExhausted,
    DeltaPatch,
    Infeasible,
    Solution,
    SolverBudget,
    apply_delta,
    check_delta,
    export_ilp,
    solve_min_flip,
)
from orthoswap.seedgen import SeedParams, build_tiled_seed

from oracles import coset_minimum, parse_lp, random_blocks, solve_lp_text, system_from_blocks

PROVE = SolverBudget(1_000_000, "prove-optimal")


def flips(outcome):
    return outcome.patch.flip_count if isinstance(outcome, Solution) else None


def assert_valid(sys, dp: DeltaPatch):
    assert check_delta(sys, dp.delta) == []
    assert dp.flip_count == dp.delta.nnz()
    # balance makes every affected line flip an even number of entries
    d = dp.delta.to_dense()
    assert not np.any(d.sum(axis=0) % 2) and not np.any(d.sum(axis=1) % 2)


def test_budget_validation():
    with pytest.raises(ValueError):
        SolverBudget(0)
    with pytest.raises(ValueError):
        SolverBudget(10, "fastest")
    assert SolverBudget().max_nodes == 1_000_000


def test_zero_residual_gives_zero_repair():
    M = np.array([[1, 1, 0, 0]])
    S = np.zeros((1, 2), dtype=int)
    B = np.array([[1, 0, 1, 0], [0, 1, 0, 1]])
    out = solve_min_flip(system_from_blocks(M, S, B), budget=PROVE)
    assert isinstance(out, Solution)
    assert out.patch.flip_count == 0 and out.patch.optimal


def test_inconsistent_parities_are_infeasible():
    # the same check row must give both 0 and 1 for one H_Z row
    M = np.array([[1, 1, 0, 0], [1, 1, 0, 0]])
    S = np.array([[1, 0], [0, 0]])
    B = np.array([[1, 0, 1, 0], [0, 1, 0, 1]])
    out = solve_min_flip(system_from_blocks(M, S, B), budget=PROVE)
    assert isinstance(out, Infeasible)
    assert "inconsistent" in out.reason


def test_two_by_four_matches_brute_force():
    rng = np.random.default_rng(11)
    checked = 0
    for _ in range(40):
        M, S, B = random_blocks(rng, 2, 4, int(rng.integers(1, 4)))
        best, _ = coset_minimum(M, S, B)
        # all 2^8 assignments, straight from the definitions
        brute = None
        for x in range(256):
            D = np.array([(x >> t) & 1 for t in range(8)]).reshape(2, 4)
            if np.any((M @ D.T) % 2 != S):
                continue
            sgn = D * (1 - 2 * B)
            if sgn.sum(axis=0).any() or sgn.sum(axis=1).any():
                continue
            w = int(D.sum())
            brute = w if brute is None else min(brute, w)
        assert best == brute
        assert flips(solve_min_flip(system_from_blocks(M, S, B), budget=PROVE)) == brute
        checked += 1
    assert checked == 40


@pytest.mark.parametrize("method", ["rows", "bits"])
def test_both_search_strategies_match_the_coset_oracle(method):
    rng = np.random.default_rng(2024)
    for _ in range(40):
        nI, nJ = int(rng.integers(2, 4)), int(rng.integers(3, 7))
        M, S, B = random_blocks(rng, nI, nJ, int(rng.integers(1, 5)), planted=bool(rng.integers(0, 4)))
        best, dim = coset_minimum(M, S, B)
        sys = system_from_blocks(M, S, B)
        out = solve_min_flip(sys, budget=PROVE, method=method)
        assert flips(out) == best
        if best is not None:
            assert out.patch.optimal
            assert_valid(sys, out.patch)


def test_golden_repair_is_sound(golden):
    pair, hx2, patch, sys = golden
    out = solve_min_flip(sys, pair.hz, PROVE)
    assert isinstance(out, Solution)
    assert out.patch.optimal and out.patch.flip_count == 24
    assert out.rank == 31
    assert_valid(sys, out.patch)
    hz2 = apply_delta(pair.hz, out.patch)
    assert mat_mul_transpose(hx2, hz2).is_zero()
    assert hz2.row_weights().tolist() == [8] * 12
    assert hz2.col_weights().tolist() == [3] * 32
    assert apply_delta(hz2, out.patch) == pair.hz


def test_golden_optimum_agrees_with_external_milp(golden):
    _, _, _, sys = golden
    value, res = solve_lp_text(export_ilp(sys), time_limit=120)
    if not res.success:
        pytest.skip(f"HiGHS did not finish: {res.message}")
    assert value == 24


def test_modes_on_golden(golden):
    pair, _, _, sys = golden
    first = solve_min_flip(sys, pair.hz, SolverBudget(1_000_000, "first-feasible"))
    assert isinstance(first, Solution) and first.patch.flip_count >= 24
    assert_valid(sys, first.patch)
    best = solve_min_flip(sys, pair.hz, SolverBudget(1_000_000, "best-within-budget"))
    assert best.patch.flip_count == 24 and best.patch.optimal


def test_budget_exhaustion_on_golden(golden):
    pair, _, _, sys = golden
    # the golden optimum needs five nodes
    out = solve_min_flip(sys, pair.hz, SolverBudget(4, "prove-optimal"))
    assert isinstance(out, BudgetExhausted) and out.nodes == 4
    first = solve_min_flip(sys, pair.hz, SolverBudget(5, "first-feasible"))
    assert isinstance(first, Solution) and not first.patch.optimal


@pytest.fixture(scope="module")
def hard_system():
    """A repair captured from a randomized P=4 run that needs ~45k nodes to prove."""
    from pathlib import Path

    from orthoswap.formats import read_matrix
    from orthoswap.perturb import CrossSwap

    data = Path(__file__).parent / "data"
    hx, hz = read_matrix(data / "hard_hx.alist"), read_matrix(data / "hard_hz.alist")
    assert mat_mul_transpose(hx, hz).is_zero()
    sw = CrossSwap(8, 8, 1, 10)
    hx2 = apply_cross_swap(hx, sw)
    return assemble_repair_system(compute_violation(hx2, hz, sw), hx2, hz), hx2, hz


def test_incumbent_accepted_within_budget(hard_system):
    sys, hx2, hz = hard_system
    out = solve_min_flip(sys, hz, SolverBudget(3000, "best-within-budget"))
    assert isinstance(out, Solution) and not out.patch.optimal
    assert out.patch.flip_count == 40
    assert_valid(sys, out.patch)
    assert mat_mul_transpose(hx2, apply_delta(hz, out.patch)).is_zero()
    strict = solve_min_flip(sys, hz, SolverBudget(3000, "prove-optimal"))
    assert isinstance(strict, BudgetExhausted) and strict.incumbent is None


def test_hard_instance_optimum(hard_system):
    sys, hx2, hz = hard_system
    out = solve_min_flip(sys, hz, PROVE)
    assert isinstance(out, Solution) and out.patch.optimal
    assert out.patch.flip_count == 34
    assert_valid(sys, out.patch)
    # HiGHS rarely proves this one quickly, but anything it finds is feasible
    value, res = solve_lp_text(export_ilp(sys), time_limit=5)
    if value is not None:
        assert value >= 34


def test_system_must_fit_hz(golden):
    _, _, _, sys = golden
    with pytest.raises(IndexError):
        solve_min_flip(sys, BitMatrix.zeros(4, 4), PROVE)


def test_apply_delta_zero_is_identity(golden):
    pair, _, _, sys = golden
    dp = DeltaPatch(sys.I, sys.J, BitMatrix.zeros(6, 16), 0, True)
    assert apply_delta(pair.hz, dp) == pair.hz


def test_apply_delta_checks_shape(golden):
    pair, _, _, sys = golden
    with pytest.raises(ValueError):
        apply_delta(pair.hz, DeltaPatch(sys.I, sys.J, BitMatrix.zeros(2, 2), 0, True))


def test_solver_is_deterministic(golden):
    pair, _, _, sys = golden
    a = solve_min_flip(sys, pair.hz, SolverBudget(50, "best-within-budget"))
    b = solve_min_flip(sys, pair.hz, SolverBudget(50, "best-within-budget"))
    assert type(a) is type(b) and a.nodes == b.nodes
    if isinstance(a, Solution):
        assert a.patch.delta == b.patch.delta


# LP export ------------------------------------------------------------------


def test_export_single_parity_row():
    # one equation x0 + x1 = 1 (mod 2)
    M = np.array([[1, 1]])
    S = np.array([[1]])
    B = np.array([[1, 0]])
    text = export_ilp(system_from_blocks(M, S, B))
    assert " par_0_0: x_0_0 + x_0_1 - 2 s_0 = 1" in text
    assert " 0 <= s_0 <= 1" in text
    assert " rowbal_0: - x_0_0 + x_0_1 = 0" in text
    assert text.index("Minimize") < text.index("Subject To") < text.index("Bounds")
    assert text.index("Bounds") < text.index("Binaries") < text.index("Generals") < text.rstrip().rindex("End")


def test_export_golden_sizes(golden):
    _, _, _, sys = golden
    names, c, A, b, lo, hi, integ = parse_lp(export_ilp(sys))
    xs = [n for n in names if n.startswith("x_")]
    ss = [n for n in names if n.startswith("s_")]
    assert len(xs) == 96 and len(ss) == 36
    assert A.shape[0] == 36 + 6 + 16
    assert c.sum() == 96 and np.all(hi[[names.index(x) for x in xs]] == 1)
    # every line stays short enough for strict LP readers
    assert max(len(ln) for ln in export_ilp(sys).splitlines()) <= 255


def test_export_round_trips_through_external_solver():
    rng = np.random.default_rng(77)
    for _ in range(12):
        M, S, B = random_blocks(rng, int(rng.integers(2, 4)), int(rng.integers(3, 7)), 3,
                                planted=bool(rng.integers(0, 3)))
        sys = system_from_blocks(M, S, B)
        value, res = solve_lp_text(export_ilp(sys))
        assert value == flips(solve_min_flip(sys, budget=PROVE)) == coset_minimum(M, S, B)[0]


# properties ------------------------------------------------------------------


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**64 - 1))
def test_every_solution_repairs_the_full_product(seed):
    pair = build_tiled_seed(SeedParams(3, 2, 4))
    rng = Xoshiro256(seed)
    hx, hz = pair.hx, pair.hz
    for _ in range(4):
        sw = sample_cross_swap(hx, rng)
        hx2 = apply_cross_swap(hx, sw)
        patch = compute_violation(hx2, hz, sw)
        if patch.empty:
            hx = hx2
            continue
        sys = assemble_repair_system(patch, hx2, hz)
        out = solve_min_flip(sys, hz, SolverBudget(20_000))
        if not isinstance(out, Solution):
            continue
        assert_valid(sys, out.patch)
        hz2 = apply_delta(hz, out.patch)
        assert mat_mul_transpose(hx2, hz2).is_zero()
        assert hz2.row_weights().tolist() == hz.row_weights().tolist()
        assert hz2.col_weights().tolist() == hz.col_weights().tolist()
        hx, hz = hx2, hz2


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_small_instances_are_optimal(seed):
    rng = np.random.default_rng(seed)
    M, S, B = random_blocks(rng, int(rng.integers(2, 5)), int(rng.integers(3, 8)), int(rng.integers(2, 6)))
    best, dim = coset_minimum(M, S, B, max_dim=18)
    out = solve_min_flip(system_from_blocks(M, S, B), budget=PROVE)
    assert flips(out) == best
