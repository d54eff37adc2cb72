import pytest

from orthoswap.gf2 import BitMatrix
from orthoswap.localize import assemble_repair_system, compute_violation
from orthoswap.perturb import CrossSwap, apply_cross_swap
from orthoswap.seedgen import SeedParams, build_tiled_seed

# the worked example: tiled seed (P=4, dc=3, dr=8), swap rows 10/7 at columns 6/23
GOLDEN_PARAMS = SeedParams(4, 3, 8)
GOLDEN_SWAP = CrossSwap(10, 6, 7, 23)

ACCEPTANCE_RESULTS: list[str] = []


@pytest.fixture
def seed_pair():
    return build_tiled_seed(GOLDEN_PARAMS)


@pytest.fixture
def golden(seed_pair):
    hx2 = apply_cross_swap(seed_pair.hx, GOLDEN_SWAP)
    patch = compute_violation(hx2, seed_pair.hz, GOLDEN_SWAP)
    sys = assemble_repair_system(patch, hx2, seed_pair.hz)
    return seed_pair, hx2, patch, sys


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
