"""Command-line entry point: ``orthoswap <command> ...`` or ``python -m orthoswap``.

Exit codes: 0 success, 1 verification failure, 2 usage or input error,
3 run aborted because too many consecutive swaps were rejected.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .driver import (
    RunAborted,
    RunConfig,
    VerificationError,
    diagnostics,
    save_pair,
    randomize_run,
    verify_pair,
)
from .formats import FormatError, read_matrix
from .localize import assemble_repair_system, compute_violation
from .perturb import CrossSwap, apply_cross_swap
from .repair import MODES, SolverBudget, export_ilp
from .seedgen import OrthoPair, SeedParams, build_tiled_seed

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_ABORTED = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _read_pair(hx_path: str, hz_path: str) -> OrthoPair:
    try:
        return OrthoPair.create(read_matrix(hx_path), read_matrix(hz_path), check=False)
    except (OSError, FormatError) as e:
        raise UsageError(str(e)) from e
    except ValueError as e:
        raise UsageError(f"{hx_path}, {hz_path}: {e}") from e


def _seed_params(args) -> SeedParams:
    try:
        return SeedParams(args.P, args.dc, args.dr)
    except ValueError as e:
        raise UsageError(str(e)) from e


def cmd_seed(args) -> int:
    pair = build_tiled_seed(_seed_params(args))
    save_pair(pair, args.out_hx, args.out_hz, args.format)
    print(f"wrote {pair.hx.nrows}x{pair.n} tiled seed to {args.out_hx} and {args.out_hz}")
    return EXIT_OK


def cmd_randomize(args) -> int:
    from_files = args.hx is not None or args.hz is not None
    from_params = args.P is not None
    if from_files == from_params:
        raise UsageError("give either --hx and --hz or --P, --dc and --dr")
    if from_files and (args.hx is None or args.hz is None):
        raise UsageError("--hx and --hz must be given together")
    if from_files:
        pair = _read_pair(args.hx, args.hz)
        if not verify_pair(pair).orthogonal:
            print("input pair is not orthogonal", file=sys.stderr)
            return EXIT_VERIFY
    try:
        cfg = RunConfig(
            seed_params=_seed_params(args) if from_params else None,
            hx_path=args.hx,
            hz_path=args.hz,
            iterations=args.iterations,
            rng_seed=args.rng_seed,
            budget=SolverBudget(args.max_nodes, args.mode),
            max_consecutive_rejects=args.max_rejects,
            out_hx=args.out_hx,
            out_hz=args.out_hz,
            out_format=args.format,
            manifest_path=args.manifest,
            stats_path=args.stats_json,
            emit_manifest=args.manifest is not None,
        )
    except ValueError as e:
        raise UsageError(str(e)) from e

    try:
        pair, stats = randomize_run(cfg)
    except RunAborted as e:
        print(f"aborted: {e}", file=sys.stderr)
        if args.stats_json:
            with open(args.stats_json, "w") as fh:
                json.dump(e.stats.to_dict(), fh, indent=2, sort_keys=True)
        return EXIT_ABORTED
    except VerificationError as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return EXIT_VERIFY
    s = stats.summary()
    print(
        f"{s['iterations_completed']} iterations in {s['attempts']} attempts "
        f"({s['swaps_rejected_infeasible']} infeasible, {s['swaps_rejected_budget']} over budget, "
        f"{s['swaps_no_violation']} needed no repair); k = {stats.diagnostics['k']}"
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    pair = _read_pair(args.hx, args.hz)
    rep = verify_pair(pair)
    rw_x, cw_x = pair.row_hist_x, pair.col_hist_x
    rw_z, cw_z = pair.row_hist_z, pair.col_hist_z
    print(f"orthogonal: {'yes' if rep.orthogonal else 'no'} ({rep.nonzero_products} odd overlaps)")
    print(f"H_X row weights {rw_x}, column weights {cw_x}")
    print(f"H_Z row weights {rw_z}, column weights {cw_z}")
    return EXIT_OK if rep.ok else EXIT_VERIFY


def cmd_stats(args) -> int:
    pair = _read_pair(args.hx, args.hz)
    d = diagnostics(pair)
    if args.json:
        print(json.dumps(d, indent=2, sort_keys=True))
        return EXIT_OK
    print(f"n = {d['n']}, k = {d['k']}")
    for name in ("hx", "hz"):
        m = d[name]
        print(
            f"{name}: {m['shape'][0]}x{m['shape'][1]}, rank {m['rank']}, "
            f"{m['four_cycles']} four-cycles, row weights {m['row_weights']}, "
            f"column weights {m['col_weights']}"
        )
    return EXIT_OK


def cmd_export_ilp(args) -> int:
    pair = _read_pair(args.hx, args.hz)
    try:
        sw = CrossSwap.parse(args.swap)
        hx2 = apply_cross_swap(pair.hx, sw)
    except ValueError as e:
        raise UsageError(str(e)) from e
    patch = compute_violation(hx2, pair.hz, sw)
    if patch.empty:
        print("the swap leaves the pair orthogonal; nothing to export", file=sys.stderr)
        return EXIT_OK
    sys_ = assemble_repair_system(patch, hx2, pair.hz)
    text = export_ilp(sys_)
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text)
        except OSError as e:
            raise UsageError(f"cannot write {args.out}: {e.strerror}") from e
        print(f"wrote {sys_.v} variables, {sys_.m} parity rows to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="orthoswap", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log each rejected swap")
    sub = p.add_subparsers(dest="command", required=True)

    def tiled(sp, required):
        sp.add_argument("--P", type=int, required=required, help="identity block size")
        sp.add_argument("--dc", type=int, required=required, help="column weight")
        sp.add_argument("--dr", type=int, required=required, help="row weight (even)")

    def fmt(sp):
        sp.add_argument("--format", choices=("alist", "dense"), default="alist")

    sp = sub.add_parser("seed", help="write the tiled-identity seed pair")
    tiled(sp, True)
    sp.add_argument("--out-hx", required=True)
    sp.add_argument("--out-hz", required=True)
    fmt(sp)
    sp.set_defaults(func=cmd_seed)

    sp = sub.add_parser("randomize", help="run swap-and-repair iterations")
    sp.add_argument("--hx")
    sp.add_argument("--hz")
    tiled(sp, False)
    sp.add_argument("--iterations", type=int, required=True)
    sp.add_argument("--rng-seed", type=int, default=0)
    sp.add_argument("--max-nodes", type=int, default=20_000)
    sp.add_argument("--mode", choices=MODES, default="best-within-budget")
    sp.add_argument("--max-rejects", type=int, default=1000, help="consecutive rejects before aborting")
    sp.add_argument("--out-hx")
    sp.add_argument("--out-hz")
    sp.add_argument("--manifest", help="write a JSON run manifest here")
    sp.add_argument("--stats-json", help="write per-iteration stats here")
    fmt(sp)
    sp.set_defaults(func=cmd_randomize)

    sp = sub.add_parser("verify", help="check orthogonality and report weights")
    sp.add_argument("--hx", required=True)
    sp.add_argument("--hz", required=True)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("stats", help="ranks, four-cycles, weights and k")
    sp.add_argument("--hx", required=True)
    sp.add_argument("--hz", required=True)
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_stats)

    sp = sub.add_parser("export-ilp", help="write the repair problem of one H_X swap as an LP file")
    sp.add_argument("--hx", required=True)
    sp.add_argument("--hz", required=True)
    sp.add_argument("--swap", required=True, metavar="i1,j1,i2,j2")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_export_ilp)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except UsageError as e:
        print(f"{parser.prog}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"{parser.prog}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
