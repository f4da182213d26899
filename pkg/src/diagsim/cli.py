"""Command-line entry point.

Subcommands: gen, convert, matmul, simulate, expm, report.
Exit codes: 0 ok, 1 usage error, 2 data error, 3 verification failure.
An optional key=value config file supplies flag defaults; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import diagio
from .dataflow import FeedConfig
from .diagmat import DiagMatrix, drop_zero_diagonals, to_dense
from .errors import (ConvergenceError, DomainError, GridCapacityError,
                     PlanError, ShapeError, SimulatorError, VerificationError)
from .hamiltonians import gen_benchmark
from .hamsim import (GridSetup, TaylorConfig, records_to_csv, simulate_product,
                     taylor_expm)
from .memory import CacheConfig, SetAssocCache
from .report import EnergyModel, build_report, report_to_csv, report_to_json
from .spmspm import dense_matmul_oracle, diag_matmul

USAGE_EXIT = 1
DATA_EXIT = 2
VERIFY_EXIT = 3
CHECK_DIM_CAP = 1024


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _parse_feed(text: str) -> FeedConfig:
    orders = {"a": "ascending", "b": "descending"}
    names = {"asc": "ascending", "ascending": "ascending",
             "desc": "descending", "descending": "descending"}
    for part in filter(None, text.split(",")):
        side, _, order = part.partition("=")
        if side.strip() not in orders or order.strip() not in names:
            raise DomainError(f"bad feed spec {text!r}; expected like a=asc,b=desc")
        orders[side.strip()] = names[order.strip()]
    return FeedConfig(a_order=orders["a"], b_order=orders["b"])


def _parse_cuts(text: str | None):
    if not text:
        return None
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _load_config(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise DomainError(f"config line {raw.rstrip()!r} is not key=value")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _matrix_summary(m: DiagMatrix) -> str:
    dense = float(m.dim) ** 2
    sparsity = 1.0 - m.nnze / dense
    dsparsity = 1.0 - m.nnzd / (2.0 * m.dim - 1.0)
    return (f"dim={m.dim} nnzd={m.nnzd} nnze={m.nnze} "
            f"storage_scalars={m.storage_scalars} "
            f"sparsity={sparsity:.4%} dsparsity={dsparsity:.4%}")


def _grid_setup(args) -> GridSetup:
    return GridSetup(
        rows=args.grid_rows, cols=args.grid_cols,
        feed=_parse_feed(args.feed),
        cache=CacheConfig(sets=args.cache_sets, ways=args.cache_ways,
                          hit_cycles=args.cache_hit,
                          miss_penalty_cycles=args.cache_miss_penalty,
                          dram_cycles=args.dram_cycles),
        cuts=_parse_cuts(args.cuts),
        a_group_size=args.a_group_size, b_group_size=args.b_group_size,
        interleave=args.interleave,
    )


def _maybe_float32(m: DiagMatrix, args) -> DiagMatrix:
    if getattr(args, "float32", False):
        return m.astype(np.complex64)
    return m


def _write_report(report: dict, out: str | None) -> None:
    text = report_to_json(report)
    if out:
        diagio._atomic_write(out, text.encode())
    else:
        sys.stdout.write(text)


# -- subcommands ----------------------------------------------------------------


def cmd_gen(args) -> int:
    params = {}
    if args.model.lower() == "tfim":
        params["g"] = args.g
    if args.model.lower() == "heisenberg":
        params.update(jx=args.jx, jy=args.jy, jz=args.jz)
    if args.model.lower() in ("maxcut", "maxcut-ising") and args.seed is not None:
        params["seed"] = args.seed
    m = gen_benchmark(args.model, args.qubits, **params)
    diagio.save_matrix(m, args.out, args.format)
    print(f"{args.model}-{args.qubits}: {_matrix_summary(m)}")
    print(f"wrote {args.out}")
    return 0


def cmd_convert(args) -> int:
    m = diagio.load_matrix(args.input, args.in_format)
    diagio.save_matrix(m, args.output, args.out_format)
    print(f"{_matrix_summary(m)}")
    return 0


def cmd_matmul(args) -> int:
    a = _maybe_float32(diagio.load_matrix(args.a), args)
    b = _maybe_float32(diagio.load_matrix(args.b), args)
    c = diag_matmul(a, b)
    if args.check:
        if a.dim > CHECK_DIM_CAP:
            raise DomainError(f"--check densifies; dim {a.dim} exceeds {CHECK_DIM_CAP}")
        ref = dense_matmul_oracle(to_dense(a), to_dense(b))
        got = to_dense(c)
        scale = max(float(np.linalg.norm(ref)), 1e-300)
        err = float(np.linalg.norm(got - ref)) / scale
        if err > 1e-12:
            print(f"oracle check FAILED: relative error {err:.3e}", file=sys.stderr)
            return VERIFY_EXIT
        print(f"oracle check passed: relative error {err:.3e}")
    diagio.save_matrix(c, args.out, args.format)
    print(f"product: {_matrix_summary(c)}")
    return 0


def cmd_simulate(args) -> int:
    a = _maybe_float32(diagio.load_matrix(args.a), args)
    b = _maybe_float32(diagio.load_matrix(args.b), args)
    grid = _grid_setup(args)
    cache = SetAssocCache(grid.cache)
    trace_fh = open(args.trace, "w") if args.trace else None
    trace = None
    if trace_fh:
        trace = lambda evt: trace_fh.write(json.dumps(evt, sort_keys=True) + "\n")
    try:
        product, stage, counters, mem = simulate_product(a, b, grid, cache, trace=trace)
    finally:
        if trace_fh:
            trace_fh.close()
    want = diag_matmul(a, b)
    got, ref = to_dense(product), to_dense(want)
    scale = max(float(np.linalg.norm(ref)), 1e-300)
    err = float(np.linalg.norm(got - ref)) / scale
    if err > 1e-12:
        print(f"simulator/functional cross-check FAILED: {err:.3e}", file=sys.stderr)
        return VERIFY_EXIT
    if args.product_out:
        diagio.save_matrix(product, args.product_out)
    report = build_report(f"simulate:{args.a}x{args.b}", grid.rows, grid.cols,
                          stage, counters, mem, model=EnergyModel())
    _write_report(report, args.out)
    if args.out:
        print(f"cross-check ok ({err:.3e}); report written to {args.out}")
    return 0


def cmd_expm(args) -> int:
    if bool(args.h_file) == bool(args.model):
        raise DomainError("give exactly one of --h-file or --model/--qubits")
    if args.model:
        if args.qubits is None:
            raise DomainError("--model requires --qubits")
        h = gen_benchmark(args.model, args.qubits)
        workload = f"{args.model}-{args.qubits}"
    else:
        h = diagio.load_matrix(args.h_file)
        workload = f"expm:{args.h_file}"
    h = _maybe_float32(h, args)
    if args.iters is None and args.eps is None:
        args.eps = 1e-8
    cfg = TaylorConfig(t=args.t / max(args.segments, 1), terms=args.iters,
                       eps=args.eps, use_simulator=not args.functional_only)
    grid = _grid_setup(args)
    cache = SetAssocCache(grid.cache)
    segment_u, records = taylor_expm(h, cfg, grid, cache, check=not args.functional_only)
    # the segmented form repeats the short-time expansion and multiplies the
    # results; the outer power is the same product kernel, run functionally
    u = segment_u
    for _ in range(1, max(args.segments, 1)):
        u = drop_zero_diagonals(diag_matmul(u, segment_u), 0.0)
    if args.u_out:
        diagio.save_matrix(u, args.u_out)
    totals = [sum(r.stage_cycles.total for r in records)]
    stage_sum = type(records[0].stage_cycles)(
        sum(r.stage_cycles.preload for r in records),
        sum(r.stage_cycles.compute for r in records),
        sum(r.stage_cycles.popout for r in records),
        totals[0],
    ) if records else None
    counters: dict[str, int] = {}
    for r in records:
        for key, val in r.counters.items():
            if key == "active_dpes":
                counters[key] = max(counters.get(key, 0), val)
            else:
                counters[key] = counters.get(key, 0) + val
    mem = cache.stats
    report = build_report(workload, grid.rows, grid.cols, stage_sum or _ZeroStage(),
                          counters, mem, records, model=EnergyModel())
    report["segments"] = max(args.segments, 1)
    report["taylor_terms"] = len(records)
    _write_report(report, args.out)
    if args.csv:
        diagio._atomic_write(args.csv, records_to_csv(records).encode())
    if args.out:
        print(f"{workload}: {len(records)} terms; report written to {args.out}")
    return 0


class _ZeroStage:
    preload = compute = popout = total = 0


def cmd_report(args) -> int:
    with open(args.input) as fh:
        report = json.load(fh)
    if report.get("schema") != 1:
        raise DomainError(f"unsupported report schema {report.get('schema')!r}")
    diagio._atomic_write(args.csv, report_to_csv(report).encode())
    print(f"wrote {args.csv}")
    return 0


# -- wiring ----------------------------------------------------------------------


def _add_grid_flags(sub):
    sub.add_argument("--grid-rows", type=int, default=32)
    sub.add_argument("--grid-cols", type=int, default=32)
    sub.add_argument("--feed", default="a=asc,b=desc",
                     help="feed orders, e.g. a=asc,b=desc")
    sub.add_argument("--cuts", default=None,
                     help="comma-separated row/col cut indices")
    sub.add_argument("--a-group-size", type=int, default=None)
    sub.add_argument("--b-group-size", type=int, default=None)
    sub.add_argument("--interleave", type=int, default=1,
                     help="pipelined column count for single-diagonal operands")
    sub.add_argument("--cache-sets", type=int, default=2)
    sub.add_argument("--cache-ways", type=int, default=2)
    sub.add_argument("--cache-hit", type=int, default=1)
    sub.add_argument("--cache-miss-penalty", type=int, default=5)
    sub.add_argument("--dram-cycles", type=int, default=50)
    sub.add_argument("--float32", action="store_true",
                     help="run the datapath at float32 precision")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="diagsim",
                     description="diagonal-sparse SpMSpM kernels and grid model")
    parser.add_argument("--config", default=None, help="key=value defaults file")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker cap (current implementation runs serially)")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a benchmark Hamiltonian")
    gen.add_argument("model", help="heisenberg | tfim | maxcut-ising")
    gen.add_argument("qubits", type=int)
    gen.add_argument("--out", required=True)
    gen.add_argument("--format", choices=["diaq", "json", "mtx"], default=None)
    gen.add_argument("--g", type=float, default=1.0, help="transverse field")
    gen.add_argument("--jx", type=float, default=1.0)
    gen.add_argument("--jy", type=float, default=1.0)
    gen.add_argument("--jz", type=float, default=1.0)
    gen.add_argument("--seed", type=int, default=None,
                     help="random graph seed for the cut-cost model")
    gen.set_defaults(func=cmd_gen)

    conv = sub.add_parser("convert", help="convert between matrix file formats")
    conv.add_argument("input")
    conv.add_argument("output")
    conv.add_argument("--in-format", choices=["diaq", "json", "mtx"], default=None)
    conv.add_argument("--out-format", choices=["diaq", "json", "mtx"], default=None)
    conv.set_defaults(func=cmd_convert)

    mm = sub.add_parser("matmul", help="functional diagonal-space product")
    mm.add_argument("a")
    mm.add_argument("b")
    mm.add_argument("--out", required=True)
    mm.add_argument("--format", choices=["diaq", "json", "mtx"], default=None)
    mm.add_argument("--check", action="store_true",
                    help="verify against the dense oracle")
    mm.add_argument("--float32", action="store_true")
    mm.set_defaults(func=cmd_matmul)

    simc = sub.add_parser("simulate", help="cycle-level run of one product")
    simc.add_argument("a")
    simc.add_argument("b")
    simc.add_argument("--out", default=None, help="report JSON path (stdout if absent)")
    simc.add_argument("--product-out", default=None)
    simc.add_argument("--trace", default=None, help="per-cycle JSONL trace path")
    _add_grid_flags(simc)
    simc.set_defaults(func=cmd_simulate)

    ex = sub.add_parser("expm", help="truncated-series exponential through the stack")
    ex.add_argument("--h-file", default=None)
    ex.add_argument("--model", default=None)
    ex.add_argument("--qubits", type=int, default=None)
    ex.add_argument("--t", type=float, default=1.0)
    ex.add_argument("--iters", type=int, default=None, help="fixed term count")
    ex.add_argument("--eps", type=float, default=None,
                    help="series remainder threshold (default 1e-8)")
    ex.add_argument("--segments", type=int, default=1,
                    help="split t into this many repeated expansions")
    ex.add_argument("--functional-only", action="store_true",
                    help="skip the cycle model")
    ex.add_argument("--out", default=None)
    ex.add_argument("--csv", default=None, help="iteration records CSV path")
    ex.add_argument("--u-out", default=None, help="write the resulting operator")
    _add_grid_flags(ex)
    ex.set_defaults(func=cmd_expm)

    rep = sub.add_parser("report", help="re-render a report JSON as CSV")
    rep.add_argument("input")
    rep.add_argument("--csv", required=True)
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    if args.config:
        defaults = _load_config(args.config)
        known = {a.dest for a in parser._actions}
        for action in parser._subparsers._group_actions:
            for p in action.choices.values():
                known |= {a.dest for a in p._actions}
        bad = set(defaults) - known
        if bad:
            print(f"error: unknown config keys: {sorted(bad)}", file=sys.stderr)
            return USAGE_EXIT
        # config supplies defaults only where the flag was left at its default
        argv_text = " ".join(argv if argv is not None else sys.argv[1:])
        for key, val in defaults.items():
            flag = "--" + key.replace("_", "-")
            if flag in argv_text:
                continue
            if hasattr(args, key):
                current = getattr(args, key)
                cast = type(current) if current is not None else str
                setattr(args, key, cast(val) if cast is not bool else val == "true")
    try:
        return args.func(args)
    except (ShapeError, DomainError, PlanError, GridCapacityError,
            ConvergenceError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except (VerificationError, SimulatorError) as exc:
        print(f"verification error: {exc}", file=sys.stderr)
        return VERIFY_EXIT


if __name__ == "__main__":
    sys.exit(main())
