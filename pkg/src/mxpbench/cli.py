"""Command line entry point: ``mxpbench {bench,pivot-sweep,norm-sweep}``.

Exit codes: 0 every run valid, 2 at least one invalid run, 3 factorization
breakdown, 4 usage error.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor

from threadpoolctl import threadpool_limits

from .exceptions import SingularPivot
from .gmresir import RefineConfig
from .harness import csvio
from .harness.bench import run_benchmark
from .harness.experiments import STATUS_SINGULAR, experiment_norm_sweep, experiment_pivot_sweep
from .lufact import FactorConfig
from .matgen import DEFAULT_THETA, GenSpec
from .metrics import MAX_ITERATIONS
from .precision import get_format

EXIT_OK, EXIT_INVALID, EXIT_BREAKDOWN, EXIT_USAGE = 0, 2, 3, 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sizes(text):
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of integers: {text!r}")


def _common(p):
    p.add_argument("--n", type=int, help="matrix order (single size)")
    p.add_argument("--sizes", type=_sizes, help="comma-separated matrix orders")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds per size")
    p.add_argument("--threads", type=int, default=1, help="worker processes for independent runs")
    p.add_argument("--out", help="CSV output path (default: stdout)")


def build_parser():
    parser = _Parser(prog="mxpbench", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bench", help="timed mixed-precision solve and validation")
    _common(b)
    b.add_argument("--dist", choices=("uniform", "gauss"), default="uniform")
    b.add_argument("--scale", choices=("none", "sqrtn", "n", "ddd"), default="sqrtn")
    b.add_argument("--theta", type=float)
    b.add_argument("--low", choices=("fp16", "bf16", "fp32"), default="fp16")
    b.add_argument("--panel", choices=("fp32", "fp64"), default="fp32")
    b.add_argument("--accum", choices=("fp32", "fp64"), default="fp32")
    b.add_argument("--precond", choices=("fp32", "fp64"), default="fp64",
                   help="arithmetic used when applying the LU preconditioner")
    b.add_argument("--nb", type=int, default=128, help="LU block size")
    b.add_argument("--max-it", type=int, default=MAX_ITERATIONS)
    b.add_argument("--berr-target", type=float, default=1.0)
    b.add_argument("--equilibrate", action="store_true")

    for name, helptext in (("pivot-sweep", "largest partial-pivoting pivot per size and seed"),
                           ("norm-sweep", "residual norms of float64 LU solves")):
        s = sub.add_parser(name, help=helptext)
        _common(s)
        s.add_argument("--pivot", choices=("none", "partial"), default="partial")
    return parser


def _resolve_sizes(args):
    sizes = list(args.sizes or []) + ([args.n] if args.n is not None else [])
    if not sizes:
        raise UsageError("one of --n or --sizes is required")
    if args.seeds < 1 or args.threads < 1:
        raise UsageError("--seeds and --threads must be positive")
    return sizes


def _bench_cell(spec, fcfg, rcfg, equil):
    with threadpool_limits(limits=1):
        return run_benchmark(spec, fcfg, rcfg, equil)


def _cmd_bench(args):
    sizes = _resolve_sizes(args)
    if not 1 <= args.max_it <= MAX_ITERATIONS:
        raise UsageError(f"--max-it must lie in [1, {MAX_ITERATIONS}]")
    scale = csvio.SCALE_FROM_CLI[args.scale]
    theta = args.theta if args.theta is not None else (DEFAULT_THETA if scale == "ddd" else None)
    try:
        specs = [GenSpec(n, args.seed + k, csvio.DIST_FROM_CLI[args.dist], scale, theta)
                 for n in sizes for k in range(args.seeds)]
        fcfg = FactorConfig(panel_fmt=get_format(args.panel), low_fmt=get_format(args.low),
                            accum_fmt=get_format(args.accum), block_size=args.nb)
        rcfg = RefineConfig(max_iters=args.max_it, berr_target=args.berr_target,
                            precond_fmt=get_format(args.precond))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    specs.sort(key=lambda s: (s.n, s.seed))
    cells = [(s, fcfg, rcfg, args.equilibrate) for s in specs]
    if args.threads > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as ex:
            reports = list(ex.map(_bench_cell, *zip(*cells)))
    else:
        reports = [_bench_cell(*c) for c in cells]
    code = EXIT_OK
    if any(r.breakdown for r in reports):
        code = EXIT_BREAKDOWN
    elif not all(r.valid for r in reports):
        code = EXIT_INVALID
    return csvio.bench_csv(reports), code


def _cmd_pivot_sweep(args):
    sizes = _resolve_sizes(args)
    rows = experiment_pivot_sweep(sizes, args.seeds, args.seed, args.threads)
    return csvio.pivot_csv(rows), EXIT_OK


def _cmd_norm_sweep(args):
    sizes = _resolve_sizes(args)
    rows = experiment_norm_sweep(sizes, args.seeds, args.pivot, args.seed, args.threads)
    code = EXIT_BREAKDOWN if any(r.status == STATUS_SINGULAR for r in rows) else EXIT_OK
    return csvio.norm_csv(rows), code


COMMANDS = {"bench": _cmd_bench, "pivot-sweep": _cmd_pivot_sweep, "norm-sweep": _cmd_norm_sweep}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text, code = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"mxpbench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"mxpbench: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SingularPivot as exc:
        print(f"mxpbench: factorization breakdown: {exc}", file=sys.stderr)
        return EXIT_BREAKDOWN
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
