"""Command line entry point: ``asqp {solve,bench,profile,gen}``."""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import bench
from .errors import AsqpError, ProblemFormatError
from .model import load_problem, save_problem
from .solver import SCHEMES, SolverConfig, Status, solve

EXIT_OK, EXIT_USAGE, EXIT_SOLVE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r} (decimal or 0x-hex)") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return value


def _count_arg(text):
    key = text.replace(" ", "").lower()
    if key in ("n-1", "n/2"):
        return key
    try:
        return int(key)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, 'n-1' or 'n/2', got {text!r}") from None


def _schemes(text):
    names = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in names if s not in SCHEMES]
    if not names or bad:
        raise argparse.ArgumentTypeError(f"schemes must be a comma list from {SCHEMES}")
    return names


def _add_generator_args(p):
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--ne", type=_count_arg, default=1, help="equality rows: integer, n-1 or n/2")
    p.add_argument("--ni", type=_count_arg, default=10, help="inequality rows: integer or n/2")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=_seed, default=0, help="decimal or 0x-hex")


def build_parser():
    parser = _Parser(prog="asqp", description="Active-set convex QP solver and benchmark harness.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one problem file")
    p.add_argument("file")
    p.add_argument("--scheme", choices=SCHEMES, default="auto")
    p.add_argument("--tol", type=float, default=1e-8, help="feasibility and multiplier tolerance")
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--json", action="store_true", help="print a JSON object")

    p = sub.add_parser("bench", help="run a random suite and write RunRecords as CSV")
    _add_generator_args(p)
    p.add_argument("--schemes", type=_schemes, default=["kkt", "projection", "sphere"])
    p.add_argument("--no-oracle", action="store_true", help="skip reference solutions")
    p.add_argument("--out", required=True)

    p = sub.add_parser("profile", help="Dolan-More profile of a bench CSV")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tau-max", type=float, default=None,
                   help="sample a uniform grid on [1, tau-max] instead of the breakpoints")
    p.add_argument("--tau-points", type=int, default=50)

    p = sub.add_parser("gen", help="write random problem files")
    _add_generator_args(p)
    p.add_argument("--out-dir", required=True)
    return parser


def _spec(args):
    return bench.GeneratorSpec((args.n_min, args.n_max), args.ne, args.ni, args.count, args.seed)


def _cmd_solve(args):
    try:
        problem = load_problem(args.file)
    except ProblemFormatError as exc:
        print(f"asqp: {args.file}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"asqp: {exc}", file=sys.stderr)
        return EXIT_USAGE
    cfg = SolverConfig(scheme=args.scheme, feas_tol=args.tol, multiplier_tol=args.tol,
                       max_iterations=args.max_iter)
    out = solve(problem, cfg)
    if args.json:
        print(json.dumps({
            "status": str(out.status),
            "x": out.x_star.tolist(),
            "objective": out.objective,
            "iterations": out.iterations,
            "working_set": list(out.working_set),
            "message": out.message,
        }))
    else:
        with np.printoptions(precision=10, suppress=True):
            print(f"status: {out.status}")
            print(f"x*: {out.x_star}")
            print(f"objective: {out.objective:.12g}")
            print(f"iterations: {out.iterations}")
        if out.message:
            print(f"message: {out.message}")
    return EXIT_OK if out.status is Status.OPTIMAL else EXIT_SOLVE


def _cmd_bench(args):
    configs = [SolverConfig(scheme=s) for s in args.schemes]
    records = bench.run_suite(_spec(args), configs, oracle=not args.no_oracle)
    bench.write_records(records, args.out)
    print(f"wrote {len(records)} records to {args.out}")
    return EXIT_OK


def _cmd_profile(args):
    try:
        records = bench.read_records(args.inp)
    except (OSError, ValueError, KeyError) as exc:
        print(f"asqp: {args.inp}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    table = bench.ProfileTable.from_records(records)
    grid = None
    if args.tau_max is not None:
        grid = np.linspace(1.0, args.tau_max, args.tau_points)
    profile = bench.dolan_more(table, grid)
    bench.write_profile(profile, args.out)
    if profile.unsolved_problems:
        print(f"warning: {profile.unsolved_problems} problems unsolved by every solver", file=sys.stderr)
    return EXIT_OK


def _cmd_gen(args):
    os.makedirs(args.out_dir, exist_ok=True)
    for i, problem in enumerate(bench.generate(_spec(args))):
        save_problem(problem, os.path.join(args.out_dir, f"problem_{i:04d}.json"))
    print(f"wrote {args.count} problems to {args.out_dir}")
    return EXIT_OK


_COMMANDS = {"solve": _cmd_solve, "bench": _cmd_bench, "profile": _cmd_profile, "gen": _cmd_gen}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _COMMANDS[args.command](args)
    except AsqpError as exc:
        print(f"asqp: {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc, ValueError) else EXIT_SOLVE


if __name__ == "__main__":
    sys.exit(main())
