"""
Command-line entry point.

    schattenlra lra MATRIX --k K --eps EPS --p P [--seed S --c C --config FILE --out rows.csv]
    schattenlra bench PLAN --out rows.csv
    schattenlra hardness --n N --p P --trials T [--out rows.csv]
    schattenlra verify --suite NAME|all --trials T

Exit status: 0 on success, 1 when a verify suite fails, 2 on usage or parse errors.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import rng
from .bench import (HARDNESS_COLUMNS, LRA_COLUMNS, load_plan, read_kv, rows_to_csv, run_bench)
from .hardness import HardnessConfig, hardness_experiment
from .lra import LraConfig, schatten_lra
from .matrixio import ParseError, read_matrix
from .verify import SUITES, format_report, run_verify

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _fmt(x):
    if x is None:
        return ""
    return repr(float(x)) if isinstance(x, float) else str(x)


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_lra(args) -> int:
    op = read_matrix(args.matrix, args.format)
    values = read_kv(args.config) if args.config else {}
    for key in ("k", "eps", "p", "c", "seed", "repetitions", "block_cap"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    values.setdefault("seed", rng.default_seed())
    cfg = LraConfig.from_mapping(values)
    out = schatten_lra(op, cfg, certify=not args.no_certify)
    n, d = op.shape
    row = [Path(args.matrix).name, n, d, cfg.k, cfg.p, cfg.eps, out.decision.branch.value,
           out.total_queries.applies, out.total_queries.adjoint_applies,
           out.residual_certificate, out.optimum, out.ratio]
    _emit(rows_to_csv([[_fmt(x) for x in row]], LRA_COLUMNS), args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    plan = load_plan(args.plan)
    rows = run_bench(plan)
    out = args.out or plan.out
    _emit(rows_to_csv(rows), out)
    return EXIT_OK


def cmd_hardness(args) -> int:
    rows = []
    base = args.seed if args.seed is not None else rng.default_seed()
    for t in range(args.trials):
        cfg = HardnessConfig(p=args.p, c=args.c, calibration=args.calibration, seed=base + t)
        r = hardness_experiment(args.n, args.p, cfg)
        ratio = (r.residual_pow / r.optimum_pow) ** (1.0 / r.p) if r.optimum_pow > 0 else None
        rows.append([_fmt(x) for x in (
            f"wishart-{args.n}-s{base + t}", args.n, args.n, 1, r.p, r.eps, r.branch,
            r.queries_used.applies, r.queries_used.adjoint_applies,
            r.residual_pow ** (1.0 / r.p), r.optimum_pow ** (1.0 / r.p), ratio,
            r.lambda_min_true, r.lambda_hat, r.abs_error)])
    _emit(rows_to_csv(rows, HARDNESS_COLUMNS), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    base = args.seed if args.seed is not None else rng.default_seed()
    results = run_verify(args.suite, range(base, base + args.trials))
    print(format_report(results))
    return EXIT_OK if all(r.failures == 0 for r in results) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="schattenlra", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lra", help="rank-k Schatten-p approximation of a matrix file")
    p.add_argument("matrix")
    p.add_argument("--format", choices=["mm", "csv"], default=None,
                   help="matrix format (default: from the file suffix)")
    p.add_argument("--config", help="key = value file with k, eps, p, c, seed, repetitions, block_cap")
    p.add_argument("--k", type=int)
    p.add_argument("--eps", type=float)
    p.add_argument("--p", type=str)
    p.add_argument("--c", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--repetitions", type=int)
    p.add_argument("--block-cap", dest="block_cap", type=int)
    p.add_argument("--no-certify", action="store_true", help="skip the dense residual certificate")
    p.add_argument("--out")
    p.set_defaults(func=cmd_lra)

    b = sub.add_parser("bench", help="query-count sweep over a plan file")
    b.add_argument("plan")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    h = sub.add_parser("hardness", help="min-eigenvalue reduction on Wishart hard instances")
    h.add_argument("--n", type=int, required=True)
    h.add_argument("--p", type=float, required=True)
    h.add_argument("--trials", type=int, default=10)
    h.add_argument("--c", type=float, default=4.0)
    h.add_argument("--calibration", type=float, default=1.0)
    h.add_argument("--seed", type=int)
    h.add_argument("--out")
    h.set_defaults(func=cmd_hardness)

    v = sub.add_parser("verify", help="randomized inequality suites")
    v.add_argument("--suite", default="all", choices=["all", *SUITES])
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--seed", type=int)
    v.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except (ParseError, ValueError, KeyError, FileNotFoundError) as exc:
        print(f"schattenlra: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
