"""Command-line front end: ``qso check | invert | discretize | solve-hammerstein``.

Each invocation prints one JSON report on stdout. Exit codes: 0 success,
2 input error, 3 convergence failure, 4 missing certificate.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time

from . import io
from .analysis import (
    check_orthogonality_preserving,
    check_surjectivity,
    find_pi_volterra_permutation,
    is_volterra,
)
from .errors import EmbeddingResidualFail, NoCertificate, NoConvergence, NotSurjective
from .hammerstein import solve_hammerstein
from .measure import check_escape_sets, discretize_kernel
from .preimage import least_squares_preimage, solve_preimage

EXIT_OK, EXIT_INPUT, EXIT_CONVERGENCE, EXIT_CERTIFICATE = 0, 2, 3, 4


def _digest(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def cmd_check(args):
    P = io.tensor_from_json(io.read_json(args.tensor))
    tol = 1e-9 if args.tol is None else args.tol
    pi = find_pi_volterra_permutation(P, tol)
    return {
        "volterra": is_volterra(P, tol),
        "pi_volterra": None if pi is None else [p + 1 for p in pi],
        "orthogonality": io.verdict_to_json(
            check_orthogonality_preserving(
                P, n_samples=args.samples, rng_seed=args.seed, tol=tol,
                finite_total=args.finite_total,
            )
        ),
        "surjectivity": io.verdict_to_json(
            check_surjectivity(P, tol, finite_total=args.finite_total)
        ),
    }, None


def cmd_invert(args):
    P = io.tensor_from_json(io.read_json(args.tensor))
    y = io.vector_from_json(io.read_json(args.target))
    tol = 1e-10 if args.tol is None else args.tol
    verdict = check_surjectivity(P, finite_total=True)
    if verdict.sequence is None:
        if not args.force:
            raise NoCertificate(f"operator is {verdict.status.value}: {verdict.note}")
        sol = least_squares_preimage(P, y, rng_seed=args.seed)
    else:
        sol = solve_preimage(P, y, tol, sequence=verdict.sequence, max_iter=args.max_iter)
    payload = io.preimage_to_json(sol)
    return {"surjectivity": io.verdict_to_json(verdict), "solution": payload}, payload


def cmd_discretize(args):
    kernel = io.kernel_from_json(io.read_json(args.kernel))
    tensor = io.tensor_to_json(discretize_kernel(kernel))
    return {"tensor": tensor, "escape_cells": [k + 1 for k in check_escape_sets(kernel)]}, tensor


def cmd_solve_hammerstein(args):
    problem = io.problem_from_json(io.read_json(args.problem))
    tol = 1e-9 if args.tol is None else args.tol
    sol = io.density_to_json(solve_hammerstein(problem, tol, force=args.force))
    return {"solution": sol}, sol


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="tolerance (command-specific default)")
    common.add_argument("--seed", type=int, default=0, help="random seed")
    common.add_argument("--out", default=None, help="also write the tensor/solution to this file")
    common.add_argument("--pretty", action="store_true", help="indented JSON and a summary on stderr")
    common.add_argument("--force", action="store_true", help="attempt uncertified solves")
    common.add_argument("--timing", action="store_true", help="include wall time in the report")

    parser = argparse.ArgumentParser(prog="qso", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="classify a DQSO")
    p.add_argument("tensor")
    p.add_argument("--finite-total", action="store_true",
                   help="the tensor is the complete operator, not a truncation")
    p.add_argument("--samples", type=int, default=1000, help="orthogonal pairs to sample")
    p.set_defaults(func=cmd_check, inputs=("tensor",))

    p = sub.add_parser("invert", parents=[common], help="solve V(x) = y")
    p.add_argument("tensor")
    p.add_argument("target")
    p.add_argument("--max-iter", type=int, default=100)
    p.set_defaults(func=cmd_invert, inputs=("tensor", "target"))

    p = sub.add_parser("discretize", parents=[common], help="kernel file to tensor")
    p.add_argument("kernel")
    p.set_defaults(func=cmd_discretize, inputs=("kernel",))

    p = sub.add_parser("solve-hammerstein", parents=[common], help="solve a Hammerstein problem")
    p.add_argument("problem")
    p.set_defaults(func=cmd_solve_hammerstein, inputs=("problem",))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    report = {"command": args.command, "seed": args.seed}
    try:
        report["inputs"] = {name: _digest(getattr(args, name)) for name in args.inputs}
        result, payload = args.func(args)
        code = EXIT_OK
    except (NoConvergence, EmbeddingResidualFail) as exc:
        result, payload, code = {"error": type(exc).__name__, "message": str(exc)}, None, EXIT_CONVERGENCE
    except (NoCertificate, NotSurjective) as exc:
        result, payload, code = {"error": type(exc).__name__, "message": str(exc)}, None, EXIT_CERTIFICATE
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"qso {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report["result"] = result
    report["exit_code"] = code
    if args.timing:
        report["wall_time"] = time.perf_counter() - start
    if payload is not None and args.out:
        io.dump(payload, args.out, pretty=args.pretty)
    print(io.dump(report, pretty=args.pretty))
    if code != EXIT_OK:
        print(f"qso {args.command}: {result['message']}", file=sys.stderr)
    elif args.pretty:
        print(f"qso {args.command}: ok", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
