"""Command-line entry point: ``cvxnetflow --input FILE [--format json] ...``.

Exit codes: 0 solved (optimal or heuristic stop), 1 parse or usage error,
2 infeasible, 3 iteration cap reached.
"""

from __future__ import annotations

import argparse
import sys

from .errors import Infeasible, ParseError, TooManyCycles
from .instance import emit_result, parse_instance
from .oracles import cycle_space_bruteforce
from .solver import SolveResult, SolverParams, Termination, solve

EXIT_CODES = {
    Termination.OPTIMAL: 0,
    Termination.HEURISTIC_LAMBDA_ONE: 0,
    Termination.INFEASIBLE: 2,
    Termination.MAX_ITERATIONS: 3,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cvxnetflow", description="Solve a minimum convex-cost network flow instance.")
    p.add_argument("--input", metavar="FILE", help="instance file (default: stdin)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--eps-opt", type=float, default=SolverParams.eps_opt)
    p.add_argument("--max-iters", type=int, default=SolverParams.max_iters)
    p.add_argument("--ls-tol", type=float, default=SolverParams.ls_tol)
    p.add_argument("--trace", action="store_true", help="include per-iteration records")
    p.add_argument(
        "--oracle-check", action="store_true",
        help="compare with a grid search over cycle amplitudes (at most 4 cycles)",
    )
    return p


def run_cli(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        params = SolverParams(
            eps_opt=args.eps_opt, ls_tol=args.ls_tol, max_iters=args.max_iters,
            record_trace=args.trace,
        )
    except ValueError as exc:
        print(f"cvxnetflow: {exc}", file=sys.stderr)
        return 1
    try:
        if args.input:
            with open(args.input, "rb") as fh:
                data = fh.read()
        else:
            data = sys.stdin.buffer.read()
        network = parse_instance(data)
    except OSError as exc:
        print(f"cvxnetflow: {exc}", file=sys.stderr)
        return 1
    except ParseError as exc:
        print(f"cvxnetflow: ParseError: {exc}", file=sys.stderr)
        return 1

    try:
        result = solve(network, params)
    except Infeasible as exc:
        print(f"cvxnetflow: infeasible: {exc}", file=sys.stderr)
        result = SolveResult.infeasible()

    extra = None
    if args.oracle_check and result.flows is not None:
        try:
            oracle = cycle_space_bruteforce(network, result.flows)
        except TooManyCycles as exc:
            print(f"cvxnetflow: oracle check skipped: {exc}", file=sys.stderr)
        else:
            extra = {"oracle": {
                "objective": float(f"{oracle.objective:.12g}"),
                "gap": float(f"{result.objective - oracle.objective:.12g}"),
            }}
    sys.stdout.write(emit_result(result, network, args.format, trace=args.trace, extra=extra))
    return EXIT_CODES[result.termination]


def main():
    raise SystemExit(run_cli())


if __name__ == "__main__":
    main()
