"""
wsatlab command line
JSON on stdout, diagnostics on stderr. Exit codes: 0 success, 1 check failure,
2 usage error, 3 solver budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import sys
from collections.abc import Sequence
from fractions import Fraction
from typing import Any

from backend.config import config
from backend.services.bounds_service import get_bounds_service
from backend.services.constructions_service import CATALOGUE, get_constructions_service
from backend.services.errors import WsatLabError
from backend.services.graph_core import parse_graph6, to_graph6
from backend.services.invariants_service import get_invariants_service
from backend.services.logger import configure_from_settings, get_logger
from backend.services.percolation_service import get_percolation_service
from backend.services.solver_service import get_solver_service
from backend.services.verify_service import SUITES, get_verify_service

logger = get_logger("cli")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from e


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"expected a rational like 3/2, got {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wsatlab", description=config.APP_DESCRIPTION)
    parser.add_argument("--version", action="version", version=f"%(prog)s {config.APP_VERSION}")
    parser.add_argument(
        "--log-level",
        type=str.upper,
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        default=None,
        help="override WSATLAB_LOG_LEVEL",
    )
    parser.add_argument("--format", choices=["json", "g6"], default="json")
    parser.add_argument(
        "--induced", action="store_true", help="induced copies (ignored with a warning)"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("invariants", help="BoundProfile of a pattern")
    p.add_argument("--pattern", required=True)
    p.add_argument("--i-max", type=int, default=None)

    for name, text in (("closure", "closure trace of a host"), ("check", "weak saturation check")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--pattern", required=True)
        p.add_argument("--graph", required=True, help="host graph in graph6")

    p = sub.add_parser("bounds", help="BoundReport for an n-range")
    p.add_argument("--pattern", required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--n-min", type=int, default=None)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--r", type=int, default=None, help="also report the g*_r upper-bound status at r")
    p.add_argument("--cf", type=_fraction, default=None, help="certified c_F for the linear lower bound")

    p = sub.add_parser("construct", help="build a named construction")
    p.add_argument("name", choices=sorted(CATALOGUE))
    p.add_argument("--params", type=_int_list, default=None)
    p.add_argument("--pattern", default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--p", type=_int_list, default=None, help="distinguished set P")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--host-a", default=None)
    p.add_argument("--host-b", default=None)
    p.add_argument("--variant", choices=["fixed-sets", "first-copy"], default="fixed-sets")
    p.add_argument("--verify", action="store_true", help="closure-check the claimed property")

    p = sub.add_parser("solve", help="exact wsat(n, F)")
    p.add_argument("--pattern", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--budget-nodes", type=int, default=None)
    p.add_argument("--budget-ms", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--canonical", action="store_true", help="isomorph rejection at leaves")
    p.add_argument(
        "--all-witnesses", action="store_true", help="every minimum witness up to relabeling"
    )

    p = sub.add_parser("verify", help="run a named verification suite")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--v", type=int, default=None)
    p.add_argument("--delta", type=int, default=None)
    p.add_argument("--n-max", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    return parser


def _emit(payload: Any, graph6: str | None, fmt: str) -> None:
    if fmt == "g6" and graph6 is not None:
        sys.stdout.write(graph6 + "\n")
    else:
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")


def _n_range(args: argparse.Namespace, v: int) -> range:
    if args.n is not None:
        return range(args.n, args.n + 1)
    lo = v if args.n_min is None else args.n_min
    hi = lo + 3 if args.n_max is None else args.n_max
    if hi < lo:
        raise argparse.ArgumentTypeError(f"--n-max {hi} is below --n-min {lo}")
    return range(lo, hi + 1)


def run(args: argparse.Namespace) -> int:
    constructions = get_constructions_service()
    command = args.command

    if command == "verify":
        report = get_verify_service().run(
            args.suite, v=args.v, delta=args.delta, n_max=args.n_max, seed=args.seed
        )
        _emit(report.to_json_dict(), None, "json")
        return EXIT_OK if report.passed else EXIT_CHECK_FAILED

    if command == "construct":
        result = constructions.build(
            args.name,
            params=args.params,
            pattern=args.pattern,
            n=args.n,
            p=args.p,
            steps=args.steps,
            host_a=args.host_a,
            host_b=args.host_b,
            variant=args.variant,
        )
        payload = result.to_json_dict()
        verified = constructions.verify(result) if args.verify else None
        payload["verified"] = verified
        _emit(payload, to_graph6(result.graph), args.format)
        if not result.count_matches or verified is False:
            return EXIT_CHECK_FAILED
        return EXIT_OK

    f, distinguished = constructions.resolve_pattern(args.pattern)

    if command == "invariants":
        profile = get_invariants_service().profile(f, i_max=args.i_max)
        _emit(profile.to_json_dict(), to_graph6(f.graph), args.format)
        return EXIT_OK

    if command in ("closure", "check"):
        host = parse_graph6(args.graph)
        percolation = get_percolation_service()
        trace = percolation.trace(f, host)
        if command == "closure":
            _emit(trace.to_json_dict(), to_graph6(trace.final), args.format)
            return EXIT_OK
        saturated = trace.final.is_complete()
        payload = {"pattern": f.label(), "n": host.n, "weakly_saturated": saturated, "certificate": trace.to_json_dict()}
        _emit(payload, None, "json")
        return EXIT_OK if saturated else EXIT_CHECK_FAILED

    if command == "bounds":
        n_values = _n_range(args, f.v)
        profile = get_invariants_service().profile(f, i_max=n_values.stop - f.v)
        bounds = get_bounds_service()
        payload: dict[str, Any] = {
            "pattern": f.label(),
            "reports": [
                bounds.report(profile, n, cf=args.cf, distinguished=distinguished).to_json_dict()
                for n in n_values
            ],
        }
        if args.r is not None:
            payload["bridges_status"] = bounds.bridges_status(profile, args.r).to_json_dict()
        _emit(payload, None, "json")
        return EXIT_OK

    if command == "solve":
        result = get_solver_service().wsat_exact(
            f,
            args.n,
            budget_nodes=args.budget_nodes,
            budget_ms=args.budget_ms,
            workers=args.workers,
            canonical=args.canonical or None,
            all_witnesses=args.all_witnesses,
        )
        witness = to_graph6(result.witness) if result.witness is not None and result.exact else None
        _emit(result.to_json_dict(), witness, args.format)
        return EXIT_OK if result.exact else EXIT_BUDGET

    raise AssertionError(f"unhandled command {command}")


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    configure_from_settings(level=args.log_level)
    if args.induced:
        logger.warning("--induced is not supported; proceeding with non-induced copies")
    try:
        return run(args)
    except (WsatLabError, argparse.ArgumentTypeError) as e:
        logger.error(f"{args.command}: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
