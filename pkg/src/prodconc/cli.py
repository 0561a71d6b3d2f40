"""Command-line front end.

Exit status: 0 when every check passes, 1 when a mathematical check fails,
2 on bad input or violated preconditions.
"""

from __future__ import annotations

import argparse
import logging
import sys

from . import concentration as conc
from .errors import (
    InternalContradiction,
    InvalidParameter,
    ParseError,
    ProdConcError,
    UniversalityFailed,
)
from .inequalities import SUITES, run_suite
from .montecarlo import MonteCarloConfig
from .serialize import emit_report, load_json, parse_family, parse_rv, parse_space
from .space import uniform_product

log = logging.getLogger("prodconc")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prodconc",
        description="Locate and verify concentration intervals on finite product spaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_function=True, function_flag="--function"):
        p.add_argument("--space", help="space specification (JSON)")
        if needs_function:
            p.add_argument(function_flag, dest="function", required=True,
                           help="random-variable specification (JSON)")
        p.add_argument("--output", "-o", default="-", help="report path ('-' for stdout)")
        p.add_argument("--seed", type=int, default=0)

    def concentration_args(p):
        p.add_argument("--epsilon", type=float, required=True)
        p.add_argument("--p", type=float, default=2.0)
        p.add_argument("--subset-cap", type=int, default=4096,
                       help="check every subset of J while 2^|J| stays within this")
        p.add_argument("--random-subsets", type=int, default=256)
        p.add_argument("--samples", type=int, default=None,
                       help="enable the sampling fallback with this many draws")
        p.add_argument("--confidence", type=float, default=0.99)

    p = sub.add_parser("locate", help="find the interval J only")
    common(p)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--p", type=float, default=2.0)

    p = sub.add_parser("verify", help="locate J and check concentration on subsets of J")
    common(p)
    concentration_args(p)

    p = sub.add_parser("corollary2", help="concentration of section probabilities of an event")
    common(p, function_flag="--event")
    concentration_args(p)

    p = sub.add_parser("lemma8", help="an m-block where every section has mass within eta")
    common(p, function_flag="--event")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--n", type=int, help="build the uniform space k^n when --space is absent")

    p = sub.add_parser("theorem9", help="one interval for a family of variables")
    common(p, function_flag="--family")
    concentration_args(p)

    p = sub.add_parser("ineq", help="randomised inequality suites")
    p.add_argument("--suite", choices=SUITES + ("all",), default="all")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p", type=_floats, default=None, help="comma-separated exponents")
    p.add_argument("--output", "-o", default="-")

    p = sub.add_parser("counterexample", help="the product event that defeats p = 1")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--output", "-o", default="-")
    return parser


def _validate(args) -> None:
    eps = getattr(args, "epsilon", None)
    if eps is not None and not 0 < eps <= 1:
        raise InvalidParameter(f"--epsilon must lie in (0, 1], got {eps}")
    p = getattr(args, "p", None)
    if isinstance(p, float) and not p > 1:
        raise InvalidParameter(f"--p must exceed 1, got {p}")
    if args.command == "lemma8":
        if args.k < 2 or args.m < 1:
            raise InvalidParameter("--k must be >= 2 and --m >= 1")
        if not 0 < args.eta <= 1:
            raise InvalidParameter("--eta must lie in (0, 1]")
    if args.command == "ineq" and args.trials < 1:
        raise InvalidParameter("--trials must be positive")


def _space(args):
    if args.space:
        return parse_space(load_json(args.space))
    if args.command == "lemma8" and args.n is not None:
        return uniform_product(args.k, args.n)
    raise ParseError("--space is required")


def _policy(args) -> conc.SubsetPolicy:
    return conc.SubsetPolicy(args.subset_cap, args.random_subsets, args.seed)


def _montecarlo(args) -> MonteCarloConfig | None:
    if args.samples is None:
        return None
    return MonteCarloConfig(args.samples, args.confidence, args.seed)


def _finish(report, output: str, passed: bool) -> int:
    emit_report(report, output)
    doc = report if isinstance(report, dict) else report.to_dict()
    interval = doc.get("interval")
    where = f" J=[{interval['lo']}, {interval['hi']}]" if isinstance(interval, dict) else ""
    log.info("%s: %s%s", doc.get("statement", "report"), "pass" if passed else "FAIL", where)
    return EXIT_OK if passed else EXIT_FAIL


def run(args) -> int:
    _validate(args)
    cmd = args.command
    if cmd == "ineq":
        reports = run_suite(args.suite, args.trials, args.seed, args.p)
        bad = sum(not r.holds for r in reports)
        log.info("%d checks, %d violations", len(reports), bad)
        emit_report([r.to_dict() for r in reports], args.output)
        return EXIT_FAIL if bad else EXIT_OK
    if cmd == "counterexample":
        report = conc.check_p1_counterexample(args.n)
        return _finish(report, args.output, report.passed)

    space = _space(args)
    doc = load_json(args.function)
    if cmd == "theorem9":
        family = parse_family(doc, space)
        _, _, report = conc.theorem9_locate(
            family, args.epsilon, args.p, _policy(args), _montecarlo(args)
        )
    else:
        rv = parse_rv(doc, space)
        if cmd == "locate":
            J, params, gap = conc.locate_interval(rv, args.epsilon, args.p)
            report = {
                "statement": "locate",
                "n": space.n,
                "interval": {"lo": J.lo, "hi": J.hi},
                **params.to_dict(),
                "gap": gap,
                "pass": True,
            }
            return _finish(report, args.output, True)
        if cmd == "verify":
            report = conc.verify_theorem1(rv, args.epsilon, args.p, _policy(args), _montecarlo(args))
        elif cmd == "corollary2":
            report = conc.verify_corollary2(rv, args.epsilon, args.p, _policy(args), _montecarlo(args))
        elif cmd == "lemma8":
            try:
                _, report = conc.lemma8_interval(rv, args.k, args.m, args.eta)
            except UniversalityFailed as exc:
                failure = {"statement": "lemma8", "pass": False, "error": str(exc)}
                return _finish(failure, args.output, False)
        else:
            raise ParseError(f"unknown command {cmd!r}")
    return _finish(report, args.output, report.passed)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except InternalContradiction as exc:
        log.error("check failed: %s", exc)
        return EXIT_FAIL
    except (ProdConcError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
