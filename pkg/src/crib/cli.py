"""``crib`` command line: gen, verify, run, report."""

from __future__ import annotations

import argparse
import dataclasses
import sys

from crib.agents import AGENT_NAMES, GA_PRESETS, GaConfig
from crib.core import DEFAULT_BUDGET, DOMAINS
from crib.errors import CribError
from crib.harness import load_results, report, run_suite
from crib.painting import DEFAULT_SIZE
from crib.suite import verify_suite, write_suite


def parse_size(text: str) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like 64x64, got {text!r}") from None
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError("size must be positive")
    return w, h


GA_FLAGS = (
    ("--population", "population", int),
    ("--iterations", "iterations", int),
    ("--mutation-rate", "mutation_rate", float),
    ("--parents", "parents_selected", int),
    ("--children", "children_per_iteration", int),
    ("--invent-rate", "invent_rate", float),
)


def ga_config(args: argparse.Namespace) -> GaConfig | None:
    """The preset for ``args.agent`` with any GA flags applied, or None if none were given."""
    overrides = {f: getattr(args, f) for _, f, _ in GA_FLAGS if getattr(args, f) is not None}
    if not overrides:
        return None
    if args.agent not in GA_PRESETS:
        raise CribError(f"GA flags only apply to {' and '.join(GA_PRESETS)}")
    try:
        return dataclasses.replace(GA_PRESETS[args.agent], **overrides)
    except ValueError as exc:
        raise CribError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="crib", description="Creative invention benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a problem suite")
    gen.add_argument("--domain", required=True, choices=DOMAINS + ("all",))
    gen.add_argument("--count", type=int, required=True, help="problems per domain")
    gen.add_argument("--seed", type=int, required=True, help="master seed")
    gen.add_argument("--size", type=parse_size, default=DEFAULT_SIZE,
                     help="canvas size WxH for painting and photobash (default 64x64)")
    gen.add_argument("--out", required=True, help="output directory")

    ver = sub.add_parser("verify", help="check a suite's guarantees")
    ver.add_argument("--suite", required=True)

    run = sub.add_parser("run", help="run an agent over a suite")
    run.add_argument("--suite", required=True)
    run.add_argument("--agent", required=True, choices=AGENT_NAMES)
    run.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="score calls per problem")
    run.add_argument("--parallel", type=int, default=1, help="worker processes")
    run.add_argument("--seed", type=int, default=0, help="agent seed")
    run.add_argument("--skip-verify", action="store_true",
                     help="run without verifying the suite first")
    run.add_argument("--out", required=True, help="results file")
    ga = run.add_argument_group("GA constants", "override the ga100/ga1000 preset values")
    for flag, field, kind in GA_FLAGS:
        ga.add_argument(flag, dest=field, type=kind, default=None)

    rep = sub.add_parser("report", help="print a score grid from results files")
    rep.add_argument("--results", required=True, nargs="+")
    rep.add_argument("--markdown", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            if args.count < 1:
                raise CribError("--count must be >= 1")
            out = write_suite(args.out, args.domain, args.count, args.seed, args.size)
            print(f"wrote suite to {out}")
        elif args.command == "verify":
            result = verify_suite(args.suite)
            for line in result.failures:
                print(f"FAIL {line}")
            status = "ok" if result.ok else f"{len(result.failures)} failure(s)"
            print(f"checked {result.checked} problems: {status}")
            return 0 if result.ok else 1
        elif args.command == "run":
            result = run_suite(args.suite, args.agent, args.budget, args.parallel, args.out,
                               seed=args.seed, verify=not args.skip_verify,
                               ga=ga_config(args))
            print(report([result]), end="")
        elif args.command == "report":
            print(report([load_results(p) for p in args.results], markdown=args.markdown), end="")
    except CribError as exc:
        print(f"crib: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
