import argparse

from fracwave.harness.selftest import FAULTS, SUITES, format_summary, run_selftest


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("selftest", help="run the property suites")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--fault", choices=FAULTS, help="inject a known defect")
    parser.add_argument("--suite", action="append", choices=list(SUITES), help="run only this suite (repeatable)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """Exit 0 only when every suite passes."""
    results = run_selftest(seed=args.seed, fault=args.fault, suites=args.suite)
    print(format_summary(results))
    return 0 if all(r.passed for r in results) else 1
