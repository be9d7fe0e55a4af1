import argparse

import numpy as np

from fracwave.commands.deps import validate
from fracwave.numerics.fracops import MittagLefflerParams, mittag_leffler


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("ml", help="evaluate the Mittag-Leffler function E_{alpha,beta}(z)")
    parser.add_argument("--alpha", type=float, required=True)
    parser.add_argument("--beta", type=float, default=1.0)
    parser.add_argument("--z", type=float, nargs="+", required=True)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """Print one `z value` line per argument."""
    params = validate(MittagLefflerParams, {"alpha": args.alpha, "beta": args.beta})
    values = np.atleast_1d(mittag_leffler(params, np.asarray(args.z, dtype=float)))
    for z, value in zip(args.z, values):
        print(f"{z!r} {float(value)!r}")
    return 0
