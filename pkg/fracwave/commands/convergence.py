import argparse
import logging
from pathlib import Path

from fracwave.commands.deps import (custom_source, load_json_config,
                                    merge_config, parse_levels, validate)
from fracwave.core.errors import AcceptanceError
from fracwave.harness.study import order_failures, run_convergence_study
from fracwave.schemas.study import StudyConfig

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("convergence", help="run a refinement study against a reference")
    parser.add_argument("--config", type=Path, help="JSON file mirroring these flags")
    parser.add_argument("--alpha", dest="alphas", type=float, nargs="+", help="one or more orders in (1, 2)")
    parser.add_argument("--example", type=int, choices=(1, 2))
    parser.add_argument("--mu-t", type=float, help="custom source time exponent")
    parser.add_argument("--mu-x", type=float, help="custom source space exponent")
    parser.add_argument("--vary", choices=("space", "time"))
    parser.add_argument("--levels", type=parse_levels, help="dyadic levels, e.g. 4-7")
    parser.add_argument("--J", type=int, help="time steps held fixed in a space study (default: ref-J)")
    parser.add_argument("--N", type=int, help="interior nodes held fixed in a time study (default: ref-N)")
    parser.add_argument("--ref-J", type=int)
    parser.add_argument("--ref-N", type=int)
    parser.add_argument("--ref-kind", choices=("fine-grid", "spectral"))
    parser.add_argument("--spectral-tol", type=float)
    parser.add_argument("--spectral-modes", type=int)
    parser.add_argument("--e2-rule", choices=("cell_average", "jump_quadrature"))
    parser.add_argument("--csv", type=Path, help="report CSV (plot data is written next to it)")
    parser.add_argument("--threads", type=int)
    parser.add_argument("--check", action="store_true", help="exit 1 when a finest-pair order leaves its band")
    parser.set_defaults(handler=run)


def study_config(args: argparse.Namespace) -> StudyConfig:
    """Merge the JSON config with the flags (flags win) and validate."""
    flags = {
        "alphas": args.alphas,
        "example": args.example,
        "source": custom_source(args.mu_t, args.mu_x),
        "vary": args.vary,
        "levels": args.levels,
        "J": args.J,
        "N": args.N,
        "ref_J": args.ref_J,
        "ref_N": args.ref_N,
        "ref_kind": args.ref_kind,
        "spectral_tol": args.spectral_tol,
        "spectral_modes": args.spectral_modes,
        "e2_rule": args.e2_rule,
        "csv": args.csv,
        "threads": args.threads,
    }
    file_values = load_json_config(args.config)
    if "alpha" in file_values:
        # the flag is --alpha but it fills the alphas list
        alpha = file_values.pop("alpha")
        file_values["alphas"] = alpha if isinstance(alpha, list) else [alpha]
    return validate(StudyConfig, merge_config(file_values, flags))


def run(args: argparse.Namespace) -> int:
    """Run the study, print the CSV rows and optionally enforce the rate bands."""
    cfg = study_config(args)
    report = run_convergence_study(cfg)
    for curve in report.curves:
        for level in curve.levels:
            print(
                f"alpha={curve.alpha!r} {curve.vary} level={level.level} "
                f"E1={level.E1:.6e} E2={level.E2:.6e} "
                f"order_E1={level.order_E1} order_E2={level.order_E2}"
            )
    if args.check:
        failures = order_failures(report)
        if failures:
            raise AcceptanceError("; ".join(failures))
        logger.info("all finest-pair orders inside their bands")
    return 0
