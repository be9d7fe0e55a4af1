import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from fracwave.commands import convergence, ml, selftest, solve
from fracwave.config import settings
from fracwave.core.errors import ConfigurationError, FracwaveError
from fracwave.core.logging import configure_logging

logger = logging.getLogger("fracwave")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=settings.app_name,
        description="Petrov-Galerkin solver for the time-fractional wave equation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.app_version}")
    parser.add_argument("--log-level", help="override FRACWAVE_LOG_LEVEL")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Include commands
    solve.register(subparsers)
    convergence.register(subparsers)
    ml.register(subparsers)
    selftest.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except ValidationError as exc:
        error: FracwaveError = ConfigurationError(str(exc))
    except FracwaveError as exc:
        error = exc
    logger.error(error.detail)
    return error.exit_code


if __name__ == "__main__":
    sys.exit(main())
