"""Exception hierarchy shared by the library and the command line."""
from typing import Optional


class FracwaveError(Exception):
    """Base error: a human readable detail plus the process exit code."""

    exit_code: int = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class DomainError(FracwaveError, ValueError):
    """A parameter lies outside the mathematical domain of an operation."""

    exit_code = 2


class ConfigurationError(FracwaveError):
    """Inconsistent grids, plans, descriptors or user configuration."""

    exit_code = 2


class SingularOperatorError(FracwaveError, ArithmeticError):
    """A zero pivot was met while factoring a tridiagonal operator."""


class MittagLefflerOverflowError(FracwaveError, OverflowError):
    """E_{alpha,beta}(z) exceeds the floating point range."""


class TruncationError(FracwaveError):
    """The spectral series cannot reach the requested tolerance."""

    def __init__(self, detail: str, estimate: float, n_modes: int):
        super().__init__(detail)
        self.estimate = estimate
        self.n_modes = n_modes


class ResourceError(FracwaveError):
    """A requested solve does not fit the configured memory ceiling."""

    exit_code = 3

    def __init__(self, detail: str, advisory: Optional[str] = None):
        super().__init__(detail if advisory is None else f"{detail} ({advisory})")
        self.advisory = advisory


class OutputError(FracwaveError, OSError):
    """Reading or writing a result file failed."""

    def __init__(self, detail: str, path: str):
        super().__init__(f"{path}: {detail}")
        self.path = path


class AcceptanceError(FracwaveError):
    """Observed behaviour falls outside its acceptance band."""
