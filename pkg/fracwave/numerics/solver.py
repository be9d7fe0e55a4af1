"""Block lower-triangular Toeplitz solves: direct stepping and divide-and-conquer.

Both solvers work on the increments D_i = U_i - U_{i-1}. Row s (0-based) reads

    sum_{m=0}^{s} (a_m M + b_m A) D_{s-m} = F_s - tau A u0h

with a_m = kappa_m / tau, b_0 = tau / 2 and b_m = tau for m >= 1.
"""
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy import fft, linalg
from scipy.linalg import lapack

from fracwave.config import settings
from fracwave.core.errors import (ConfigurationError, OutputError,
                                  SingularOperatorError)
from fracwave.numerics.mesh_fem import (SolutionField, SpatialMesh,
                                        TemporalGrid, TridiagonalOperator)
from fracwave.numerics.scheme import DiscreteSystem, step_operator

logger = logging.getLogger(__name__)

__all__ = [
    "SolutionField",
    "TridiagonalFactor",
    "ToeplitzPlan",
    "factor_tridiagonal",
    "thomas_solve",
    "make_plan",
    "toeplitz_matvec",
    "solve_stepping",
    "solve_fast_dnc",
    "save_field",
    "load_field",
]


@dataclass(frozen=True)
class TridiagonalFactor:
    """LU factors of a tridiagonal matrix.

    Operators of size >= 3 keep the LAPACK gttrf layout; smaller ones keep a
    dense getrf factorization in `dense`.
    """

    dl: np.ndarray
    d: np.ndarray
    du: np.ndarray
    du2: np.ndarray
    ipiv: np.ndarray
    dense: Optional[Tuple[np.ndarray, np.ndarray]] = None

    @property
    def size(self) -> int:
        return int(self.d.size)

    def solve(self, rhs: ArrayLike) -> np.ndarray:
        """Solve for one right-hand side (N,) or several columns (N, k)."""
        b = np.array(rhs, dtype=float)
        if b.shape[0] != self.size:
            raise ConfigurationError(f"right-hand side has {b.shape[0]} rows, operator has {self.size}")
        columns = b.reshape(self.size, -1)
        if self.dense is not None:
            return linalg.lu_solve(self.dense, columns).reshape(b.shape)
        x, info = lapack.dgttrs(self.dl, self.d, self.du, self.du2, self.ipiv, columns)
        if info != 0:
            raise SingularOperatorError(f"tridiagonal solve failed (info={info})")
        return np.asarray(x).reshape(b.shape)


def _factor_small(op: TridiagonalOperator) -> TridiagonalFactor:
    """Dense LU for 1x1 and 2x2 operators, which gttrf does not accept."""
    matrix = op.to_dense()
    if np.linalg.det(matrix) == 0.0:
        raise SingularOperatorError(f"singular {op.size}x{op.size} operator")
    lu, piv = linalg.lu_factor(matrix)
    empty = np.empty(0)
    return TridiagonalFactor(empty, op.diag.copy(), empty, empty, piv, dense=(lu, piv))


def factor_tridiagonal(op: TridiagonalOperator) -> TridiagonalFactor:
    """Factor once; raise on an exactly zero pivot."""
    if op.size <= 2:
        return _factor_small(op)
    try:
        dl, d, du, du2, ipiv, info = lapack.dgttrf(op.sub, op.diag, op.sup)
    except ValueError as exc:
        raise SingularOperatorError(f"tridiagonal factorization failed: {exc}") from exc
    if info > 0:
        raise SingularOperatorError(f"zero pivot in row {info - 1}")
    if info < 0:
        raise ConfigurationError(f"invalid tridiagonal operator (argument {-info})")
    return TridiagonalFactor(dl=dl, d=d, du=du, du2=du2, ipiv=ipiv)


def thomas_solve(op: TridiagonalOperator, rhs: ArrayLike) -> np.ndarray:
    """Solve op @ x = rhs."""
    return factor_tridiagonal(op).solve(rhs)


@dataclass(frozen=True)
class ToeplitzPlan:
    """Frequency-domain image of a causal kernel truncated to `size` blocks."""

    size: int
    fft_length: int
    kernel_hat: np.ndarray


def make_plan(kernel: ArrayLike, size: int) -> ToeplitzPlan:
    kernel = np.asarray(kernel, dtype=float)
    if size < 1:
        raise ConfigurationError(f"plan size must be >= 1, got {size}")
    if kernel.size < size:
        raise ConfigurationError(f"kernel has {kernel.size} entries, plan needs {size}")
    length = 1 << max(0, math.ceil(math.log2(2 * size - 1)))
    kernel_hat = fft.rfft(kernel[:size], n=length)
    kernel_hat.setflags(write=False)
    return ToeplitzPlan(size=size, fft_length=length, kernel_hat=kernel_hat)


def toeplitz_matvec(
    kernel: ArrayLike,
    blocks: ArrayLike,
    plan: Optional[ToeplitzPlan] = None,
) -> np.ndarray:
    """y_i = sum_{m=0}^{i} kernel_m blocks_{i-m}, one FFT convolution per column."""
    kernel = np.asarray(kernel, dtype=float)
    blocks = np.asarray(blocks, dtype=float)
    n = blocks.shape[0]
    if kernel.size < n:
        raise ConfigurationError(f"kernel has {kernel.size} entries for {n} blocks")
    if plan is None:
        plan = make_plan(kernel, n)
    elif plan.size != n or plan.fft_length < 2 * n - 1:
        raise ConfigurationError(f"plan for {plan.size} blocks used with {n} blocks")

    shape = (plan.fft_length // 2 + 1,) + (1,) * (blocks.ndim - 1)
    spectrum = fft.rfft(blocks, n=plan.fft_length, axis=0, workers=settings.fft_workers)
    spectrum *= plan.kernel_hat.reshape(shape)
    return fft.irfft(spectrum, n=plan.fft_length, axis=0, workers=settings.fft_workers)[:n]


class _IncrementSolver:
    """Shared state of one solve: factor, kernels and the increment array."""

    def __init__(self, sys: DiscreteSystem, length: int) -> None:
        self.sys = sys
        self.tau = sys.tau
        self.factor = factor_tridiagonal(step_operator(sys))
        self.a = np.zeros(length)
        self.a[:len(sys.kappa)] = sys.kappa.kappa / sys.tau
        self.rhs = np.zeros((length, sys.spatial.N))
        self.rhs[:sys.temporal.J] = sys.rhs - sys.tau * sys.stiffness.matvec(sys.u0h)
        self.increments = np.zeros_like(self.rhs)
        self.plans: Dict[int, ToeplitzPlan] = {}

    def step_block(self, lo: int, hi: int, history: np.ndarray) -> None:
        """Time-step rows lo..hi-1; `history` holds the contributions of rows < lo."""
        d = self.increments
        running = np.zeros(d.shape[1])
        for s in range(lo, hi):
            k = s - lo
            rhs = self.rhs[s] - history[k]
            if k > 0:
                rhs -= self.sys.mass.matvec(self.a[k:0:-1] @ d[lo:s])
                rhs -= self.tau * self.sys.stiffness.matvec(running)
            d[s] = self.factor.solve(rhs)
            running += d[s]

    def cross_history(self, lo: int, mid: int, hi: int) -> np.ndarray:
        """Contributions of rows lo..mid-1 to rows mid..hi-1."""
        size = hi - lo
        plan = self.plans.get(size)
        if plan is None:
            plan = self.plans[size] = make_plan(self.a, size)
        blocks = np.zeros((size, self.increments.shape[1]))
        blocks[:mid - lo] = self.increments[lo:mid]
        mass_part = toeplitz_matvec(self.a, blocks, plan)[mid - lo:]
        stiff_part = self.tau * np.sum(self.increments[lo:mid], axis=0)
        return self.sys.mass.matvec(mass_part) + self.sys.stiffness.matvec(stiff_part)

    def divide(self, lo: int, hi: int, history: np.ndarray, floor: int) -> None:
        if hi - lo <= floor:
            self.step_block(lo, hi, history)
            return
        mid = (lo + hi) // 2
        self.divide(lo, mid, history[:mid - lo], floor)
        self.divide(mid, hi, history[mid - lo:] + self.cross_history(lo, mid, hi), floor)

    def field(self) -> SolutionField:
        J = self.sys.temporal.J
        coeffs = np.empty((J + 1, self.sys.spatial.N))
        coeffs[0] = self.sys.u0h
        coeffs[1:] = self.sys.u0h + np.cumsum(self.increments[:J], axis=0)
        return SolutionField(
            temporal=self.sys.temporal,
            spatial=self.sys.spatial,
            coefficients=coeffs,
            alpha=self.sys.alpha,
        )


def solve_stepping(sys: DiscreteSystem) -> SolutionField:
    """Direct time-stepping, O(J^2 N)."""
    J = sys.temporal.J
    logger.debug("stepping solve J=%d N=%d", J, sys.spatial.N)
    solver = _IncrementSolver(sys, J)
    solver.step_block(0, J, np.zeros((J, sys.spatial.N)))
    return solver.field()


def solve_fast_dnc(sys: DiscreteSystem, floor: Optional[int] = None) -> SolutionField:
    """Divide-and-conquer solve with FFT history products, O(N J (log J)^2).

    J is padded to a power of two with zero right-hand sides; the padding
    cannot influence earlier rows.
    """
    J = sys.temporal.J
    floor = floor or settings.dnc_floor
    length = 1 << max(0, math.ceil(math.log2(J)))
    logger.debug("divide-and-conquer solve J=%d (padded %d) N=%d floor=%d", J, length, sys.spatial.N, floor)
    solver = _IncrementSolver(sys, length)
    solver.divide(0, length, np.zeros((length, sys.spatial.N)), max(1, floor))
    return solver.field()


def _dump_format(path: Path, fmt: Optional[str]) -> str:
    fmt = fmt or ("bin" if path.suffix == ".bin" else "csv")
    if fmt not in ("csv", "bin"):
        raise ConfigurationError(f"unknown dump format {fmt!r}; expected csv or bin")
    return fmt


def save_field(field: SolutionField, path: Union[str, Path], fmt: Optional[str] = None) -> Path:
    """Write the header `J N alpha T` followed by the (J+1) x N coefficients."""
    path = Path(path)
    fmt = _dump_format(path, fmt)
    alpha = field.alpha if field.alpha is not None else float("nan")
    header = f"{field.J} {field.N} {alpha!r} {field.temporal.T!r}\n"
    try:
        if fmt == "bin":
            with path.open("wb") as handle:
                handle.write(header.encode("ascii"))
                handle.write(field.coefficients.astype("<f8").tobytes())
        else:
            with path.open("w", encoding="ascii") as handle:
                handle.write(header)
                np.savetxt(handle, field.coefficients, fmt="%.17g", delimiter=",")
    except OSError as exc:
        raise OutputError(str(exc), path) from exc
    return path


def load_field(path: Union[str, Path], fmt: Optional[str] = None) -> SolutionField:
    path = Path(path)
    fmt = _dump_format(path, fmt)
    try:
        if fmt == "bin":
            with path.open("rb") as handle:
                header = handle.readline().decode("ascii")
                values = np.frombuffer(handle.read(), dtype="<f8").astype(float)
        else:
            with path.open("r", encoding="ascii") as handle:
                header = handle.readline()
                values = np.loadtxt(handle, delimiter=",", ndmin=2)
        J, N, alpha, T = header.split()
        J, N, alpha_value = int(J), int(N), float(alpha)
        coefficients = values.reshape(J + 1, N)
    except OSError as exc:
        raise OutputError(str(exc), path) from exc
    except ValueError as exc:
        raise OutputError(f"malformed solution dump: {exc}", path) from exc
    return SolutionField(
        temporal=TemporalGrid(J=J, T=float(T)),
        spatial=SpatialMesh(N=N),
        coefficients=coefficients,
        alpha=None if math.isnan(alpha_value) else alpha_value,
    )
