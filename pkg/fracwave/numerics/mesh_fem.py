"""Uniform grids, P1 assembly on (0, 1), initial-data projections and prolongation."""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, Field
from scipy import sparse

from fracwave.core.errors import ConfigurationError, DomainError
from fracwave.numerics.fracops import second_differences
from fracwave.schemas.problem import (NodalDatum, PowerDatum, SineDatum,
                                      ZeroDatum)

logger = logging.getLogger(__name__)


class TemporalGrid(BaseModel):
    """Uniform partition 0 = t_0 < ... < t_J = T."""
    J: int = Field(ge=1)
    T: float = Field(default=1.0, gt=0)

    class Config:
        frozen = True

    @property
    def tau(self) -> float:
        return self.T / self.J

    def nodes(self) -> np.ndarray:
        return np.arange(self.J + 1) * self.tau


class SpatialMesh(BaseModel):
    """Uniform mesh of (0, 1) with N interior nodes x_n = n h."""
    N: int = Field(ge=1)

    class Config:
        frozen = True

    @property
    def h(self) -> float:
        return 1.0 / (self.N + 1)

    def nodes(self) -> np.ndarray:
        return np.arange(1, self.N + 1) * self.h


def _frozen(values: ArrayLike) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class TridiagonalOperator:
    """Tridiagonal matrix stored by its three diagonals.

    Products act on the last axis, so a (J+1) x N field is multiplied
    row by row.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray

    def __post_init__(self) -> None:
        for name in ("sub", "diag", "sup"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        n = self.diag.size
        if self.sub.size != n - 1 or self.sup.size != n - 1:
            raise ConfigurationError(
                f"off-diagonals must have length {n - 1}, got {self.sub.size} and {self.sup.size}"
            )

    @property
    def size(self) -> int:
        return int(self.diag.size)

    def matvec(self, x: ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        y[..., :-1] += self.sup * x[..., 1:]
        y[..., 1:] += self.sub * x[..., :-1]
        return y

    def quadratic(self, x: ArrayLike) -> np.ndarray:
        """x^T B x along the last axis."""
        x = np.asarray(x, dtype=float)
        return np.sum(x * self.matvec(x), axis=-1)

    def combine(self, a: float, other: "TridiagonalOperator", b: float) -> "TridiagonalOperator":
        """Return a * self + b * other."""
        if other.size != self.size:
            raise ConfigurationError("operators of different size cannot be combined")
        return TridiagonalOperator(
            sub=a * self.sub + b * other.sub,
            diag=a * self.diag + b * other.diag,
            sup=a * self.sup + b * other.sup,
        )

    def is_symmetric(self) -> bool:
        return bool(np.array_equal(self.sub, self.sup))

    def to_sparse(self) -> sparse.csr_matrix:
        return sparse.diags([self.sub, self.diag, self.sup], [-1, 0, 1], format="csr")

    def to_dense(self) -> np.ndarray:
        return self.to_sparse().toarray()


def assemble_stiffness(mesh: SpatialMesh) -> TridiagonalOperator:
    """P1 stiffness matrix, rows (1/h)(-1, 2, -1)."""
    n, h = mesh.N, mesh.h
    off = np.full(n - 1, -1.0 / h)
    return TridiagonalOperator(sub=off, diag=np.full(n, 2.0 / h), sup=off.copy())


def assemble_mass(mesh: SpatialMesh) -> TridiagonalOperator:
    """P1 mass matrix, rows (h/6)(1, 4, 1)."""
    n, h = mesh.N, mesh.h
    off = np.full(n - 1, h / 6.0)
    return TridiagonalOperator(sub=off, diag=np.full(n, 4.0 * h / 6.0), sup=off.copy())


def power_moment_load(mu: float, mesh: SpatialMesh) -> np.ndarray:
    """b_n = int_0^1 x^mu phi_n dx in closed form.

    With G'' = x^mu, b_n is the second difference of G at x_n divided by h,
    i.e. h^{mu+1} / ((mu+1)(mu+2)) * second difference of n^{mu+2}.
    """
    if mu <= -1.0:
        raise DomainError(f"load exponent must exceed -1, got {mu}")
    h = mesh.h
    coeff = h ** (mu + 1.0) / ((mu + 1.0) * (mu + 2.0))
    return coeff * second_differences(mu + 2.0, np.arange(1, mesh.N + 1))


def sine_load(k: int, mesh: SpatialMesh) -> np.ndarray:
    """int_0^1 sin(k pi x) phi_n dx = 4 sin^2(k pi h / 2) / ((k pi)^2 h) * sin(k pi x_n)."""
    omega = k * math.pi
    h = mesh.h
    factor = 4.0 * math.sin(0.5 * omega * h) ** 2 / (omega * omega * h)
    return factor * np.sin(omega * mesh.nodes())


def load_vector(datum: object, mesh: SpatialMesh, mass: TridiagonalOperator) -> np.ndarray:
    """L2 load <datum, phi_n> of an initial-datum descriptor."""
    if isinstance(datum, ZeroDatum):
        return np.zeros(mesh.N)
    if isinstance(datum, NodalDatum):
        return mass.matvec(_nodal_values(datum, mesh))
    if isinstance(datum, SineDatum):
        return datum.scale * sine_load(datum.k, mesh)
    if isinstance(datum, PowerDatum):
        return datum.scale * power_moment_load(datum.mu, mesh)
    raise ConfigurationError(f"unsupported initial datum: {type(datum).__name__}")


def _nodal_values(datum: NodalDatum, mesh: SpatialMesh) -> np.ndarray:
    values = np.asarray(datum.values, dtype=float)
    if values.size != mesh.N:
        raise ConfigurationError(
            f"nodal datum has {values.size} values, mesh has {mesh.N} interior nodes"
        )
    return values


def default_projection(datum: object) -> str:
    """Projection used for a descriptor when none is requested.

    Sine data lie in H^1_0 and get the Ritz projection; power data do not
    vanish at x = 1 and get the L2 projection.
    """
    if isinstance(datum, PowerDatum):
        return "l2"
    return "ritz"


def project_initial(
    data: object,
    mesh: SpatialMesh,
    stiffness: TridiagonalOperator,
    mass: TridiagonalOperator,
    projection: Optional[str] = None,
) -> np.ndarray:
    """Project an initial datum onto S_h (Ritz or L2)."""
    from fracwave.numerics.solver import thomas_solve

    kind = projection or default_projection(data)
    if kind not in ("ritz", "l2"):
        raise ConfigurationError(f"unknown projection {kind!r}")

    if isinstance(data, ZeroDatum):
        return np.zeros(mesh.N)
    if isinstance(data, NodalDatum):
        return _nodal_values(data, mesh).copy()

    if kind == "l2":
        return thomas_solve(mass, load_vector(data, mesh, mass))

    if isinstance(data, SineDatum):
        # <(sin k pi x)', phi_n'> = (k pi)^2 <sin k pi x, phi_n>
        omega = data.k * math.pi
        rhs = data.scale * omega * omega * sine_load(data.k, mesh)
        return thomas_solve(stiffness, rhs)
    if isinstance(data, PowerDatum):
        raise ConfigurationError("power data are not in H^1_0; use the L2 projection")
    raise ConfigurationError(f"unsupported initial datum: {type(data).__name__}")


@dataclass(frozen=True)
class SolutionField:
    """Nodal coefficients of U in W_tau x S_h; row j holds U(., t_j)."""

    temporal: TemporalGrid
    spatial: SpatialMesh
    coefficients: np.ndarray
    alpha: Optional[float] = None

    def __post_init__(self) -> None:
        coeffs = _frozen(self.coefficients)
        expected = (self.temporal.J + 1, self.spatial.N)
        if coeffs.shape != expected:
            raise ConfigurationError(f"coefficients have shape {coeffs.shape}, expected {expected}")
        if not np.all(np.isfinite(coeffs)):
            raise ConfigurationError("solution coefficients must be finite")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def J(self) -> int:
        return self.temporal.J

    @property
    def N(self) -> int:
        return self.spatial.N


def _interpolation(coarse_cells: int, ratio: int, interior: bool) -> sparse.csr_matrix:
    """Linear interpolation from coarse to fine nodes of a dyadically nested grid.

    With interior=True the boundary nodes are dropped on both sides (Dirichlet).
    """
    fine_nodes = np.arange(coarse_cells * ratio + 1)
    cell, offset = np.divmod(fine_nodes, ratio)
    weight = offset / ratio
    rows = np.concatenate([fine_nodes, fine_nodes])
    cols = np.concatenate([cell, cell + 1])
    vals = np.concatenate([1.0 - weight, weight])
    keep = vals != 0.0
    rows, cols, vals = rows[keep], cols[keep], vals[keep]
    shape = (coarse_cells * ratio + 1, coarse_cells + 1)
    matrix = sparse.csr_matrix((vals, (rows, cols)), shape=shape)
    if interior:
        matrix = matrix[1:-1, 1:-1]
    return matrix


def _ratio(coarse: int, fine: int, what: str) -> int:
    if fine < coarse or fine % coarse != 0:
        raise ConfigurationError(f"{what} grids are not nested: {coarse} does not divide {fine}")
    return fine // coarse


def time_prolongation(coarse: TemporalGrid, fine: TemporalGrid) -> sparse.csr_matrix:
    """(J_f+1) x (J_c+1) matrix evaluating a piecewise-linear function at fine nodes."""
    if not math.isclose(coarse.T, fine.T):
        raise ConfigurationError(f"time horizons differ: {coarse.T} vs {fine.T}")
    return _interpolation(coarse.J, _ratio(coarse.J, fine.J, "temporal"), interior=False)


def space_prolongation(coarse: SpatialMesh, fine: SpatialMesh) -> sparse.csr_matrix:
    """N_f x N_c matrix evaluating a P1 function at fine interior nodes."""
    ratio = _ratio(coarse.N + 1, fine.N + 1, "spatial")
    return _interpolation(coarse.N + 1, ratio, interior=True)


def prolong(coarse: SolutionField, temporal: TemporalGrid, spatial: SpatialMesh) -> SolutionField:
    """Evaluate a coarse solution exactly at the nodes of nested finer grids."""
    p_t = time_prolongation(coarse.temporal, temporal)
    p_x = space_prolongation(coarse.spatial, spatial)
    values = p_x @ np.asarray(p_t @ coarse.coefficients).T
    return SolutionField(
        temporal=temporal,
        spatial=spatial,
        coefficients=np.asarray(values).T,
        alpha=coarse.alpha,
    )
