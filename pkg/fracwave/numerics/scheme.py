"""Petrov-Galerkin system: per-step operator, convolution structure and right-hand side."""
import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import sparse, special

from fracwave.core.errors import ConfigurationError, DomainError
from fracwave.numerics.fracops import (KernelWeights, power_increments,
                                       rl_cell_average_weights)
from fracwave.numerics.mesh_fem import (SolutionField, SpatialMesh,
                                        TemporalGrid, TridiagonalOperator,
                                        assemble_mass, assemble_stiffness,
                                        load_vector, power_moment_load,
                                        project_initial, sine_load)
from fracwave.schemas.problem import (GeneralSource, ProblemSpec,
                                      SeparablePowerSource, SineModeSource)

logger = logging.getLogger(__name__)

# Values of f held in memory at once when integrating a general source
QUADRATURE_BLOCK = 1 << 22


@dataclass(frozen=True)
class DiscreteSystem:
    """Everything the time-stepping needs; rhs row i-1 holds F_i."""

    problem: ProblemSpec
    temporal: TemporalGrid
    spatial: SpatialMesh
    kappa: KernelWeights
    mass: TridiagonalOperator
    stiffness: TridiagonalOperator
    rhs: np.ndarray
    u0h: np.ndarray

    def __post_init__(self) -> None:
        for name in ("rhs", "u0h"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def alpha(self) -> float:
        return self.problem.alpha

    @property
    def tau(self) -> float:
        return self.temporal.tau


def example_problem(example: int, alpha: float) -> ProblemSpec:
    """Benchmark problems on (0,1) x (0,1) with zero initial data.

    1: f = t^{-0.49} x^{-0.49}
    2: f = t^{1.51-alpha} x^{-0.49}
    """
    if example == 1:
        source = SeparablePowerSource(mu_t=-0.49, mu_x=-0.49)
    elif example == 2:
        source = SeparablePowerSource(mu_t=1.51 - alpha, mu_x=-0.49)
    else:
        raise ConfigurationError(f"unknown example {example}; expected 1 or 2")
    return ProblemSpec(alpha=alpha, T=1.0, source=source)


def time_moments(mu: float, tg: TemporalGrid) -> np.ndarray:
    """int_{I_i} t^mu dt for i = 1..J."""
    if mu <= -1.0:
        raise DomainError(f"time exponent must exceed -1, got {mu}")
    p = mu + 1.0
    return tg.tau ** p / p * power_increments(p, tg.J)


def _gauss_rule(breaks: np.ndarray, degree: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre points and weights on consecutive intervals [breaks[k], breaks[k+1]]."""
    x, w = np.polynomial.legendre.leggauss(degree)
    left, right = breaks[:-1, None], breaks[1:, None]
    half = 0.5 * (right - left)
    return (left + half * (x + 1.0)).ravel(), (half * w).ravel()


def _graded_breaks(a: float, b: float, levels: int) -> np.ndarray:
    return a + (b - a) * np.concatenate([[0.0], 2.0 ** -np.arange(levels, -1, -1, dtype=float)])


def _general_source_rhs(source: GeneralSource, tg: TemporalGrid, sm: SpatialMesh) -> np.ndarray:
    """Tensor Gauss-Legendre of <f, chi_{I_i} phi_n>, graded towards t = 0 and x = 0."""
    q, levels = source.quad_degree, source.graded_levels
    tau, h = tg.tau, sm.h

    # Time: cell 1 graded, the rest regular
    t_first, wt_first = _gauss_rule(_graded_breaks(0.0, tau, levels), q)
    t_rest, wt_rest = _gauss_rule(tg.nodes()[1:], q)
    t_pts = np.concatenate([t_first, t_rest])
    t_wts = np.concatenate([wt_first, wt_rest])
    t_cell = np.concatenate([np.zeros(t_first.size, dtype=int), np.repeat(np.arange(1, tg.J), q)])
    aggregate = sparse.csr_matrix((t_wts, (t_cell, np.arange(t_pts.size))), shape=(tg.J, t_pts.size))

    # Space: element [0, h] graded, the rest regular; each point feeds two hats
    x_first, wx_first = _gauss_rule(_graded_breaks(0.0, h, levels), q)
    x_rest, wx_rest = _gauss_rule(np.arange(1, sm.N + 2) * h, q)
    x_pts = np.concatenate([x_first, x_rest])
    x_wts = np.concatenate([wx_first, wx_rest])
    element = np.minimum((x_pts // h).astype(int), sm.N)
    right_weight = x_pts / h - element
    rows = np.concatenate([np.arange(x_pts.size)] * 2)
    cols = np.concatenate([element - 1, element])
    vals = np.concatenate([x_wts * (1.0 - right_weight), x_wts * right_weight])
    keep = (cols >= 0) & (cols < sm.N)
    hats = sparse.csr_matrix((vals[keep], (rows[keep], cols[keep])), shape=(x_pts.size, sm.N))

    projected = np.empty((t_pts.size, sm.N))
    step = max(1, QUADRATURE_BLOCK // x_pts.size)
    for start in range(0, t_pts.size, step):
        t_block = t_pts[start:start + step]
        values = np.asarray(source.func(x_pts[None, :], t_block[:, None]), dtype=float)
        values = np.broadcast_to(values, (t_block.size, x_pts.size))
        projected[start:start + step] = np.asarray((hats.T @ values.T).T)
    return np.asarray(aggregate @ projected)


def assemble_rhs(p: ProblemSpec, tg: TemporalGrid, sm: SpatialMesh) -> np.ndarray:
    """F_{i,n} = <f, chi_{I_i} phi_n> + <u1, phi_n> (t_i^{2-a} - t_{i-1}^{2-a}) / Gamma(3-a)."""
    source = p.source
    if isinstance(source, SeparablePowerSource):
        rhs = source.scale * np.outer(time_moments(source.mu_t, tg), power_moment_load(source.mu_x, sm))
    elif isinstance(source, SineModeSource):
        spatial = math.sqrt(2.0) * sine_load(source.k, sm)
        rhs = source.scale * np.outer(time_moments(source.mu_t, tg), spatial)
    elif isinstance(source, GeneralSource):
        rhs = _general_source_rhs(source, tg, sm)
    else:
        raise ConfigurationError(f"unsupported source: {type(source).__name__}")

    u1_load = load_vector(p.u1, sm, assemble_mass(sm))
    if np.any(u1_load != 0.0):
        p_exp = 2.0 - p.alpha
        weights = tg.tau ** p_exp * special.rgamma(3.0 - p.alpha) * power_increments(p_exp, tg.J)
        rhs = rhs + np.outer(weights, u1_load)

    if not np.all(np.isfinite(rhs)):
        raise DomainError("source is not integrable against the test functions")
    return rhs


def assemble_system(p: ProblemSpec, tg: TemporalGrid, sm: SpatialMesh) -> DiscreteSystem:
    """Assemble mass, stiffness, kernel weights (nu = alpha - 1), F and u0h."""
    if not math.isclose(tg.T, p.T):
        raise ConfigurationError(f"temporal grid horizon {tg.T} differs from problem horizon {p.T}")
    mass = assemble_mass(sm)
    stiffness = assemble_stiffness(sm)
    kappa = rl_cell_average_weights(p.alpha - 1.0, tg.tau, tg.J)
    rhs = assemble_rhs(p, tg, sm)
    u0h = project_initial(p.u0, sm, stiffness, mass)
    logger.debug("assembled system alpha=%s J=%d N=%d", p.alpha, tg.J, sm.N)
    return DiscreteSystem(
        problem=p,
        temporal=tg,
        spatial=sm,
        kappa=kappa,
        mass=mass,
        stiffness=stiffness,
        rhs=rhs,
        u0h=u0h,
    )


def step_operator(sys: DiscreteSystem) -> TridiagonalOperator:
    """B = (kappa_0 / tau) M + (tau / 2) A, the same for every step."""
    return sys.mass.combine(sys.kappa.head / sys.tau, sys.stiffness, 0.5 * sys.tau)


def block_residuals(sys: DiscreteSystem, field: SolutionField) -> np.ndarray:
    """Residual of every block row by direct summation (J x N).

    R_i = sum_{m<i} kappa_m M (U_{i-m} - U_{i-m-1}) / tau + (tau/2) A (U_{i-1} + U_i) - F_i
    """
    u = field.coefficients
    increments = sys.mass.matvec(np.diff(u, axis=0)) / sys.tau
    kappa = sys.kappa.kappa
    history = np.empty_like(increments)
    for i in range(increments.shape[0]):
        history[i] = kappa[i::-1] @ increments[:i + 1]
    stiff = 0.5 * sys.tau * sys.stiffness.matvec(u[:-1] + u[1:])
    return history + stiff - sys.rhs
