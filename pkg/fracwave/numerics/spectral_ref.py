"""Eigenfunction-expansion reference solutions with Mittag-Leffler mode responses."""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike
from scipy import fft, integrate, sparse, special

from fracwave.config import settings
from fracwave.core.errors import (ConfigurationError, DomainError,
                                  TruncationError)
from fracwave.numerics.fracops import (FloatOrArray, MittagLefflerParams,
                                       mittag_leffler)
from fracwave.numerics.mesh_fem import (SolutionField, SpatialMesh,
                                        TemporalGrid)
from fracwave.schemas.problem import (ProblemSpec, SeparablePowerSource,
                                      SineModeSource, ZeroDatum)

logger = logging.getLogger(__name__)

# sine_coefficients switches from QUADPACK to the steepest-descent form above this n
QUADPACK_MAX_MODE = 32
LAGUERRE_POINTS = 64
DEFAULT_MODES = 4096
# Time rows of mode values held in memory at once when sampling
SAMPLE_BLOCK = 256


@dataclass(frozen=True)
class SpectralSolution:
    """Truncated expansion u = scale * sum_n v_n y_n(t) sqrt(2) sin(n pi x)."""

    alpha: float
    mu_t: float
    scale: float
    coefficients: np.ndarray
    eigenvalues: np.ndarray
    tail_estimate: float

    @property
    def n_modes(self) -> int:
        return int(self.coefficients.size)

    def mode_values(self, t: ArrayLike) -> np.ndarray:
        """scale * v_n * y_n(t) as a (len(t), n_modes) array."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros((t.size, self.n_modes))
        active = np.flatnonzero(self.coefficients)
        if active.size:
            responses = mode_response(self.alpha, self.eigenvalues[active][None, :], self.mu_t, t[:, None])
            out[:, active] = self.scale * self.coefficients[active] * responses
        return out


def sine_coefficients(mu_x: float, n_max: int) -> np.ndarray:
    """v_n = sqrt(2) int_0^1 x^mu sin(n pi x) dx for n = 1..n_max."""
    if mu_x <= -1.0:
        raise DomainError(f"power exponent must exceed -1, got {mu_x}")
    out = np.empty(n_max)
    for n in range(1, min(n_max, QUADPACK_MAX_MODE) + 1):
        omega = n * math.pi
        value, _ = integrate.quad(
            lambda x, omega=omega: math.sin(omega * x), 0.0, 1.0,
            weight="alg", wvar=(mu_x, 0.0), epsabs=1e-14, epsrel=1e-13, limit=200,
        )
        out[n - 1] = math.sqrt(2.0) * value
    if n_max > QUADPACK_MAX_MODE:
        # int_0^1 = int_0^{i inf} - int_1^{1 + i inf} of x^mu e^{i omega x}
        n = np.arange(QUADPACK_MAX_MODE + 1, n_max + 1)
        omega = n * math.pi
        nodes, weights = special.roots_laguerre(LAGUERRE_POINTS)
        origin = (
            special.gamma(mu_x + 1.0)
            * np.exp(0.5j * math.pi * (mu_x + 1.0))
            * omega ** (-mu_x - 1.0)
        )
        far = np.power(1.0 + 1j * nodes[None, :] / omega[:, None], mu_x) @ weights
        sign = np.where(n % 2 == 0, 1.0, -1.0)
        out[QUADPACK_MAX_MODE:] = math.sqrt(2.0) * np.imag(origin - 1j * sign * far / omega)
    return out


def _check_mode_args(alpha: float, lam: ArrayLike, mu_t: float) -> None:
    if not 0.0 < alpha <= 2.0:
        raise DomainError(f"alpha must lie in (0, 2], got {alpha}")
    if np.any(np.asarray(lam) < 0.0):
        raise DomainError("eigenvalues must be nonnegative")
    if mu_t <= -1.0:
        raise DomainError(f"time exponent must exceed -1, got {mu_t}")


def mode_response(alpha: float, lam: ArrayLike, mu_t: float, t: ArrayLike) -> FloatOrArray:
    """y(t) = Gamma(mu+1) t^{alpha+mu} E_{alpha,alpha+mu+1}(-lam t^alpha).

    Solves D^alpha y + lam y = t^mu with zero initial history; lam and t
    broadcast against each other.
    """
    _check_mode_args(alpha, lam, mu_t)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise DomainError("time must be nonnegative")
    z = -np.asarray(lam, dtype=float) * np.power(t, alpha)
    params = MittagLefflerParams(alpha=alpha, beta=alpha + mu_t + 1.0)
    value = special.gamma(mu_t + 1.0) * np.power(t, alpha + mu_t) * np.asarray(mittag_leffler(params, z))
    if np.ndim(value) == 0:
        return float(value)
    return value


def mode_residual(alpha: float, lam: float, mu_t: float, t: ArrayLike) -> FloatOrArray:
    """D^alpha y + lam y - t^mu, with D^alpha y = Gamma(mu+1) t^mu E_{alpha,mu+1}(-lam t^alpha)."""
    _check_mode_args(alpha, lam, mu_t)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0.0):
        raise DomainError("residual is evaluated on t > 0")
    z = -lam * np.power(t, alpha)
    derivative = (
        special.gamma(mu_t + 1.0)
        * np.power(t, mu_t)
        * np.asarray(mittag_leffler(MittagLefflerParams(alpha=alpha, beta=mu_t + 1.0), z))
    )
    residual = derivative + lam * np.asarray(mode_response(alpha, lam, mu_t, t)) - np.power(t, mu_t)
    if np.ndim(residual) == 0:
        return float(residual)
    return residual


def _tail_estimates(
    coefficients: np.ndarray,
    mu_x: float,
    response_bound: float,
    scale: float,
) -> np.ndarray:
    """Estimated H^1 norm of the tail beyond M modes, for M = 1..len(coefficients).

    |v_n| <= C_v n^{-p} with p = min(mu_x + 1, 1) and lam_n sup|y_n| <= C_y give
    ||tail||^2 <= scale^2 C_v^2 C_y^2 / pi^2 * zeta(2p + 2, M + 1).
    """
    n = np.arange(1, coefficients.size + 1, dtype=float)
    p = min(mu_x + 1.0, 1.0)
    c_v = float(np.max(np.abs(coefficients) * n ** p))
    factor = (scale * c_v * response_bound / math.pi) ** 2
    return np.sqrt(factor * special.zeta(2.0 * p + 2.0, n + 1.0))


def spectral_solution(
    p: ProblemSpec,
    tg: TemporalGrid,
    n_modes: int = DEFAULT_MODES,
    tol: float = 1e-6,
) -> SpectralSolution:
    """Choose the truncation of the expansion for a separable source and zero data."""
    if not isinstance(p.u0, ZeroDatum) or not isinstance(p.u1, ZeroDatum):
        raise ConfigurationError("the spectral reference requires u0 = u1 = 0")
    source = p.source
    t = tg.nodes()

    if isinstance(source, SineModeSource):
        coefficients = np.zeros(source.k)
        coefficients[-1] = 1.0
        return SpectralSolution(
            alpha=p.alpha,
            mu_t=source.mu_t,
            scale=source.scale,
            coefficients=coefficients,
            eigenvalues=(np.arange(1, source.k + 1) * math.pi) ** 2,
            tail_estimate=0.0,
        )
    if not isinstance(source, SeparablePowerSource):
        raise ConfigurationError("the spectral reference supports separable sources only")

    eigenvalues = (np.arange(1, n_modes + 1) * math.pi) ** 2
    if source.scale == 0.0:
        return SpectralSolution(p.alpha, source.mu_t, 0.0, np.zeros(1), eigenvalues[:1], 0.0)

    coefficients = sine_coefficients(source.mu_x, n_modes)
    leading = eigenvalues[:5, None]
    leading_sup = np.max(leading * np.abs(mode_response(p.alpha, leading, source.mu_t, t[None, :])))
    response_bound = 10.0 * float(leading_sup)

    tails = _tail_estimates(coefficients, source.mu_x, response_bound, source.scale)
    below = np.flatnonzero(tails < tol)
    if below.size == 0:
        raise TruncationError(
            f"tail estimate {tails[-1]:.3e} exceeds tol {tol:.1e} with {n_modes} modes",
            estimate=float(tails[-1]),
            n_modes=n_modes,
        )
    used = int(below[0]) + 1
    logger.info("spectral reference: %d modes, tail estimate %.3e", used, tails[used - 1])
    return SpectralSolution(
        alpha=p.alpha,
        mu_t=source.mu_t,
        scale=source.scale,
        coefficients=coefficients[:used],
        eigenvalues=eigenvalues[:used],
        tail_estimate=float(tails[used - 1]),
    )


def sample_nodal(solution: SpectralSolution, tg: TemporalGrid, sm: SpatialMesh) -> SolutionField:
    """Nodal values of the truncated expansion on the grids.

    Modes above the mesh resolution are folded onto their aliases on the
    nodes, then a type-I sine transform sums the series.
    """
    period = sm.N + 1
    modes = np.arange(1, solution.n_modes + 1)
    folded_index = modes % (2 * period)
    sign = np.where(folded_index > period, -1.0, 1.0)
    folded_index = np.where(folded_index > period, 2 * period - folded_index, folded_index)
    keep = np.flatnonzero((folded_index > 0) & (folded_index < period) & (solution.coefficients != 0.0))
    fold = sparse.csr_matrix(
        (sign[keep], (keep, folded_index[keep] - 1)), shape=(solution.n_modes, sm.N)
    )

    t = tg.nodes()
    folded = np.empty((t.size, sm.N))
    for start in range(0, t.size, SAMPLE_BLOCK):
        values = solution.mode_values(t[start:start + SAMPLE_BLOCK])
        folded[start:start + SAMPLE_BLOCK] = np.asarray((fold.T @ values.T).T)
    nodal = 0.5 * math.sqrt(2.0) * fft.dst(folded, type=1, axis=1, workers=settings.fft_workers)
    return SolutionField(temporal=tg, spatial=sm, coefficients=nodal, alpha=solution.alpha)


def reference_solution(
    p: ProblemSpec,
    tg: TemporalGrid,
    sm: SpatialMesh,
    n_modes: Optional[int] = None,
    tol: float = 1e-6,
) -> SolutionField:
    """Nodal samples of the spectral reference with the tail estimate below tol."""
    solution = spectral_solution(p, tg, n_modes or DEFAULT_MODES, tol)
    return sample_nodal(solution, tg, sm)
