"""Scalar special functions and the discrete Riemann-Liouville kernels.

Everything here is pure: inputs are validated, outputs are new (read-only)
arrays or floats, and nothing is cached between calls.
"""
import logging
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, Field
from scipy import integrate, special

from fracwave.core.errors import DomainError, MittagLefflerOverflowError

logger = logging.getLogger(__name__)

FloatOrArray = Union[float, np.ndarray]

# Mittag-Leffler method bands on the negative axis (x = -z):
#   x <= SERIES_RADIUS                 Taylor series
#   SERIES_RADIUS < x < ASYMPTOTIC_ROOT**alpha   Hankel integral + residues
#   x >= ASYMPTOTIC_ROOT**alpha        asymptotic series + residues
SERIES_RADIUS = 2.0
ASYMPTOTIC_ROOT = 40.0
OVERFLOW_EXPONENT = 700.0
HANKEL_CHUNK = 64
ASYMPTOTIC_TERMS = 400
LOG_PI = math.log(math.pi)
LOG_EPS = math.log(1e-17)

# Second differences of n**p switch to the binomial series at this n.
BINOMIAL_SWITCH = 16
BINOMIAL_TERMS = 12


def _finish(values: np.ndarray, like: ArrayLike) -> FloatOrArray:
    """Return a float for scalar input, a read-only array otherwise."""
    if np.ndim(like) == 0:
        return float(np.reshape(values, ()))
    out = np.reshape(values, np.shape(like))
    out.setflags(write=False)
    return out


def gamma(x: ArrayLike) -> FloatOrArray:
    """Gamma function on the positive axis."""
    arr = np.asarray(x, dtype=float)
    if not np.all(arr > 0):
        raise DomainError(f"gamma requires x > 0, got {x!r}")
    return _finish(special.gamma(arr), x)


class MittagLefflerParams(BaseModel):
    """Parameters of the two-parameter Mittag-Leffler function E_{alpha,beta}."""

    alpha: float = Field(gt=0, le=2)
    beta: float = Field(gt=0)

    class Config:
        frozen = True


def _ml_series(alpha: float, beta: float, z: np.ndarray) -> np.ndarray:
    """Taylor series sum_k z^k / Gamma(alpha k + beta), Neumaier-compensated."""
    if z.size == 0:
        return np.zeros_like(z)
    zmax = float(np.max(np.abs(z)))
    n_terms = 1
    if zmax > 0:
        # Enough terms to pass the peak and fall 40 e-folds below it.
        log_zmax = math.log(zmax)
        peak, k = -np.inf, 0
        while k < 20000:
            log_term = k * log_zmax - special.gammaln(beta + alpha * k)
            peak = max(peak, log_term)
            if k > 0 and log_term < peak - 40.0:
                break
            k += 1
        n_terms = k + 1

    log_abs = np.log(np.abs(np.where(z == 0, 1.0, z)))
    negative = z < 0
    total = np.zeros_like(z)
    carry = np.zeros_like(z)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(n_terms):
            if k == 0:
                term = np.full_like(z, special.rgamma(beta))
            else:
                magnitude = np.exp(k * log_abs - special.gammaln(beta + alpha * k))
                term = np.where(z == 0, 0.0, magnitude)
                if k % 2 == 1:
                    term = np.where(negative, -term, term)
            updated = total + term
            carry += np.where(
                np.abs(total) >= np.abs(term),
                (total - updated) + term,
                (term - updated) + total,
            )
            total = updated
    return total + carry


def _ml_residues(alpha: float, beta: float, x: np.ndarray) -> np.ndarray:
    """Contribution of the poles s = x^{1/alpha} e^{+-i pi/alpha} (alpha > 1)."""
    if alpha <= 1.0:
        return np.zeros_like(x)
    pole = np.power(x, 1.0 / alpha) * np.exp(1j * math.pi / alpha)
    return (2.0 / alpha) * np.real(np.power(pole, 1.0 - beta) * np.exp(pole))


def _ml_hankel(alpha: float, beta: float, x: np.ndarray) -> np.ndarray:
    """E_{alpha,beta}(-x) from the Hankel integral folded onto the negative axis.

    Valid for beta < alpha + 1. The integrand is

        e^{-r} r^{alpha-beta} (r^alpha sin(pi beta) + x sin(pi(beta-alpha)))
        / (r^{2 alpha} + 2 x r^alpha cos(pi alpha) + x^2) / pi

    and r = s^m removes the r^{alpha-beta} endpoint singularity.
    """
    exponent = alpha - beta
    m = 1.0 / (exponent + 1.0) if exponent < 0 else 1.0
    sin_b = math.sin(math.pi * beta)
    sin_ba = math.sin(math.pi * (beta - alpha))
    cos_a = math.cos(math.pi * alpha)

    out = np.empty_like(x)
    order = np.argsort(x)
    for start in range(0, x.size, HANKEL_CHUNK):
        idx = order[start:start + HANKEL_CHUNK]
        xs = x[idx]
        r_peak = float(np.max(xs)) ** (1.0 / alpha)
        r_max = 60.0 + 2.0 * r_peak
        s_max = r_max ** (1.0 / m)
        s_peaks = sorted({min(xs) ** (1.0 / (alpha * m)), r_peak ** (1.0 / m)})

        def integrand(s: float, xs: np.ndarray = xs) -> np.ndarray:
            r = s ** m
            ra = r ** alpha
            jac = m * s ** (m * (exponent + 1.0) - 1.0) if m != 1.0 else r ** exponent
            num = ra * sin_b + xs * sin_ba
            den = ra * ra + 2.0 * xs * ra * cos_a + xs * xs
            return math.exp(-r) * jac * num / den

        value, _ = integrate.quad_vec(
            integrand, 0.0, s_max, epsabs=0.0, epsrel=1e-13,
            points=[p for p in s_peaks if 0.0 < p < s_max], limit=2000,
        )
        out[idx] = value / math.pi
    return out + _ml_residues(alpha, beta, x)


def _ml_integral_band(alpha: float, beta: float, x: np.ndarray) -> np.ndarray:
    """E_{alpha,beta}(-x) for moderate x via beta-reduction and the Hankel integral."""
    betas = [beta]
    while betas[-1] >= alpha + 1.0:
        betas.append(betas[-1] - alpha)
    if betas[-1] > alpha + 0.5:
        # r^{alpha-beta} close to non-integrable: one more step down.
        betas.append(betas[-1] - alpha)

    value = _ml_hankel(alpha, betas[-1], x)
    # E_{a,b+a}(z) = (E_{a,b}(z) - 1/Gamma(b)) / z with z = -x
    for lower in reversed(betas[1:]):
        value = (value - special.rgamma(lower)) / (-x)
    return value


def _ml_asymptotic(alpha: float, beta: float, x: np.ndarray) -> np.ndarray:
    """E_{alpha,beta}(-x) ~ residues - sum_k (-x)^{-k} / Gamma(beta - alpha k).

    1/Gamma(beta - alpha k) = sin(pi(beta - alpha k)) Gamma(alpha k - beta + 1) / pi,
    so |term_k| <= Gamma(alpha k - beta + 1) / (pi x^k). The sum stops where
    that envelope is smallest; the terms themselves can be near zero close to
    a pole of Gamma and say nothing about convergence.
    """
    total = np.zeros_like(x)
    active = np.ones(x.shape, dtype=bool)
    log_x = np.log(x)
    last = np.full(x.shape, np.inf)
    for k in range(1, ASYMPTOTIC_TERMS):
        term = -special.rgamma(beta - alpha * k) * np.power(-1.0 / x, k)
        shifted = alpha * k - beta + 1.0
        if shifted >= 2.0:
            # Gamma is increasing past 2, so the envelope is log-convex in k
            envelope = special.gammaln(shifted) - k * log_x - LOG_PI
            active &= envelope <= last
            last = np.where(active, envelope, last)
        total = np.where(active, total + term, total)
        if shifted >= 2.0:
            with np.errstate(divide="ignore"):
                active &= last > np.log(np.abs(total)) + LOG_EPS
        if not active.any():
            break
    return total + _ml_residues(alpha, beta, x)


def mittag_leffler(p: MittagLefflerParams, z: ArrayLike) -> FloatOrArray:
    """Evaluate E_{alpha,beta}(z) for real z (scalar or array).

    The negative half-line is the hot path; positive arguments are summed
    from the Taylor series as long as the result is representable.
    """
    alpha, beta = p.alpha, p.beta
    flat = np.atleast_1d(np.asarray(z, dtype=float)).ravel()
    if np.any(~np.isfinite(flat)):
        raise DomainError("mittag_leffler requires finite arguments")

    positive = flat[flat > 0]
    if positive.size and float(np.max(positive)) ** (1.0 / alpha) > OVERFLOW_EXPONENT:
        raise MittagLefflerOverflowError(
            f"E_{{{alpha},{beta}}}(z) overflows for z = {float(np.max(positive))}"
        )

    if alpha == 1.0:
        with np.errstate(over="ignore"):
            out = special.hyp1f1(1.0, beta, flat) * special.rgamma(beta)
    else:
        out = np.empty_like(flat)
        x = -flat
        series = x <= SERIES_RADIUS
        asymptotic = x >= ASYMPTOTIC_ROOT ** alpha
        band = ~series & ~asymptotic
        out[series] = _ml_series(alpha, beta, flat[series])
        if band.any():
            out[band] = _ml_integral_band(alpha, beta, x[band])
        if asymptotic.any():
            out[asymptotic] = _ml_asymptotic(alpha, beta, x[asymptotic])

    if not np.all(np.isfinite(out)):
        raise MittagLefflerOverflowError(f"E_{{{alpha},{beta}}}(z) is not finite")
    return _finish(out, z)


def frac_integral_monomial(
    gamma: float,
    mu: float,
    t: ArrayLike,
    side: str = "left",
    b: float = 1.0,
) -> FloatOrArray:
    """Riemann-Liouville integral of order gamma of a monomial, in closed form.

    Left: D_{0+}^{-gamma} t^mu. Right: D_{b-}^{-gamma} (b - t)^mu, evaluated
    at t. Both equal Gamma(mu+1)/Gamma(mu+1+gamma) times the shifted power.
    """
    if mu <= -1.0:
        raise DomainError(f"monomial exponent must exceed -1, got {mu}")
    if gamma < 0.0:
        raise DomainError(f"integration order must be >= 0, got {gamma}")
    if side not in ("left", "right"):
        raise DomainError(f"side must be 'left' or 'right', got {side!r}")
    arr = np.asarray(t, dtype=float)
    base = arr if side == "left" else b - arr
    if np.any(base < 0):
        raise DomainError("evaluation point lies outside the integration interval")
    coeff = 1.0 if gamma == 0.0 else math.exp(
        special.gammaln(mu + 1.0) - special.gammaln(mu + 1.0 + gamma)
    )
    with np.errstate(divide="ignore"):
        return _finish(coeff * np.power(base, mu + gamma), t)


def frac_integral_polynomial(
    coeffs: Sequence[float],
    gamma: float,
    t: ArrayLike,
    side: str = "left",
    b: float = 1.0,
) -> FloatOrArray:
    """Fractional integral of sum_k c_k t^k (left) or sum_k c_k (b-t)^k (right)."""
    total = np.zeros(np.shape(t))
    for k, c in enumerate(coeffs):
        if c != 0.0:
            total = total + c * np.asarray(frac_integral_monomial(gamma, float(k), t, side, b))
    return _finish(total, t)


def power_increments(p: float, count: int) -> np.ndarray:
    """First differences i^p - (i-1)^p for i = 1..count, without cancellation."""
    i = np.arange(1, count + 1, dtype=float)
    out = np.ones(count)
    tail = i >= 2
    out[tail] = np.power(i[tail], p) * -np.expm1(p * np.log1p(-1.0 / i[tail]))
    return out


def second_differences(p: float, n: ArrayLike) -> np.ndarray:
    """(n+1)^p - 2 n^p + (n-1)_+^p for integers n >= 0.

    Large n use n^p * 2 sum_k binom(p, 2k) n^{-2k}; the three-point formula
    loses about log10(n) digits there.
    """
    n = np.asarray(n, dtype=float)
    out = np.empty_like(n)
    small = n < BINOMIAL_SWITCH
    ns = n[small]
    out[small] = (
        np.power(ns + 1.0, p) - 2.0 * np.power(ns, p) + np.power(np.maximum(ns - 1.0, 0.0), p)
    )
    nl = n[~small]
    if nl.size:
        inv2 = 1.0 / (nl * nl)
        series = np.zeros_like(nl)
        power = np.ones_like(nl)
        for k in range(1, BINOMIAL_TERMS + 1):
            power = power * inv2
            series += special.binom(p, 2 * k) * power
        out[~small] = 2.0 * np.power(nl, p) * series
    return out


@dataclass(frozen=True)
class KernelWeights:
    """Cell integrals kappa_m of D_{0+}^{nu} chi_{I_j} over I_{j+m} (uniform grid)."""

    nu: float
    tau: float
    kappa: np.ndarray

    def __len__(self) -> int:
        return int(self.kappa.size)

    @property
    def head(self) -> float:
        return float(self.kappa[0])

    def partial_sums(self) -> np.ndarray:
        return np.cumsum(self.kappa)


def rl_cell_average_weights(nu: float, tau: float, J: int) -> KernelWeights:
    """kappa_m = tau^{1-nu}/Gamma(2-nu) [(m+1)^{1-nu} - 2 m^{1-nu} + (m-1)_+^{1-nu}]."""
    if not 0.0 < nu < 1.0:
        raise DomainError(f"kernel order nu must lie in (0, 1), got {nu}")
    if tau <= 0.0:
        raise DomainError(f"time step must be positive, got {tau}")
    if J < 1:
        raise DomainError(f"kernel length must be >= 1, got {J}")
    scale = tau ** (1.0 - nu) * special.rgamma(2.0 - nu)
    kappa = scale * second_differences(1.0 - nu, np.arange(J))
    kappa.setflags(write=False)
    return KernelWeights(nu=nu, tau=tau, kappa=kappa)
