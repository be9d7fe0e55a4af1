import math

import mpmath
import numpy as np
import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

from fracwave.core.errors import DomainError, MittagLefflerOverflowError
from fracwave.numerics.fracops import (ASYMPTOTIC_ROOT, MittagLefflerParams,
                                       frac_integral_monomial,
                                       frac_integral_polynomial, gamma,
                                       mittag_leffler, power_increments,
                                       rl_cell_average_weights,
                                       second_differences)


def ml_series_oracle(alpha, beta, z):
    """Taylor series in exact binary arguments, with enough digits to absorb the cancellation."""
    x = abs(float(z))
    dps = 50 + int(x ** (1.0 / alpha) / math.log(10.0)) if x > 0 else 50
    with mpmath.workdps(dps):
        a, b, z = mpmath.mpf(alpha), mpmath.mpf(beta), mpmath.mpf(z)
        total = mpmath.mpf(0)
        for k in range(20000):
            term = z ** k * mpmath.rgamma(a * k + b)
            total += term
            if k > 10 and abs(term) < mpmath.mpf(10) ** -40 * max(1, abs(total)):
                break
        return float(total)


def test_gamma_matches_factorials():
    assert gamma(5.0) == pytest.approx(24.0, rel=1e-15)
    assert_allclose(gamma([0.5, 1.0]), [math.sqrt(math.pi), 1.0], rtol=1e-15)


def test_gamma_rejects_nonpositive():
    with pytest.raises(DomainError):
        gamma(0.0)


@pytest.mark.parametrize("alpha,beta", [(0.0, 1.0), (2.5, 1.0), (1.5, 0.0)])
def test_ml_params_validated(alpha, beta):
    with pytest.raises(ValidationError):
        MittagLefflerParams(alpha=alpha, beta=beta)


def test_ml_reduces_to_exponential_and_cosine():
    x = np.linspace(-5.0, 5.0, 21)
    assert_allclose(mittag_leffler(MittagLefflerParams(alpha=1.0, beta=1.0), x), np.exp(x), rtol=1e-13)
    y = np.linspace(0.0, 15.0, 31)
    assert_allclose(
        mittag_leffler(MittagLefflerParams(alpha=2.0, beta=1.0), -y * y), np.cos(y), rtol=0, atol=1e-12
    )


def test_ml_at_zero_is_reciprocal_gamma():
    p = MittagLefflerParams(alpha=1.5, beta=2.5)
    assert mittag_leffler(p, 0.0) == pytest.approx(1.0 / math.gamma(2.5), rel=1e-15)


@pytest.mark.parametrize(
    "alpha,beta,zs",
    [
        (1.5, 1.5, [-0.5, -1.9, -2.1, -5.0, -30.0, -200.0]),
        (1.25, 1.0, [-1.0, -3.0, -20.0, -90.0]),
        (1.75, 2.76, [-2.5, -40.0, -300.0]),
        (1.5, 1.0, [0.7, 10.0]),
    ],
)
def test_ml_matches_high_precision_series(alpha, beta, zs):
    p = MittagLefflerParams(alpha=alpha, beta=beta)
    expected = [ml_series_oracle(alpha, beta, z) for z in zs]
    assert_allclose(mittag_leffler(p, np.array(zs)), expected, rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("alpha,beta", [(1.25, 1.25), (1.5, 2.01), (1.75, 1.0)])
def test_ml_continuous_across_asymptotic_switch(alpha, beta):
    p = MittagLefflerParams(alpha=alpha, beta=beta)
    edge = ASYMPTOTIC_ROOT ** alpha
    below, above = mittag_leffler(p, np.array([-edge * (1 - 1e-9), -edge * (1 + 1e-9)]))
    assert above == pytest.approx(below, rel=1e-7, abs=1e-12)


@pytest.mark.parametrize(
    "alpha,beta",
    [(1.5, 2.01), (1.5, 0.51), (1.25, 0.51), (1.25, 1.76), (1.75, 2.26), (1.5, 1.99), (1.75, 0.51)],
)
def test_ml_accurate_past_asymptotic_switch(alpha, beta):
    # beta - alpha k close to a pole of Gamma makes single terms of the asymptotic series tiny
    edge = ASYMPTOTIC_ROOT ** alpha
    x = edge * np.array([0.5, 0.98, 1.02, 1.12, 1.5, 3.0])
    p = MittagLefflerParams(alpha=alpha, beta=beta)
    expected = [ml_series_oracle(alpha, beta, -v) for v in x]
    assert_allclose(mittag_leffler(p, -x), expected, rtol=1e-10, atol=1e-15)


def test_ml_returns_float_for_scalar_and_readonly_array():
    p = MittagLefflerParams(alpha=1.5, beta=1.0)
    assert isinstance(mittag_leffler(p, -1.0), float)
    values = mittag_leffler(p, np.array([-1.0, -3.0]))
    assert not values.flags.writeable


def test_ml_overflow_raises():
    with pytest.raises(MittagLefflerOverflowError):
        mittag_leffler(MittagLefflerParams(alpha=1.5, beta=1.0), 1e5)


def test_ml_rejects_nonfinite():
    with pytest.raises(DomainError):
        mittag_leffler(MittagLefflerParams(alpha=1.5, beta=1.0), float("nan"))


def test_frac_integral_monomial_closed_form():
    t = np.array([0.0, 0.25, 1.0])
    expected = t ** 1.5 * math.gamma(2.0) / math.gamma(2.5)
    assert_allclose(frac_integral_monomial(0.5, 1.0, t), expected, rtol=1e-14)
    right = frac_integral_monomial(0.5, 1.0, t, side="right", b=1.0)
    assert_allclose(right, (1.0 - t) ** 1.5 * math.gamma(2.0) / math.gamma(2.5), rtol=1e-14)


def test_frac_integral_of_order_zero_is_identity():
    t = np.array([0.1, 0.9])
    assert_allclose(frac_integral_monomial(0.0, -0.49, t), t ** -0.49, rtol=1e-15)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"gamma": 0.5, "mu": -1.0, "t": 0.5},
        {"gamma": -0.1, "mu": 0.0, "t": 0.5},
        {"gamma": 0.5, "mu": 0.0, "t": 0.5, "side": "middle"},
        {"gamma": 0.5, "mu": 0.0, "t": 1.5, "side": "right", "b": 1.0},
    ],
)
def test_frac_integral_monomial_domain(kwargs):
    with pytest.raises(DomainError):
        frac_integral_monomial(**kwargs)


def test_frac_integral_polynomial_is_linear():
    t = np.linspace(0.0, 1.0, 5)
    combined = frac_integral_polynomial([1.0, 0.0, 3.0], 0.7, t)
    separate = np.asarray(frac_integral_monomial(0.7, 0.0, t)) + 3.0 * np.asarray(frac_integral_monomial(0.7, 2.0, t))
    assert_allclose(combined, separate, rtol=1e-14)


def test_power_increments_match_direct_differences():
    i = np.arange(1, 51, dtype=float)
    assert_allclose(power_increments(0.51, 50), i ** 0.51 - (i - 1.0) ** 0.51, rtol=1e-13)


@pytest.mark.parametrize("p", [0.5, 1.51, 2.0])
def test_second_differences_against_mpmath(p):
    n = np.arange(0, 60)
    with mpmath.workdps(50):
        expected = [
            float(mpmath.mpf(k + 1) ** p - 2 * mpmath.mpf(k) ** p + (mpmath.mpf(k - 1) ** p if k > 0 else 0))
            for k in (int(v) for v in n)
        ]
    assert_allclose(second_differences(p, n), expected, rtol=1e-12)


def test_cell_average_weights_telescope():
    nu, tau, J = 0.5, 0.01, 40
    weights = rl_cell_average_weights(nu, tau, J)
    scale = tau ** (1.0 - nu) / math.gamma(2.0 - nu)
    m = np.arange(J, dtype=float)
    assert len(weights) == J
    assert weights.head == pytest.approx(scale, rel=1e-14)
    assert_allclose(weights.partial_sums(), scale * ((m + 1.0) ** (1.0 - nu) - m ** (1.0 - nu)), rtol=1e-12)
    assert np.all(weights.kappa[1:] < 0)


@pytest.mark.parametrize("nu", [0.25, 0.5, 0.75])
def test_cell_average_weights_are_cell_integrals(nu):
    tau, J = 0.05, 12
    weights = rl_cell_average_weights(nu, tau, J)
    with mpmath.workdps(30):
        t_step, order = mpmath.mpf(tau), mpmath.mpf(nu)

        def kernel(t):
            # D^nu of the indicator of the first cell
            shifted = (t - t_step) ** -order if t > t_step else 0
            return (t ** -order - shifted) / mpmath.gamma(1 - order)

        expected = [float(mpmath.quad(kernel, [m * t_step, (m + 1) * t_step])) for m in range(J)]
    assert_allclose(weights.kappa, expected, rtol=1e-12)


@pytest.mark.parametrize("nu,tau,J", [(1.0, 0.1, 4), (0.5, 0.0, 4), (0.5, 0.1, 0)])
def test_cell_average_weights_domain(nu, tau, J):
    with pytest.raises(DomainError):
        rl_cell_average_weights(nu, tau, J)
