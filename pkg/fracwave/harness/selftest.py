"""Release-gate property suites: operator identities, solver equivalence, E2 oracle."""
import dataclasses
import logging
import math
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel
from scipy import integrate

from fracwave.core.errors import ConfigurationError
from fracwave.numerics.fracops import (KernelWeights, MittagLefflerParams,
                                       frac_integral_monomial,
                                       frac_integral_polynomial,
                                       mittag_leffler)
from fracwave.numerics.mesh_fem import SpatialMesh, TemporalGrid
from fracwave.numerics.metrics import (DEFAULT_E2_RULE, coercivity_forms,
                                       frac_seminorm_estimate,
                                       seminorm_gram)
from fracwave.numerics.scheme import (DiscreteSystem, assemble_system,
                                      example_problem)
from fracwave.numerics.solver import (solve_fast_dnc, solve_stepping,
                                      toeplitz_matvec)

logger = logging.getLogger(__name__)

FAULTS = ("kappa1",)
KAPPA1_PERTURBATION = 1e-3
# gamma = (alpha - 1) / 2 for alpha = 1.25, 1.5, 1.75
E2_ORACLE_GAMMAS = (0.125, 0.25, 0.375)


class SuiteResult(BaseModel):
    """Outcome of one property suite."""
    name: str
    passed: bool
    detail: str


def _semigroup(rng: np.random.Generator, fault: Optional[str]) -> SuiteResult:
    worst = 0.0
    for gamma in (0.3, 0.7, 1.0, 1.6):
        for beta in (0.25, 0.5, 1.3):
            for mu in (-0.49, 0.0, 0.7, 2.0):
                t = np.array([0.1, 0.5, 1.0, 3.0])
                # D^-gamma D^-beta t^mu = c_beta D^-gamma t^{mu+beta}
                c_beta = math.exp(math.lgamma(mu + 1.0) - math.lgamma(mu + beta + 1.0))
                nested = c_beta * np.asarray(frac_integral_monomial(gamma, mu + beta, t))
                direct = np.asarray(frac_integral_monomial(gamma + beta, mu, t))
                worst = max(worst, float(np.max(np.abs(nested - direct) / np.abs(direct))))
    return SuiteResult(name="semigroup", passed=worst <= 1e-12, detail=f"max rel err {worst:.2e}")


def _adjoint(rng: np.random.Generator, fault: Optional[str]) -> SuiteResult:
    worst = 0.0
    for gamma in (0.2, 0.5, 0.8, 1.5):
        w = rng.uniform(-1.0, 1.0, size=4)
        v = rng.uniform(-1.0, 1.0, size=4)
        lhs, _ = integrate.quad(
            lambda t: float(frac_integral_polynomial(w, gamma, t)) * float(np.polyval(v[::-1], t)),
            0.0, 1.0, epsabs=1e-13, epsrel=1e-13, limit=200,
        )
        # v as a polynomial in (1 - t) for the right-sided integral
        v_right = np.polynomial.polynomial.Polynomial(v)(np.polynomial.polynomial.Polynomial([1.0, -1.0])).coef
        rhs, _ = integrate.quad(
            lambda t: float(np.polyval(w[::-1], t)) * float(frac_integral_polynomial(v_right, gamma, t, "right")),
            0.0, 1.0, epsabs=1e-13, epsrel=1e-13, limit=200,
        )
        worst = max(worst, abs(lhs - rhs))
    return SuiteResult(name="adjoint", passed=worst <= 1e-10, detail=f"max abs err {worst:.2e}")


def _coercivity(rng: np.random.Generator, fault: Optional[str]) -> SuiteResult:
    violations = 0
    J, tau = 6, 1.0 / 6.0
    for gamma in (0.1, 0.2, 0.24, 0.374):
        mixed, norm2 = coercivity_forms(rng.standard_normal((50, J)), gamma, tau)
        lower, upper = math.cos(gamma * math.pi) * norm2, norm2 / math.cos(gamma * math.pi)
        violations += int(np.sum((mixed < lower * (1.0 - 1e-8)) | (mixed > upper * (1.0 + 1e-8))))
    return SuiteResult(name="coercivity", passed=violations == 0, detail=f"{violations} violations of 200")


def _mittag_leffler(rng: np.random.Generator, fault: Optional[str]) -> SuiteResult:
    x = np.linspace(-5.0, 5.0, 41)
    exp_err = np.max(np.abs(mittag_leffler(MittagLefflerParams(alpha=1.0, beta=1.0), x) - np.exp(x)) / np.exp(x))
    y = np.linspace(0.0, 20.0, 81)
    cos_err = np.max(np.abs(mittag_leffler(MittagLefflerParams(alpha=2.0, beta=1.0), -y * y) - np.cos(y)))
    t = np.logspace(-3, 8, 45)
    growth = 0.0
    for alpha in (1.25, 1.5, 1.75):
        for beta in (alpha, 1.0, alpha + 0.51):
            values = np.asarray(mittag_leffler(MittagLefflerParams(alpha=alpha, beta=beta), -t))
            growth = max(growth, float(np.max((1.0 + t) * np.abs(values))))
    passed = exp_err <= 1e-12 and cos_err <= 1e-12 and np.isfinite(growth) and growth <= 10.0
    return SuiteResult(
        name="mittag_leffler",
        passed=bool(passed),
        detail=f"exp {exp_err:.1e}, cos {cos_err:.1e}, sup (1+t)|E(-t)| {growth:.3f}",
    )


def perturb_kappa1(sys: DiscreteSystem, delta: float = KAPPA1_PERTURBATION) -> DiscreteSystem:
    """Copy of the system with kappa_1 shifted by delta (fault injection)."""
    kappa = sys.kappa.kappa.copy()
    if kappa.size > 1:
        kappa[1] += delta
    kappa.setflags(write=False)
    weights = KernelWeights(nu=sys.kappa.nu, tau=sys.kappa.tau, kappa=kappa)
    return dataclasses.replace(sys, kappa=weights)


def _solver_equivalence(rng: np.random.Generator, fault: Optional[str]) -> SuiteResult:
    worst = 0.0
    for alpha in (1.25, 1.5, 1.75):
        sys = assemble_system(example_problem(1, alpha), TemporalGrid(J=128), SpatialMesh(N=31))
        reference = solve_stepping(sys).coefficients
        fast_sys = perturb_kappa1(sys) if fault == "kappa1" else sys
        fast = solve_fast_dnc(fast_sys, floor=8).coefficients
        worst = max(worst, float(np.max(np.abs(fast - reference)) / np.max(np.abs(reference))))

    kernel = rng.standard_normal(257)
    blocks = rng.standard_normal((257, 3))
    direct = np.stack([kernel[i::-1] @ blocks[:i + 1] for i in range(257)])
    matvec_err = float(np.max(np.abs(toeplitz_matvec(kernel, blocks) - direct)) / np.max(np.abs(direct)))
    return SuiteResult(
        name="solver_equivalence",
        passed=worst <= 1e-10 and matvec_err <= 1e-12,
        detail=f"fast vs stepping {worst:.2e}, toeplitz {matvec_err:.2e}",
    )


def _e2_oracle(rng: np.random.Generator, fault: Optional[str]) -> SuiteResult:
    coarse, refine = 16, 64
    tau = 1.0 / coarse
    worst = 0.0
    for gamma in E2_ORACLE_GAMMAS:
        gram = seminorm_gram(gamma, tau, coarse)
        for _ in range(20):
            w = rng.uniform(-1.0, 1.0, size=coarse)
            exact = math.sqrt(float(w @ gram @ w))
            estimate = frac_seminorm_estimate(np.repeat(w, refine), gamma, tau / refine, rule=DEFAULT_E2_RULE)
            worst = max(worst, abs(estimate - exact) / exact)
    return SuiteResult(
        name="e2_oracle",
        passed=worst <= 0.02,
        detail=f"{DEFAULT_E2_RULE} max rel err {worst:.2e}",
    )


SUITES: Dict[str, Callable[[np.random.Generator, Optional[str]], SuiteResult]] = {
    "semigroup": _semigroup,
    "adjoint": _adjoint,
    "coercivity": _coercivity,
    "mittag_leffler": _mittag_leffler,
    "solver_equivalence": _solver_equivalence,
    "e2_oracle": _e2_oracle,
}


def run_selftest(seed: int = 0, fault: Optional[str] = None, suites: Optional[List[str]] = None) -> List[SuiteResult]:
    """Run the named suites (all by default) with a seeded generator each."""
    if fault is not None and fault not in FAULTS:
        raise ConfigurationError(f"unknown fault {fault!r}; expected one of {FAULTS}")
    names = suites or list(SUITES)
    unknown = [name for name in names if name not in SUITES]
    if unknown:
        raise ConfigurationError(f"unknown suites {unknown}; expected some of {list(SUITES)}")

    results = []
    for index, name in enumerate(names):
        rng = np.random.default_rng([seed, index])
        result = SUITES[name](rng, fault)
        logger.info("%-18s %s  %s", name, "ok" if result.passed else "FAIL", result.detail)
        results.append(result)
    return results


def format_summary(results: List[SuiteResult]) -> str:
    lines = [f"{r.name:<18} {'PASS' if r.passed else 'FAIL'}  {r.detail}" for r in results]
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed} passed, {failed} failed")
    return "\n".join(lines)
