import numpy as np
import pytest

from fracwave.core.errors import ConfigurationError
from fracwave.harness.selftest import (E2_ORACLE_GAMMAS, SUITES, SuiteResult,
                                       format_summary, perturb_kappa1,
                                       run_selftest)
from fracwave.schemas.study import StudyConfig


def test_operator_identity_suites_pass():
    results = run_selftest(seed=3, suites=["semigroup", "adjoint"])
    assert [r.name for r in results] == ["semigroup", "adjoint"]
    assert all(r.passed for r in results), format_summary(results)


def test_solver_equivalence_passes_and_catches_kappa1_fault():
    clean = run_selftest(suites=["solver_equivalence"])
    assert clean[0].passed, clean[0].detail
    faulty = run_selftest(suites=["solver_equivalence"], fault="kappa1")
    assert not faulty[0].passed


def test_e2_oracle_gates_the_study_rule():
    assert E2_ORACLE_GAMMAS == (0.125, 0.25, 0.375)
    rule = StudyConfig().e2_rule
    result = run_selftest(seed=1, suites=["e2_oracle"])[0]
    assert result.passed, result.detail
    assert result.detail.startswith(rule)


def test_perturb_kappa1_copies(example1_system):
    perturbed = perturb_kappa1(example1_system, 0.5)
    assert perturbed.kappa.kappa[1] == pytest.approx(example1_system.kappa.kappa[1] + 0.5)
    np.testing.assert_array_equal(perturbed.kappa.kappa[2:], example1_system.kappa.kappa[2:])
    np.testing.assert_array_equal(perturbed.rhs, example1_system.rhs)


def test_unknown_fault_or_suite():
    with pytest.raises(ConfigurationError):
        run_selftest(fault="kappa2")
    with pytest.raises(ConfigurationError):
        run_selftest(suites=["nope"])


def test_format_summary_counts():
    summary = format_summary([SuiteResult(name="a", passed=True, detail="x"), SuiteResult(name="b", passed=False, detail="y")])
    assert summary.splitlines()[-1] == "1 passed, 1 failed"
    assert "FAIL" in summary


@pytest.mark.slow
def test_full_selftest_passes():
    results = run_selftest(seed=0)
    assert [r.name for r in results] == list(SUITES)
    assert all(r.passed for r in results), format_summary(results)
