"""Desk-scale rate checks for the benchmark problems.

These run minutes, not seconds, and are deselected by default; run them
with `pytest -m slow`. The axis that is not refined sits on the reference
grid, so each curve sees only the error of the refined axis.
"""
import pytest

from fracwave.harness.study import order_failures, run_convergence_study
from fracwave.numerics.mesh_fem import SpatialMesh, TemporalGrid
from fracwave.numerics.metrics import error_e1
from fracwave.numerics.scheme import assemble_system, example_problem
from fracwave.numerics.solver import solve_fast_dnc
from fracwave.numerics.spectral_ref import reference_solution
from fracwave.schemas.study import StudyConfig

pytestmark = pytest.mark.slow

ALPHAS = [1.25, 1.5, 1.75]


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("example", [1, 2])
def test_space_orders_inside_bands(example, alpha):
    cfg = StudyConfig(alphas=[alpha], example=example, vary="space")
    assert order_failures(run_convergence_study(cfg)) == []


@pytest.mark.parametrize("alpha", ALPHAS)
@pytest.mark.parametrize("example", [1, 2])
def test_time_orders_inside_bands(example, alpha):
    cfg = StudyConfig(alphas=[alpha], example=example, vary="time", levels=[5, 6, 7, 8], ref_N=511)
    assert order_failures(run_convergence_study(cfg)) == []


def test_spectral_and_fine_grid_references_agree():
    problem = example_problem(1, 1.5)
    tg, sm = TemporalGrid(J=2048), SpatialMesh(N=255)
    fine = solve_fast_dnc(assemble_system(problem, tg, sm))
    spectral = reference_solution(problem, tg, sm, n_modes=4096, tol=1e-2)
    coarse = solve_fast_dnc(assemble_system(problem, tg, SpatialMesh(N=15)))
    assert error_e1(fine, spectral) < 0.1 * error_e1(coarse, fine)
