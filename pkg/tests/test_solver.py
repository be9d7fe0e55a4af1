import dataclasses
import time

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fracwave.core.errors import (ConfigurationError, OutputError,
                                  SingularOperatorError)
from fracwave.numerics.mesh_fem import (SpatialMesh, TemporalGrid,
                                        TridiagonalOperator, assemble_mass)
from fracwave.numerics.metrics import frac_seminorm_estimate, h1_max_norm
from fracwave.numerics.scheme import assemble_system, example_problem
from fracwave.numerics.solver import (factor_tridiagonal, load_field,
                                      make_plan, save_field, solve_fast_dnc,
                                      solve_stepping, thomas_solve,
                                      toeplitz_matvec)
from fracwave.numerics.spectral_ref import reference_solution
from fracwave.schemas.problem import (PowerDatum, ProblemSpec,
                                      SeparablePowerSource, SineDatum,
                                      SineModeSource)


def random_operator(rng, n):
    return TridiagonalOperator(
        sub=rng.uniform(-1.0, 1.0, n - 1),
        diag=rng.uniform(3.0, 4.0, n),
        sup=rng.uniform(-1.0, 1.0, n - 1),
    )


def test_thomas_solve_matches_dense(rng):
    op = random_operator(rng, 12)
    b = rng.standard_normal(12)
    assert_allclose(thomas_solve(op, b), np.linalg.solve(op.to_dense(), b), rtol=1e-12)


def test_factor_reused_for_several_columns(rng):
    op = random_operator(rng, 9)
    factor = factor_tridiagonal(op)
    b = rng.standard_normal((9, 4))
    assert_allclose(factor.solve(b), np.linalg.solve(op.to_dense(), b), rtol=1e-12)
    with pytest.raises(ConfigurationError):
        factor.solve(np.ones(8))


def test_single_unknown():
    op = TridiagonalOperator(sub=[], diag=[4.0], sup=[])
    assert_allclose(thomas_solve(op, [2.0]), [0.5])


def test_zero_pivot_raises():
    with pytest.raises(SingularOperatorError):
        factor_tridiagonal(TridiagonalOperator(sub=[0.0], diag=[0.0, 1.0], sup=[0.0]))
    with pytest.raises(SingularOperatorError):
        factor_tridiagonal(TridiagonalOperator(sub=[], diag=[0.0], sup=[]))


def test_two_unknowns():
    op = TridiagonalOperator(sub=[1.0], diag=[4.0, 4.0], sup=[1.0])
    assert_allclose(thomas_solve(op, [5.0, 5.0]), [1.0, 1.0], rtol=1e-14)
    factor = factor_tridiagonal(TridiagonalOperator(sub=[2.0], diag=[0.0, 1.0], sup=[3.0]))
    assert_allclose(factor.solve([[3.0, 0.0], [1.0, 2.0]]), [[0.0, 1.0], [1.0, 0.0]], rtol=0, atol=1e-15)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_tiny_meshes_solve(N):
    sys = assemble_system(example_problem(1, 1.5), TemporalGrid(J=16), SpatialMesh(N=N))
    stepping = solve_stepping(sys).coefficients
    fast = solve_fast_dnc(sys, floor=2).coefficients
    assert stepping.shape == (17, N)
    assert_allclose(fast, stepping, rtol=0, atol=1e-12 * np.max(np.abs(stepping)))


@pytest.mark.parametrize("n", [1, 2, 7, 64, 100, 257, 1024])
def test_toeplitz_matvec_matches_direct_sum(rng, n):
    kernel = rng.standard_normal(n + 3)
    blocks = rng.standard_normal((n, 2))
    direct = np.stack([kernel[i::-1][: i + 1] @ blocks[: i + 1] for i in range(n)])
    assert_allclose(toeplitz_matvec(kernel, blocks), direct, rtol=0, atol=1e-12 * np.max(np.abs(direct)))


def test_toeplitz_plan_checks(rng):
    kernel = rng.standard_normal(16)
    plan = make_plan(kernel, 8)
    assert plan.fft_length >= 15
    blocks = rng.standard_normal((8, 3))
    assert_allclose(toeplitz_matvec(kernel, blocks, plan), toeplitz_matvec(kernel, blocks), rtol=1e-12)
    with pytest.raises(ConfigurationError):
        toeplitz_matvec(kernel, rng.standard_normal((4, 3)), plan)
    with pytest.raises(ConfigurationError):
        toeplitz_matvec(kernel[:3], blocks)


@pytest.mark.parametrize("alpha", [1.25, 1.5, 1.75])
def test_fast_solver_matches_stepping(alpha):
    sys = assemble_system(example_problem(1, alpha), TemporalGrid(J=100), SpatialMesh(N=15))
    stepping = solve_stepping(sys).coefficients
    fast = solve_fast_dnc(sys, floor=4).coefficients
    assert_allclose(fast, stepping, rtol=0, atol=1e-10 * np.max(np.abs(stepping)))


def test_fast_solver_with_initial_data():
    problem = ProblemSpec(
        alpha=1.6,
        source=example_problem(2, 1.6).source,
        u0=SineDatum(k=1),
        u1=SineDatum(k=3, scale=2.0),
    )
    sys = assemble_system(problem, TemporalGrid(J=64), SpatialMesh(N=7))
    stepping = solve_stepping(sys).coefficients
    fast = solve_fast_dnc(sys, floor=2).coefficients
    assert_allclose(fast, stepping, rtol=0, atol=1e-10 * np.max(np.abs(stepping)))


def test_single_mode_solution_approaches_expansion():
    problem = ProblemSpec(alpha=1.5, source=SineModeSource(mu_t=0.0, k=1))
    tg, sm = TemporalGrid(J=512), SpatialMesh(N=31)
    field = solve_fast_dnc(assemble_system(problem, tg, sm))
    exact = reference_solution(problem, tg, sm).coefficients
    assert np.max(np.abs(field.coefficients - exact)) <= 0.05 * np.max(np.abs(exact))


@pytest.mark.parametrize("name,fmt", [("u.csv", None), ("u.bin", None), ("u.dat", "bin")])
def test_dump_and_reload(tmp_path, example1_system, name, fmt):
    field = solve_fast_dnc(example1_system)
    path = save_field(field, tmp_path / name, fmt)
    header = path.read_bytes().split(b"\n", 1)[0].decode("ascii").split()
    assert header[:2] == ["100", "15"]
    loaded = load_field(path, fmt)
    assert_allclose(loaded.coefficients, field.coefficients, rtol=0, atol=0)
    assert loaded.alpha == 1.5
    assert loaded.temporal.T == 1.0


def test_dump_errors(tmp_path, example1_system):
    field = solve_stepping(example1_system)
    with pytest.raises(ConfigurationError):
        save_field(field, tmp_path / "u.csv", "npy")
    with pytest.raises(OutputError):
        save_field(field, tmp_path / "missing" / "u.csv")
    (tmp_path / "bad.csv").write_text("not a header\n1,2\n")
    with pytest.raises(OutputError):
        load_field(tmp_path / "bad.csv")


@pytest.mark.parametrize("solve", [solve_stepping, lambda sys: solve_fast_dnc(sys, floor=4)])
def test_later_sources_do_not_change_earlier_steps(example1_system, solve):
    k = 37
    rhs = example1_system.rhs.copy()
    rhs[k:] = 0.0
    truncated = dataclasses.replace(example1_system, rhs=rhs)
    full = solve(example1_system).coefficients
    cut = solve(truncated).coefficients
    np.testing.assert_array_equal(cut[:k + 1], full[:k + 1])
    assert not np.array_equal(cut[k + 1:], full[k + 1:])


def test_free_vibration_stays_bounded_under_refinement():
    alpha = 1.5
    problem = ProblemSpec(
        alpha=alpha,
        source=SeparablePowerSource(mu_t=0.0, mu_x=0.0, scale=0.0),
        u0=SineDatum(k=1),
        u1=PowerDatum(mu=1.0),
    )
    norms, seminorms = [], []
    for J, N in ((32, 15), (64, 31), (128, 63)):
        tg, sm = TemporalGrid(J=J), SpatialMesh(N=N)
        field = solve_fast_dnc(assemble_system(problem, tg, sm))
        norms.append(h1_max_norm(field))
        velocity = np.diff(field.coefficients, axis=0) / tg.tau
        seminorms.append(frac_seminorm_estimate(velocity, 0.5 * (alpha - 1.0), tg.tau, assemble_mass(sm)))
    assert min(norms) > 0.0 and min(seminorms) > 0.0
    assert max(norms) <= 2.0 * norms[0]
    assert max(seminorms) <= 2.0 * seminorms[0]


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [1.25, 1.5, 1.75])
@pytest.mark.parametrize("N", [31, 63])
def test_fast_solver_matches_stepping_over_grid_matrix(alpha, N):
    for J in (64, 128, 256, 512, 1024):
        sys = assemble_system(example_problem(1, alpha), TemporalGrid(J=J), SpatialMesh(N=N))
        stepping = solve_stepping(sys).coefficients
        fast = solve_fast_dnc(sys).coefficients
        assert np.max(np.abs(fast - stepping)) <= 1e-10 * np.max(np.abs(stepping))


def _best_time(sys, repeats=2):
    best = np.inf
    for _ in range(repeats):
        started = time.perf_counter()
        solve_fast_dnc(sys)
        best = min(best, time.perf_counter() - started)
    return best


@pytest.mark.slow
def test_fast_solver_scales_subquadratically():
    problem = example_problem(1, 1.5)
    sm = SpatialMesh(N=31)
    small = _best_time(assemble_system(problem, TemporalGrid(J=2 ** 12), sm))
    large = _best_time(assemble_system(problem, TemporalGrid(J=2 ** 14), sm))
    # quadratic work would give 16
    assert large / small < 10.0
