"""Convergence studies: one reference per alpha, a solve per level, E1/E2 and orders."""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Tuple

from fracwave.config import settings
from fracwave.core.errors import ResourceError
from fracwave.harness.outputs import emit_outputs
from fracwave.numerics.mesh_fem import (SolutionField, SpatialMesh,
                                        TemporalGrid, assemble_mass,
                                        assemble_stiffness)
from fracwave.numerics.metrics import (error_e1, error_e2, observed_order,
                                       order_band, predicted_orders)
from fracwave.numerics.scheme import assemble_system, example_problem
from fracwave.numerics.solver import solve_fast_dnc
from fracwave.numerics.spectral_ref import reference_solution
from fracwave.schemas.problem import ProblemSpec
from fracwave.schemas.report import (ConvergenceCurve, ConvergenceReport,
                                     LevelResult)
from fracwave.schemas.study import StudyConfig

logger = logging.getLogger(__name__)

# Arrays of size (J+1) x N alive at once during a divide-and-conquer solve
REFERENCE_ARRAYS = 6


def build_problem(cfg: StudyConfig, alpha: float) -> ProblemSpec:
    """Problem for one alpha: a benchmark example or the custom source."""
    if cfg.source is not None:
        return ProblemSpec(alpha=alpha, T=1.0, source=cfg.source)
    return example_problem(cfg.example, alpha)


def level_grids(cfg: StudyConfig, level: int) -> Tuple[TemporalGrid, SpatialMesh]:
    if cfg.vary == "space":
        return TemporalGrid(J=cfg.fixed_J), SpatialMesh(N=2 ** level - 1)
    return TemporalGrid(J=2 ** level), SpatialMesh(N=cfg.fixed_N)


def reference_memory_mib(J: int, N: int) -> float:
    return REFERENCE_ARRAYS * (J + 1) * N * 8 / 2 ** 20


def check_reference_budget(cfg: StudyConfig) -> None:
    """Raise ResourceError when the reference solves would not fit in memory."""
    per_solve = reference_memory_mib(cfg.ref_J, cfg.ref_N)
    concurrent = min(cfg.threads, len(cfg.alphas))
    needed = per_solve * concurrent
    if needed > settings.max_reference_mib:
        raise ResourceError(
            f"reference solve needs about {needed:.0f} MiB, limit is {settings.max_reference_mib} MiB",
            advisory="lower --ref-J/--ref-N or --threads, or raise FRACWAVE_MAX_REFERENCE_MIB",
        )


def solve_reference(cfg: StudyConfig, problem: ProblemSpec) -> SolutionField:
    tg = TemporalGrid(J=cfg.ref_J, T=problem.T)
    sm = SpatialMesh(N=cfg.ref_N)
    started = time.perf_counter()
    if cfg.ref_kind == "spectral":
        field = reference_solution(problem, tg, sm, cfg.spectral_modes, cfg.spectral_tol)
    else:
        field = solve_fast_dnc(assemble_system(problem, tg, sm))
    logger.info(
        "alpha=%s reference %s J=%d N=%d (%.1fs)",
        problem.alpha, cfg.ref_kind, tg.J, sm.N, time.perf_counter() - started,
    )
    return field


def _level_errors(
    cfg: StudyConfig,
    problem: ProblemSpec,
    level: int,
    reference: SolutionField,
) -> Tuple[float, float, float, float]:
    """(tau, h, E1, E2) of one level."""
    started = time.perf_counter()
    tg, sm = level_grids(cfg, level)
    field = solve_fast_dnc(assemble_system(problem, tg, sm))
    e1 = error_e1(field, reference, assemble_stiffness(reference.spatial))
    e2 = error_e2(field, reference, problem.alpha, cfg.e2_rule, assemble_mass(reference.spatial))
    logger.info(
        "alpha=%s level=%d J=%d N=%d E1=%.4e E2=%.4e (%.1fs)",
        problem.alpha, level, tg.J, sm.N, e1, e2, time.perf_counter() - started,
    )
    return tg.tau, sm.h, e1, e2


def _orders(errors: List[float]) -> List[Optional[float]]:
    """Orders against the previous level; None where undefined."""
    if len(errors) < 2 or min(errors) <= 0.0:
        return [None] * len(errors)
    return [None] + [float(o) for o in observed_order(errors)]


def _curve(cfg: StudyConfig, alpha: float, rows: List[Tuple[float, float, float, float]]) -> ConvergenceCurve:
    orders_e1 = _orders([r[2] for r in rows])
    orders_e2 = _orders([r[3] for r in rows])
    levels = [
        LevelResult(level=level, tau=tau, h=h, E1=e1, E2=e2, order_E1=o1, order_E2=o2)
        for level, (tau, h, e1, e2), o1, o2 in zip(cfg.levels, rows, orders_e1, orders_e2)
    ]
    return ConvergenceCurve(alpha=alpha, example=cfg.example_label, vary=cfg.vary, levels=levels)


def run_convergence_study(cfg: StudyConfig) -> ConvergenceReport:
    """Solve the reference once per alpha, then every level, and collect E1/E2 and orders.

    The report, and the CSV when cfg.csv is set, depend only on cfg.
    """
    check_reference_budget(cfg)
    problems = {alpha: build_problem(cfg, alpha) for alpha in cfg.alphas}
    with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
        references: Dict[float, SolutionField] = dict(
            zip(cfg.alphas, pool.map(lambda a: solve_reference(cfg, problems[a]), cfg.alphas))
        )
        tasks = [(alpha, level) for alpha in cfg.alphas for level in cfg.levels]
        results = list(pool.map(
            lambda task: _level_errors(cfg, problems[task[0]], task[1], references[task[0]]),
            tasks,
        ))

    by_alpha: Dict[float, List[Tuple[float, float, float, float]]] = {a: [] for a in cfg.alphas}
    for (alpha, _), row in zip(tasks, results):
        by_alpha[alpha].append(row)
    report = ConvergenceReport(curves=[_curve(cfg, alpha, by_alpha[alpha]) for alpha in cfg.alphas])
    if cfg.csv is not None:
        emit_outputs(report, cfg.csv)
    return report


def order_failures(report: ConvergenceReport) -> List[str]:
    """Finest-pair orders of benchmark curves that leave their acceptance band."""
    failures = []
    for curve in report.curves:
        if curve.example not in ("1", "2") or len(curve.levels) < 2:
            continue
        predicted = predicted_orders(int(curve.example), curve.vary, curve.alpha)
        for metric, observed in zip(("E1", "E2"), curve.finest_orders()):
            rate = predicted[metric]
            band = order_band(int(curve.example), curve.vary, rate)
            if observed is None or abs(observed - rate) > band:
                failures.append(
                    f"alpha={curve.alpha} {metric} order {observed} outside {rate:.3f} +- {band}"
                )
    return failures
