import argparse
import logging
import time

from fracwave.commands.deps import problem_from_args
from fracwave.numerics.mesh_fem import SpatialMesh, TemporalGrid
from fracwave.numerics.metrics import h1_max_norm
from fracwave.numerics.scheme import assemble_system
from fracwave.numerics.solver import save_field, solve_fast_dnc, solve_stepping

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("solve", help="solve one problem on one grid pair")
    parser.add_argument("--alpha", type=float, required=True, help="order in (1, 2)")
    parser.add_argument("--example", type=int, choices=(1, 2), default=1, help="benchmark source")
    parser.add_argument("--mu-t", type=float, help="custom source time exponent")
    parser.add_argument("--mu-x", type=float, help="custom source space exponent")
    parser.add_argument("--T", type=float, default=1.0, help="time horizon")
    parser.add_argument("--J", type=int, default=256, help="time steps")
    parser.add_argument("--N", type=int, default=63, help="interior spatial nodes")
    parser.add_argument("--solver", choices=("fast", "stepping"), default="fast")
    parser.add_argument("--dump", help="write the solution to this file")
    parser.add_argument("--format", choices=("csv", "bin"), help="dump format (default from suffix)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    """Solve, optionally dump the field, and print a one-line summary."""
    problem = problem_from_args(args)
    tg = TemporalGrid(J=args.J, T=problem.T)
    sm = SpatialMesh(N=args.N)
    started = time.perf_counter()
    system = assemble_system(problem, tg, sm)
    field = solve_fast_dnc(system) if args.solver == "fast" else solve_stepping(system)
    logger.info("%s solve J=%d N=%d (%.2fs)", args.solver, tg.J, sm.N, time.perf_counter() - started)
    if args.dump:
        save_field(field, args.dump, args.format)
        logger.info("solution written to %s", args.dump)
    print(f"alpha={problem.alpha!r} J={tg.J} N={sm.N} max_H1={h1_max_norm(field)!r}")
    return 0
