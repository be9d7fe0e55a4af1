"""CSV reports and log-log plot data for convergence studies."""
import csv
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from fracwave.core.errors import OutputError
from fracwave.schemas.report import (ConvergenceCurve, ConvergenceReport,
                                     LevelResult)

logger = logging.getLogger(__name__)

CSV_HEADER = ["alpha", "example", "vary", "level", "tau", "h", "E1", "E2", "order_E1", "order_E2"]
METRICS = ("E1", "E2")


def _cell(value: Optional[float]) -> str:
    """Shortest string that parses back to the same float."""
    return "" if value is None else repr(float(value))


def plot_path(csv_path: Path, alpha: float, metric: str) -> Path:
    return csv_path.with_name(f"{csv_path.stem}_alpha{alpha!r}_{metric}.dat")


def _write_plot_data(path: Path, curve: ConvergenceCurve, metric: str) -> None:
    axis = "h" if curve.vary == "space" else "tau"
    with path.open("w", encoding="ascii") as handle:
        handle.write(f"# {axis} {metric} alpha={curve.alpha!r} example={curve.example}\n")
        for step, level in zip(curve.step_sizes(), curve.levels):
            handle.write(f"{step!r} {getattr(level, metric)!r}\n")


def emit_outputs(report: ConvergenceReport, csv_path: Union[str, Path]) -> List[Path]:
    """Write the CSV and one plot-data file per (alpha, metric); return the paths."""
    csv_path = Path(csv_path)
    written = [csv_path]
    try:
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        with csv_path.open("w", newline="", encoding="ascii") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for curve, level in report.rows():
                writer.writerow([
                    _cell(curve.alpha),
                    curve.example,
                    curve.vary,
                    str(level.level),
                    _cell(level.tau),
                    _cell(level.h),
                    _cell(level.E1),
                    _cell(level.E2),
                    _cell(level.order_E1),
                    _cell(level.order_E2),
                ])
        for curve in report.curves:
            for metric in METRICS:
                path = plot_path(csv_path, curve.alpha, metric)
                _write_plot_data(path, curve, metric)
                written.append(path)
    except OSError as exc:
        raise OutputError(exc.strerror or str(exc), Path(exc.filename or csv_path)) from exc
    logger.info("wrote %s and %d plot-data files", csv_path, len(written) - 1)
    return written


def parse_csv(csv_path: Union[str, Path]) -> ConvergenceReport:
    """Read a report back from its CSV."""
    csv_path = Path(csv_path)
    curves: Dict[Tuple[float, str, str], ConvergenceCurve] = {}
    try:
        with csv_path.open("r", newline="", encoding="ascii") as handle:
            reader = csv.DictReader(handle)
            if reader.fieldnames != CSV_HEADER:
                raise OutputError(f"unexpected header {reader.fieldnames}", csv_path)
            for row in reader:
                key = (float(row["alpha"]), row["example"], row["vary"])
                curve = curves.get(key)
                if curve is None:
                    curve = curves[key] = ConvergenceCurve(alpha=key[0], example=key[1], vary=key[2])
                curve.levels.append(LevelResult(
                    level=int(row["level"]),
                    tau=float(row["tau"]),
                    h=float(row["h"]),
                    E1=float(row["E1"]),
                    E2=float(row["E2"]),
                    order_E1=float(row["order_E1"]) if row["order_E1"] else None,
                    order_E2=float(row["order_E2"]) if row["order_E2"] else None,
                ))
    except OutputError:
        raise
    except OSError as exc:
        raise OutputError(exc.strerror or str(exc), csv_path) from exc
    except ValueError as exc:
        raise OutputError(f"malformed report row: {exc}", csv_path) from exc
    return ConvergenceReport(curves=list(curves.values()))
