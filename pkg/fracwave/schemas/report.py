from typing import Iterator, List, Literal, Optional, Tuple

from pydantic import BaseModel, Field


class LevelResult(BaseModel):
    """Errors of one refinement level."""
    level: int
    tau: float = Field(gt=0)
    h: float = Field(gt=0)
    E1: float = Field(ge=0)
    E2: float = Field(ge=0)
    # Order against the previous (coarser) level; None on the first level
    order_E1: Optional[float] = None
    order_E2: Optional[float] = None


class ConvergenceCurve(BaseModel):
    """One refinement study for a single alpha."""
    alpha: float
    example: str
    vary: Literal["space", "time"]
    levels: List[LevelResult] = Field(default_factory=list)

    def step_sizes(self) -> List[float]:
        return [lv.h if self.vary == "space" else lv.tau for lv in self.levels]

    def finest_orders(self) -> Tuple[Optional[float], Optional[float]]:
        if len(self.levels) < 2:
            return None, None
        last = self.levels[-1]
        return last.order_E1, last.order_E2


class ConvergenceReport(BaseModel):
    """Per-alpha convergence curves of a study, in alpha order."""
    curves: List[ConvergenceCurve] = Field(default_factory=list)

    def rows(self) -> Iterator[Tuple[ConvergenceCurve, LevelResult]]:
        for curve in self.curves:
            for level in curve.levels:
                yield curve, level
