from fracwave.schemas.problem import (GeneralSource, InitialDatum, NodalDatum,
                                      PowerDatum, ProblemSpec,
                                      SeparablePowerSource, SineDatum,
                                      SineModeSource, SourceTerm, ZeroDatum)
from fracwave.schemas.report import (ConvergenceCurve, ConvergenceReport,
                                     LevelResult)
from fracwave.schemas.study import StudyConfig

__all__ = [
    "ZeroDatum",
    "NodalDatum",
    "SineDatum",
    "PowerDatum",
    "InitialDatum",
    "SeparablePowerSource",
    "SineModeSource",
    "GeneralSource",
    "SourceTerm",
    "ProblemSpec",
    "LevelResult",
    "ConvergenceCurve",
    "ConvergenceReport",
    "StudyConfig",
]
