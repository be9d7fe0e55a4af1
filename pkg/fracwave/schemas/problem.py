from typing import Annotated, Callable, List, Literal, Union

import numpy as np
from pydantic import BaseModel, Field


class ZeroDatum(BaseModel):
    """Initial datum identically zero."""
    kind: Literal["zero"] = "zero"

    class Config:
        frozen = True


class NodalDatum(BaseModel):
    """Initial datum given by its interior nodal values (a member of S_h)."""
    kind: Literal["nodal"] = "nodal"
    values: List[float] = Field(min_length=1)

    class Config:
        frozen = True


class SineDatum(BaseModel):
    """Initial datum scale * sin(k pi x)."""
    kind: Literal["sine"] = "sine"
    k: int = Field(default=1, ge=1)
    scale: float = 1.0

    class Config:
        frozen = True


class PowerDatum(BaseModel):
    """Initial datum scale * x^mu."""
    kind: Literal["power"] = "power"
    mu: float = Field(gt=-1)
    scale: float = 1.0

    class Config:
        frozen = True


InitialDatum = Annotated[
    Union[ZeroDatum, NodalDatum, SineDatum, PowerDatum],
    Field(discriminator="kind"),
]


class SeparablePowerSource(BaseModel):
    """Source f(x, t) = scale * t^mu_t * x^mu_x."""
    kind: Literal["separable_power"] = "separable_power"
    mu_t: float = Field(gt=-1)
    mu_x: float = Field(gt=-1)
    scale: float = 1.0

    class Config:
        frozen = True


class SineModeSource(BaseModel):
    """Source f(x, t) = scale * t^mu_t * sqrt(2) sin(k pi x), a single eigenmode."""
    kind: Literal["sine_mode"] = "sine_mode"
    mu_t: float = Field(gt=-1)
    k: int = Field(default=1, ge=1)
    scale: float = 1.0

    class Config:
        frozen = True


class GeneralSource(BaseModel):
    """Source given by a vectorized callable f(x, t)."""
    kind: Literal["general"] = "general"
    func: Callable[[np.ndarray, np.ndarray], np.ndarray] = Field(exclude=True)
    quad_degree: int = Field(default=4, ge=1, le=32)
    # Geometric sub-splitting levels of the cells touching t = 0 or x = 0
    graded_levels: int = Field(default=60, ge=0, le=100)

    class Config:
        frozen = True
        arbitrary_types_allowed = True


SourceTerm = Annotated[
    Union[SeparablePowerSource, SineModeSource, GeneralSource],
    Field(discriminator="kind"),
]


class ProblemSpec(BaseModel):
    """Continuous problem: D^alpha (u - u0 - t u1) - u_xx = f on (0,1) x (0,T)."""
    alpha: float = Field(gt=1, lt=2)
    T: float = Field(default=1.0, gt=0)
    source: SourceTerm
    u0: InitialDatum = Field(default_factory=ZeroDatum)
    u1: InitialDatum = Field(default_factory=ZeroDatum)

    class Config:
        frozen = True
