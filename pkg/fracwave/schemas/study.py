from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from fracwave.config import settings
from fracwave.schemas.problem import SeparablePowerSource

# Study levels must be at least this many dyadic steps coarser than the reference
MIN_REFERENCE_GAP = 2


class StudyConfig(BaseModel):
    """Configuration of a convergence study.

    Level l means h = 2^-l (N = 2^l - 1) for a space study and
    tau = T 2^-l (J = 2^l) for a time study. The other axis is held at J or N,
    which default to the reference grid so that only the varied axis
    contributes to the error.
    """
    alphas: List[float] = Field(default_factory=lambda: [1.5], min_length=1)
    example: int = Field(default=1, ge=1, le=2)
    source: Optional[SeparablePowerSource] = None
    vary: Literal["space", "time"] = "space"
    levels: List[int] = Field(default_factory=lambda: [4, 5, 6, 7], min_length=1)
    J: Optional[int] = Field(default=None, ge=1)
    N: Optional[int] = Field(default=None, ge=1)
    ref_J: int = Field(default_factory=lambda: settings.default_ref_J, ge=1)
    ref_N: int = Field(default_factory=lambda: settings.default_ref_N, ge=1)
    ref_kind: Literal["fine-grid", "spectral"] = "fine-grid"
    spectral_modes: int = Field(default=4096, ge=1)
    spectral_tol: float = Field(default=1e-2, gt=0)
    e2_rule: Literal["cell_average", "jump_quadrature"] = "jump_quadrature"
    csv: Optional[Path] = None
    threads: int = Field(default_factory=lambda: settings.threads, ge=1)

    @field_validator("alphas")
    @classmethod
    def alphas_in_range(cls, v: List[float]) -> List[float]:
        """Check every alpha lies in (1, 2)."""
        bad = [a for a in v if not 1.0 < a < 2.0]
        if bad:
            raise ValueError(f"alpha must lie in (1, 2); got {bad}")
        return sorted(set(v))

    @field_validator("levels")
    @classmethod
    def levels_increasing(cls, v: List[int]) -> List[int]:
        """Check levels are positive and strictly increasing."""
        if any(lv < 1 for lv in v) or any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError(f"levels must be positive and strictly increasing; got {v}")
        return v

    @model_validator(mode="after")
    def nested_in_reference(self) -> "StudyConfig":
        """Check every study grid nests in the reference grid with enough margin."""
        gap = 2 ** MIN_REFERENCE_GAP
        finest = 2 ** self.levels[-1]
        if self.vary == "space":
            refined, reference, flag = finest, self.ref_N + 1, "--ref-N"
            fixed_ok = self.ref_J % self.fixed_J == 0
            fixed_msg = f"--J {self.fixed_J} must divide --ref-J {self.ref_J}"
        else:
            refined, reference, flag = finest, self.ref_J, "--ref-J"
            fixed_ok = (self.ref_N + 1) % (self.fixed_N + 1) == 0
            fixed_msg = f"--N {self.fixed_N} + 1 must divide --ref-N {self.ref_N} + 1"
        if reference % refined != 0 or reference < gap * refined:
            raise ValueError(
                f"finest level {self.levels[-1]} must be at least {MIN_REFERENCE_GAP} dyadic "
                f"steps coarser than the reference ({flag}); raise {flag} or drop levels"
            )
        if not fixed_ok:
            raise ValueError(fixed_msg)
        return self

    @property
    def example_label(self) -> str:
        return "custom" if self.source is not None else str(self.example)

    @property
    def fixed_J(self) -> int:
        """Time steps of every level of a space study."""
        return self.J or self.ref_J

    @property
    def fixed_N(self) -> int:
        """Interior nodes of every level of a time study."""
        return self.N or self.ref_N
