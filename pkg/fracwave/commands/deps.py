"""Shared helpers of the subcommands: config files, flag merging, validation."""
import argparse
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Type, TypeVar

from pydantic import BaseModel, ValidationError

from fracwave.core.errors import ConfigurationError
from fracwave.numerics.scheme import example_problem
from fracwave.schemas.problem import ProblemSpec, SeparablePowerSource

Model = TypeVar("Model", bound=BaseModel)


def parse_levels(text: str) -> List[int]:
    """Accept "4-7" or "4,5,6,7"."""
    try:
        if "-" in text:
            lo, hi = (int(part) for part in text.split("-", 1))
            return list(range(lo, hi + 1))
        return [int(part) for part in text.split(",") if part]
    except ValueError:
        raise argparse.ArgumentTypeError(f"levels must look like 4-7 or 4,5,6,7; got {text!r}")


def load_json_config(path: Optional[Path]) -> Dict[str, Any]:
    """Read a JSON config whose keys mirror the long flag names."""
    if path is None:
        return {}
    try:
        with Path(path).open("r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigurationError(f"config {path} must hold a JSON object")
    return {key.replace("-", "_"): value for key, value in data.items()}


def merge_config(file_values: Dict[str, Any], flag_values: Dict[str, Any]) -> Dict[str, Any]:
    """Flags given on the command line win over the config file."""
    merged = dict(file_values)
    merged.update({key: value for key, value in flag_values.items() if value is not None})
    return merged


def validate(model: Type[Model], values: Dict[str, Any]) -> Model:
    """Build a pydantic model, reporting violations as configuration errors."""
    try:
        return model.model_validate(values)
    except ValidationError as exc:
        messages = "; ".join(
            f"{'.'.join(str(part) for part in err['loc']) or model.__name__}: {err['msg']}"
            for err in exc.errors()
        )
        raise ConfigurationError(messages) from exc


def custom_source(mu_t: Optional[float], mu_x: Optional[float]) -> Optional[Dict[str, float]]:
    if mu_t is None and mu_x is None:
        return None
    if mu_t is None or mu_x is None:
        raise ConfigurationError("a custom source needs both --mu-t and --mu-x")
    return {"mu_t": mu_t, "mu_x": mu_x}


def problem_from_args(args: argparse.Namespace) -> ProblemSpec:
    """Benchmark example or custom separable power source at a single alpha."""
    source = custom_source(args.mu_t, args.mu_x)
    if source is not None:
        return validate(ProblemSpec, {
            "alpha": args.alpha,
            "T": args.T,
            "source": validate(SeparablePowerSource, source),
        })
    if not 1.0 < args.alpha < 2.0:
        raise ConfigurationError(f"alpha must lie in (1, 2); got {args.alpha}")
    source = example_problem(args.example, args.alpha).source
    return validate(ProblemSpec, {"alpha": args.alpha, "T": args.T, "source": source})
