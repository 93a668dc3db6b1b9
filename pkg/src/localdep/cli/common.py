"""
Shared CLI plumbing: application state, model loading, argument parsing
and the exception boundary that maps errors to exit codes.
"""

import re
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, List, Optional, Tuple

import structlog
import typer
from pydantic import BaseModel, ConfigDict, Field
from pydantic import ValidationError as PydanticValidationError

from ..config import Settings
from ..core.exceptions import GridSpecError, LocalDepException, ValidationError
from ..core.gaussian_backend import gaussian_density_model
from ..core.localdep import Model
from ..core.metrics import MetricsCollector
from ..models.grid import AxisRange
from ..models.model_core import GaussianModel

logger = structlog.get_logger(__name__)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
DEFAULT_MODEL = DATA_DIR / "reference_model.json"
DEFAULT_POINTS = DATA_DIR / "reference_points.csv"

RANGE_PATTERN = re.compile(r"^\s*([A-Za-z0-9_]+)\s*=\s*([^:]+):([^:]+):([^:]+)\s*$")
FIX_PATTERN = re.compile(r"^\s*([A-Za-z0-9_]+)\s*=\s*(.+?)\s*$")


class Backend(str, Enum):
    """Evaluation backend for Gaussian model files."""

    GAUSSIAN = "gaussian"
    QUADRATURE = "quadrature"


@dataclass
class AppState:
    """Per-invocation state carried on the typer context."""

    settings: Settings
    metrics: MetricsCollector = field(default_factory=MetricsCollector)


class ModelFile(BaseModel):
    """
    Model JSON schema.

    {"mean": [0, 0, 0], "cov": [[1, 0.5, 0.3], [0.5, 1, 0.4], [0.3, 0.4, 1]]}
    """

    model_config = ConfigDict(extra="forbid")

    mean: List[float] = Field(description="Mean vector")
    cov: List[List[float]] = Field(description="Covariance matrix, row-major")

    def to_model(self) -> GaussianModel:
        return GaussianModel.from_arrays(self.mean, self.cov)


def get_state(ctx: typer.Context) -> AppState:
    state = ctx.find_object(AppState)
    if state is None:
        raise LocalDepException("CLI state not initialized")
    return state


def load_model(path: Path) -> GaussianModel:
    """Parse and validate a model file before any computation."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(
            f"Cannot read model file '{path}': {exc.strerror}",
            details={"field": "model", "path": str(path)},
        ) from exc
    model = ModelFile.model_validate_json(text).to_model()
    logger.debug("Model loaded", path=str(path), dim=model.dim)
    return model


def resolve_backend(model: GaussianModel, backend: Backend, settings: Settings) -> Model:
    """Gaussian closed form, or the same model wrapped for the quadrature oracle."""
    if backend is Backend.QUADRATURE:
        quadrature = settings.quadrature
        return gaussian_density_model(
            model,
            sigmas=quadrature.truncation_sigmas,
            quad_order=quadrature.nodes_per_axis,
            tol=quadrature.tol,
        )
    return model


def axis_names(dim: int) -> Tuple[str, ...]:
    """x, y, z for up to three variables, x1..xn otherwise."""
    if dim <= 3:
        return ("x", "y", "z")[:dim]
    return tuple(f"x{i + 1}" for i in range(dim))


def axis_index(name: str, dim: int) -> int:
    names = axis_names(dim)
    if name in names:
        return names.index(name)
    match = re.fullmatch(r"x(\d+)", name)
    if match and 1 <= int(match.group(1)) <= dim:
        return int(match.group(1)) - 1
    raise GridSpecError(
        f"Unknown axis '{name}' (expected one of {', '.join(names)})",
        {"axis": name},
    )


def parse_float(text: str, field_name: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ValidationError(
            f"'{text.strip()}' is not a number in '{field_name}'",
            details={"field": field_name, "value": text},
        ) from None


def parse_point(text: str, dim: int, field_name: str = "point") -> Tuple[float, ...]:
    """Comma-separated coordinates, e.g. "0,0,1"."""
    values = tuple(parse_float(part, field_name) for part in text.split(","))
    if len(values) != dim:
        raise ValidationError(
            f"'{field_name}' has {len(values)} coordinates, model has {dim}",
            details={"field": field_name, "expected": dim, "actual": len(values)},
            error_code="dimension_mismatch",
        )
    return values


def parse_fix(text: str, dim: int) -> Tuple[int, float]:
    """axis=value"""
    match = FIX_PATTERN.match(text)
    if not match:
        raise GridSpecError(f"Malformed --fix '{text}' (expected axis=value)", {"fix": text})
    return axis_index(match.group(1), dim), parse_float(match.group(2), "fix")


def parse_range(text: str, dim: int) -> AxisRange:
    """axis=lo:hi:count"""
    match = RANGE_PATTERN.match(text)
    if not match:
        raise GridSpecError(
            f"Malformed --range '{text}' (expected axis=lo:hi:count)", {"range": text}
        )
    name, lo, hi, count = match.groups()
    try:
        nodes = int(count)
    except ValueError:
        raise GridSpecError(f"Node count '{count}' is not an integer", {"range": text}) from None
    return AxisRange(
        axis=axis_index(name, dim),
        lo=parse_float(lo, "range"),
        hi=parse_float(hi, "range"),
        count=nodes,
    )


def subset_label(subset: Tuple[int, ...], names: Tuple[str, ...]) -> str:
    return ",".join(names[i] for i in subset)


def _pydantic_fields(exc: PydanticValidationError) -> List[str]:
    return sorted({".".join(str(p) for p in error["loc"]) or "model" for error in exc.errors()})


@contextmanager
def error_boundary(command: str) -> Iterator[None]:
    """Map exceptions to the stable exit codes: 2 input, 3 computation, 4 convergence."""
    try:
        yield
    except LocalDepException as exc:
        logger.error(
            "localdep exception occurred",
            command=command,
            error=str(exc),
            error_code=exc.error_code,
            exit_code=exc.exit_code,
        )
        typer.echo(f"Error [{exc.error_code}]: {exc}", err=True)
        raise typer.Exit(exc.exit_code) from exc
    except PydanticValidationError as exc:
        fields = _pydantic_fields(exc)
        logger.error("Invalid input", command=command, fields=fields)
        typer.echo(
            f"Error [validation_error]: invalid field(s) {', '.join(fields)}: "
            f"{exc.errors()[0]['msg']}",
            err=True,
        )
        raise typer.Exit(2) from exc


def optional_precision(value: Optional[int], settings: Settings) -> int:
    precision = settings.output.precision if value is None else value
    if not 0 <= precision <= 17:
        raise ValidationError("precision must be in [0, 17]", details={"field": "precision"})
    return precision
