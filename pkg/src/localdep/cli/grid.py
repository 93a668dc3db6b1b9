"""
`localdep grid`: dependence maps as CSV and optional SVG heatmap.
"""

from pathlib import Path
from typing import List, Optional, Tuple

import structlog
import typer

from ..core.analysis import sweep
from ..core.exceptions import GridSpecError
from ..core.export import format_value, write_csv, write_svg
from ..models.grid import GridSpec, MapResult
from .common import (
    DEFAULT_MODEL,
    Backend,
    axis_names,
    error_boundary,
    get_state,
    load_model,
    optional_precision,
    parse_fix,
    parse_range,
    resolve_backend,
)

logger = structlog.get_logger(__name__)


def write_map_files(
    result: MapResult,
    names: Tuple[str, ...],
    csv_path: Path,
    svg_path: Optional[Path],
    precision: int,
    plot_size: int,
    title: Optional[str] = None,
) -> None:
    """Write CSV (and SVG); files written by this call are removed on failure."""
    written: List[Path] = []
    try:
        written.append(csv_path)
        write_csv(result, csv_path, names, precision)
        if svg_path is not None:
            written.append(svg_path)
            write_svg(result, svg_path, names, plot_size=plot_size, title=title)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        logger.warning("Removed partial output", files=[str(p) for p in written])
        raise


def cmd_grid(
    ctx: typer.Context,
    csv_path: Path = typer.Option(..., "--csv", help="CSV output file"),
    ranges: List[str] = typer.Option(
        ..., "--range", "-r", help="Swept axis as axis=lo:hi:count (repeatable)"
    ),
    fixes: Optional[List[str]] = typer.Option(
        None, "--fix", "-f", help="Fixed axis as axis=value (repeatable)"
    ),
    model_path: Path = typer.Option(DEFAULT_MODEL, "--model", "-m", help="Model JSON file"),
    svg_path: Optional[Path] = typer.Option(None, "--svg", help="SVG heatmap output file"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Worker threads (0 = all cores)"),
    backend: Backend = typer.Option(Backend.GAUSSIAN, "--backend", help="Evaluation backend"),
    precision: Optional[int] = typer.Option(None, "--precision", help="Decimal places"),
    title: Optional[str] = typer.Option(None, "--title", help="SVG title"),
) -> None:
    """Sweep H over a grid and write the map."""
    state = get_state(ctx)
    settings = state.settings
    with error_boundary("grid"):
        digits = optional_precision(precision, settings)
        gaussian = load_model(model_path)
        dim = gaussian.dim
        fixed = dict(parse_fix(text, dim) for text in fixes or [])
        spec = GridSpec(
            dim=dim,
            fixed=fixed,
            swept=tuple(parse_range(text, dim) for text in ranges),
        )
        if svg_path is not None and len(spec.swept) != 2:
            raise GridSpecError(
                "SVG output needs exactly two swept axes", {"swept": len(spec.swept)}
            )

        model = resolve_backend(gaussian, backend, settings)
        result = sweep(
            model,
            spec,
            workers=settings.grid.workers if workers is None else workers,
            metrics=state.metrics,
        )
        write_map_files(
            result,
            axis_names(dim),
            csv_path,
            svg_path,
            digits,
            settings.output.plot_size,
            title,
        )

        typer.echo(f"nodes = {spec.size}")
        typer.echo(f"min = {format_value(result.min, digits)} at {result.argmin}")
        typer.echo(f"max = {format_value(result.max, digits)} at {result.argmax}")
        if result.bound_violations:
            typer.echo(f"bound violations = {len(result.bound_violations)}")
        typer.echo(f"csv = {csv_path}")
        if svg_path is not None:
            typer.echo(f"svg = {svg_path}")
