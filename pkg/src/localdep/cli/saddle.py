"""
`localdep saddle`: solve for the reference point where every conditional
mean equals its unconditional mean.
"""

from pathlib import Path
from typing import Optional

import typer

from ..core.analysis import solve_reference_point
from ..core.export import format_value
from .common import (
    DEFAULT_MODEL,
    error_boundary,
    get_state,
    load_model,
    optional_precision,
    parse_point,
)


def cmd_saddle(
    ctx: typer.Context,
    model_path: Path = typer.Option(DEFAULT_MODEL, "--model", "-m", help="Model JSON file"),
    start: Optional[str] = typer.Option(None, "--start", help="Starting point (default: origin)"),
    max_iter: Optional[int] = typer.Option(None, "--max-iter", help="Newton iterations"),
    tol: Optional[float] = typer.Option(None, "--tol", help="Residual tolerance"),
    precision: Optional[int] = typer.Option(None, "--precision", help="Decimal places"),
) -> None:
    """Find p* with ξ(p*) = 0 and report H(p*)."""
    state = get_state(ctx)
    solver = state.settings.solver
    with error_boundary("saddle"):
        digits = optional_precision(precision, state.settings)
        model = load_model(model_path)
        origin = None if start is None else parse_point(start, model.dim, "start")

        reference = solve_reference_point(
            model,
            start=origin,
            max_iter=solver.max_iter if max_iter is None else max_iter,
            tol=solver.tol if tol is None else tol,
            max_halvings=solver.max_halvings,
            fd_step=solver.fd_step,
            metrics=state.metrics,
        )

        coords = ", ".join(format_value(c, digits) for c in reference.point)
        typer.echo(f"p* = ({coords})")
        typer.echo(f"residual = {reference.residual_norm:.3e}")
        typer.echo(f"iterations = {reference.iterations}")
        typer.echo(f"H = {format_value(reference.h_value, digits)}")
