"""
`localdep eval`: H at a single point with its decomposition.
"""

from pathlib import Path
from typing import Optional

import typer

from ..core.export import format_value
from ..core.localdep import backend_for, evaluate
from .common import (
    DEFAULT_MODEL,
    Backend,
    axis_names,
    error_boundary,
    get_state,
    load_model,
    optional_precision,
    parse_point,
    resolve_backend,
    subset_label,
)


def cmd_eval(
    ctx: typer.Context,
    point: str = typer.Option(..., "--point", "-p", help="Coordinates, e.g. 0,0,1"),
    model_path: Path = typer.Option(DEFAULT_MODEL, "--model", "-m", help="Model JSON file"),
    backend: Backend = typer.Option(Backend.GAUSSIAN, "--backend", help="Evaluation backend"),
    precision: Optional[int] = typer.Option(None, "--precision", help="Decimal places"),
) -> None:
    """Evaluate the local dependence function at one point."""
    state = get_state(ctx)
    with error_boundary("eval"):
        digits = optional_precision(precision, state.settings)
        gaussian = load_model(model_path)
        coords = parse_point(point, gaussian.dim)
        model = resolve_backend(gaussian, backend, state.settings)

        result = evaluate(model, coords)
        density = backend_for(model).pdf(coords)
        state.metrics.record_evaluation("eval")

        names = axis_names(gaussian.dim)
        typer.echo(f"H = {format_value(result.h_value, digits)}")
        typer.echo(f"f = {format_value(density, digits)}")
        for name, phi, xi in zip(names, result.phi.phi, result.phi.xi):
            typer.echo(
                f"phi[{name}] = {format_value(phi, digits)}  xi[{name}] = {format_value(xi, digits)}"
            )
        for subset, rho in result.rho_terms.items():
            typer.echo(f"rho[{subset_label(subset, names)}] = {format_value(rho, digits)}")
        typer.echo(f"numerator = {format_value(result.numerator, digits)}")
        typer.echo(f"denominator = {format_value(result.denominator, digits)}")
