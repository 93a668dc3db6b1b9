"""
`localdep table`: reproduce tables of (point, f, H) from a points file.

The points file is a CSV with one column per coordinate (x, y, z or
x1..xn). Optional `f_ref` and `H_ref` columns add reference values
and a per-row ok/FAIL flag at TABLE_TOL.
"""

from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
import typer

from ..core.exceptions import ValidationError
from ..core.export import format_value
from ..core.localdep import Model, backend_for, evaluate
from .common import (
    DEFAULT_MODEL,
    DEFAULT_POINTS,
    Backend,
    axis_names,
    error_boundary,
    get_state,
    load_model,
    optional_precision,
    resolve_backend,
)

TABLE_TOL = 5e-4
REFERENCE_COLUMNS = ("f_ref", "H_ref")


def read_points(path: Path, names: List[str]) -> pd.DataFrame:
    """Load and check a points file."""
    try:
        frame = pd.read_csv(path, comment="#", skipinitialspace=True)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise ValidationError(
            f"Cannot read points file '{path}': {exc}",
            details={"field": "points", "path": str(path)},
        ) from exc

    missing = [name for name in names if name not in frame.columns]
    if missing:
        raise ValidationError(
            f"Points file is missing column(s) {', '.join(missing)}",
            details={"field": "points", "missing": missing},
        )
    wanted = names + [c for c in REFERENCE_COLUMNS if c in frame.columns]
    try:
        numeric = frame[wanted].apply(pd.to_numeric, errors="raise")
    except (ValueError, TypeError) as exc:
        raise ValidationError(
            f"Points file has a non-numeric entry: {exc}",
            details={"field": "points"},
        ) from exc
    if numeric[names].isna().to_numpy().any() or not np.all(np.isfinite(numeric[names].to_numpy())):
        raise ValidationError(
            "Points file has an empty or non-finite coordinate",
            details={"field": "points"},
        )
    return numeric


def build_table(model: Model, points: pd.DataFrame, names: List[str], precision: int) -> pd.DataFrame:
    """Formatted table with computed f and H plus reference columns."""
    backend = backend_for(model)
    rows = []
    for record in points.to_dict(orient="records"):
        coords = [float(record[name]) for name in names]
        h_value = evaluate(model, coords).h_value
        density = backend.pdf(coords)
        row = {name: format_value(record[name], precision) for name in names}
        row["f"] = format_value(density, precision)
        row["H"] = format_value(h_value, precision)

        checks = []
        for column, computed in (("f_ref", density), ("H_ref", h_value)):
            if column not in points.columns:
                continue
            reference = record[column]
            if pd.isna(reference):
                row[column] = "-"
                continue
            row[column] = format_value(reference, precision)
            checks.append(abs(computed - reference) <= TABLE_TOL)
        if "H_ref" in points.columns or "f_ref" in points.columns:
            row["ok"] = ("ok" if all(checks) else "FAIL") if checks else "-"
        rows.append(row)
    return pd.DataFrame(rows)


def cmd_table(
    ctx: typer.Context,
    points_path: Path = typer.Option(DEFAULT_POINTS, "--points", help="Points CSV file"),
    model_path: Path = typer.Option(DEFAULT_MODEL, "--model", "-m", help="Model JSON file"),
    backend: Backend = typer.Option(Backend.GAUSSIAN, "--backend", help="Evaluation backend"),
    precision: Optional[int] = typer.Option(None, "--precision", help="Decimal places"),
) -> None:
    """Print f and H for every row of a points file."""
    state = get_state(ctx)
    with error_boundary("table"):
        digits = optional_precision(precision, state.settings)
        gaussian = load_model(model_path)
        names = list(axis_names(gaussian.dim))
        points = read_points(points_path, names)
        model = resolve_backend(gaussian, backend, state.settings)

        table = build_table(model, points, names, digits)
        state.metrics.record_evaluation("table", len(table))
        if table.empty:
            typer.echo("(no points)")
            return
        typer.echo(table.to_string(index=False))
        if "ok" in table.columns:
            failed = int((table["ok"] == "FAIL").sum())
            typer.echo(f"\n{len(table) - failed}/{len(table)} rows within {TABLE_TOL:g}")
