"""
`localdep figures`: regenerate the standard set of dependence maps.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import typer

from ..core.analysis import sweep
from ..core.exceptions import ValidationError
from ..models.grid import AxisRange, GridSpec
from ..models.model_core import GaussianModel
from .common import DATA_DIR, axis_names, error_boundary, get_state, load_model
from .grid import write_map_files


@dataclass(frozen=True)
class FigureSpec:
    """One map: which model, what is fixed, what is swept."""

    name: str
    model: str
    fixed: Dict[int, float]
    swept: Tuple[Tuple[int, float, float, int], ...]
    title: str


def _maps() -> List[FigureSpec]:
    figures: List[FigureSpec] = []
    for rho in (0.5, -0.5, 0.95, -0.95):
        label = f"{'m' if rho < 0 else 'p'}{abs(rho) * 100:03.0f}"
        figures.append(
            FigureSpec(
                name=f"bivariate_rho_{label}",
                model=f"bivariate:{rho}",
                fixed={},
                swept=((0, -3.0, 3.0, 61), (1, -3.0, 3.0, 61)),
                title=f"H(x, y), rho = {rho}",
            )
        )
    for fixed_axis, swept_axes in ((0, (1, 2)), (1, (0, 2))):
        name = "xyz"[fixed_axis]
        for value in (-2.0, 0.0, 2.0):
            label = f"{'m' if value < 0 else 'p'}{abs(value):.0f}"
            figures.append(
                FigureSpec(
                    name=f"trivariate_{name}_{label}",
                    model="reference_model.json",
                    fixed={fixed_axis: value},
                    swept=tuple((a, -4.0, 4.0, 81) for a in swept_axes),
                    title=f"H(x, y, z), {name} = {value:g}",
                )
            )
        figures.append(
            FigureSpec(
                name=f"trivariate_{name}_p0_wide",
                model="reference_model.json",
                fixed={fixed_axis: 0.0},
                swept=tuple((a, -100.0, 100.0, 201) for a in swept_axes),
                title=f"H(x, y, z), {name} = 0, wide range",
            )
        )
    for fixed_axis in range(3):
        name = "xyz"[fixed_axis]
        figures.append(
            FigureSpec(
                name=f"strong_{name}_p0",
                model="strong_model.json",
                fixed={fixed_axis: 0.0},
                swept=tuple((a, -4.0, 4.0, 81) for a in range(3) if a != fixed_axis),
                title=f"H(x, y, z), stronger correlations, {name} = 0",
            )
        )
    return figures


FIGURES = _maps()


def _load(source: str) -> GaussianModel:
    if source.startswith("bivariate:"):
        return GaussianModel.bivariate(float(source.split(":", 1)[1]))
    return load_model(DATA_DIR / source)


def cmd_figures(
    ctx: typer.Context,
    out_dir: Path = typer.Option(Path("figures"), "--out", "-o", help="Output directory"),
    only: Optional[List[str]] = typer.Option(None, "--only", help="Figure name (repeatable)"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Worker threads (0 = all cores)"),
    list_only: bool = typer.Option(False, "--list", help="List figure names and exit"),
) -> None:
    """Write CSV and SVG for each standard map."""
    state = get_state(ctx)
    settings = state.settings
    with error_boundary("figures"):
        if list_only:
            for figure in FIGURES:
                typer.echo(figure.name)
            return

        selected = FIGURES
        if only:
            known = {f.name for f in FIGURES}
            unknown = sorted(set(only) - known)
            if unknown:
                raise ValidationError(
                    f"Unknown figure(s) {', '.join(unknown)}",
                    details={"field": "only", "unknown": unknown},
                )
            selected = [f for f in FIGURES if f.name in set(only)]

        out_dir.mkdir(parents=True, exist_ok=True)
        for figure in selected:
            model = _load(figure.model)
            spec = GridSpec(
                dim=model.dim,
                fixed=figure.fixed,
                swept=tuple(
                    AxisRange(axis=a, lo=lo, hi=hi, count=n) for a, lo, hi, n in figure.swept
                ),
            )
            result = sweep(
                model,
                spec,
                workers=settings.grid.workers if workers is None else workers,
                metrics=state.metrics,
            )
            write_map_files(
                result,
                axis_names(model.dim),
                out_dir / f"{figure.name}.csv",
                out_dir / f"{figure.name}.svg",
                settings.output.precision,
                settings.output.plot_size,
                figure.title,
            )
            typer.echo(f"{figure.name}: min {result.min:+.4f} max {result.max:+.4f}")
