"""
CSV and SVG emission for dependence maps.

- CSV: UTF-8, comma separated, header row, LF line endings
- SVG: static heatmap, blue-white-red scale pinned to [-1, 1], no timestamps
"""

from pathlib import Path
from typing import List, Optional, Sequence, Union

import pandas as pd
import structlog
from matplotlib import rc_context
from matplotlib.figure import Figure

from ..models.grid import MapResult
from .exceptions import GridSpecError

logger = structlog.get_logger(__name__)

PathLike = Union[str, Path]

SVG_HASH_SALT = "localdep"
COLOR_MAP = "bwr"
PLOT_DPI = 72
MARGIN_LEFT = 90
MARGIN_BOTTOM = 60
MARGIN_TOP = 40
COLORBAR_GAP = 20
COLORBAR_WIDTH = 20
MARGIN_RIGHT = 70


def format_value(value: float, precision: int = 4) -> str:
    """Fixed-point text without a negative zero."""
    text = f"{value:.{precision}f}"
    if text.startswith("-") and float(text) == 0.0:
        text = text[1:]
    return text


def format_coordinate(value: float) -> str:
    """Shortest round-trip text for a grid coordinate (linspace noise removed)."""
    return repr(float(round(float(value), 12)) + 0.0)


def map_frame(
    result: MapResult, axis_names: Sequence[str], precision: int = 4
) -> pd.DataFrame:
    """One row per node, row-major, columns: swept axis names then H."""
    swept_names = [axis_names[r.axis] for r in result.grid.swept]
    records: List[List[str]] = []
    for coords, value in result.rows():
        records.append([format_coordinate(c) for c in coords] + [format_value(value, precision)])
    return pd.DataFrame.from_records(records, columns=swept_names + ["H"])


def write_csv(
    result: MapResult,
    path: PathLike,
    axis_names: Sequence[str],
    precision: int = 4,
) -> Path:
    target = Path(path)
    frame = map_frame(result, axis_names, precision)
    frame.to_csv(target, index=False, encoding="utf-8", lineterminator="\n")
    logger.info("CSV written", path=str(target), rows=len(frame))
    return target


def read_csv(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path)


def write_svg(
    result: MapResult,
    path: PathLike,
    axis_names: Sequence[str],
    plot_size: int = 640,
    title: Optional[str] = None,
) -> Path:
    """Heatmap of a two-axis map; the plot area is plot_size × plot_size px."""
    if len(result.grid.swept) != 2:
        raise GridSpecError(
            "SVG output needs exactly two swept axes",
            {"swept": [r.axis for r in result.grid.swept]},
        )
    first, second = result.grid.swept
    width = MARGIN_LEFT + plot_size + COLORBAR_GAP + COLORBAR_WIDTH + MARGIN_RIGHT
    height = MARGIN_BOTTOM + plot_size + MARGIN_TOP

    target = Path(path)
    with rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "path"}):
        fig = Figure(figsize=(width / PLOT_DPI, height / PLOT_DPI), dpi=PLOT_DPI)
        ax = fig.add_axes(
            (MARGIN_LEFT / width, MARGIN_BOTTOM / height, plot_size / width, plot_size / height)
        )
        cax = fig.add_axes(
            (
                (MARGIN_LEFT + plot_size + COLORBAR_GAP) / width,
                MARGIN_BOTTOM / height,
                COLORBAR_WIDTH / width,
                plot_size / height,
            )
        )
        mesh = ax.pcolormesh(
            first.nodes(),
            second.nodes(),
            result.values.T,
            cmap=COLOR_MAP,
            vmin=-1.0,
            vmax=1.0,
            shading="nearest",
            rasterized=result.grid.size > 10_000,
        )
        ax.set_xlabel(axis_names[first.axis])
        ax.set_ylabel(axis_names[second.axis])
        if title:
            ax.set_title(title)
        colorbar = fig.colorbar(mesh, cax=cax)
        colorbar.set_label("H")
        fig.savefig(target, format="svg", metadata={"Date": None})

    logger.info("SVG written", path=str(target), nodes=result.grid.size)
    return target
