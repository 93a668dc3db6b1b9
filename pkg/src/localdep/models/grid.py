"""
Grid specifications and dependence-map results.

- AxisRange: lo < hi, count >= 2, linspace node placement (endpoints included)
- GridSpec: fixed and swept axes partition the model's coordinates
- MapResult: H values over the swept nodes, row-major
"""

from dataclasses import dataclass
from typing import Dict, Iterator, List, Tuple

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..core.exceptions import GridSpecError

# |H| <= 1 holds for two variables only. From three on, strongly correlated
# Gaussians exceed it (equicorrelation 0.9 at (-1, -1, -1) gives 1.304), so
# nodes past the bound are recorded in MapResult.bound_violations, never raised.
BOUND_TOL = 1e-9


class AxisRange(BaseModel):
    """Swept axis: ``count`` evenly spaced nodes on [lo, hi]."""

    model_config = ConfigDict(frozen=True)

    axis: int = Field(ge=0, description="Zero-based coordinate index")
    lo: float = Field(description="First node")
    hi: float = Field(description="Last node")
    count: int = Field(description="Number of nodes")

    @model_validator(mode="after")
    def validate_range(self) -> "AxisRange":
        """Reject empty or inverted ranges."""
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise GridSpecError("Range bounds must be finite", {"axis": self.axis})
        if self.lo >= self.hi:
            raise GridSpecError(
                f"Range for axis {self.axis} needs lo < hi",
                {"axis": self.axis, "lo": self.lo, "hi": self.hi},
            )
        if self.count < 2:
            raise GridSpecError(
                f"Range for axis {self.axis} needs count >= 2",
                {"axis": self.axis, "count": self.count},
            )
        return self

    def nodes(self) -> NDArray[np.float64]:
        return np.linspace(self.lo, self.hi, self.count)


class GridSpec(BaseModel):
    """Axis-aligned evaluation grid."""

    model_config = ConfigDict(frozen=True)

    dim: int = Field(ge=2, description="Model dimension")
    fixed: Dict[int, float] = Field(default_factory=dict, description="Axis -> value")
    swept: Tuple[AxisRange, ...] = Field(description="Swept axes, outermost first")

    @field_validator("fixed")
    def validate_fixed(cls, v: Dict[int, float]) -> Dict[int, float]:
        for axis, value in v.items():
            if not np.isfinite(value):
                raise GridSpecError(f"Fixed value for axis {axis} is not finite")
        return v

    @model_validator(mode="after")
    def validate_partition(self) -> "GridSpec":
        """Fixed and swept axes must partition {0..dim-1}."""
        if not self.swept:
            raise GridSpecError("At least one swept axis is required")
        swept_axes = [r.axis for r in self.swept]
        if len(set(swept_axes)) != len(swept_axes):
            raise GridSpecError("Axis swept more than once", {"swept": swept_axes})
        overlap = set(swept_axes) & set(self.fixed)
        if overlap:
            raise GridSpecError(
                "Axis both fixed and swept", {"axes": sorted(overlap)}
            )
        covered = set(swept_axes) | set(self.fixed)
        if covered != set(range(self.dim)):
            raise GridSpecError(
                "Fixed and swept axes must cover every coordinate exactly once",
                {
                    "missing": sorted(set(range(self.dim)) - covered),
                    "unknown": sorted(covered - set(range(self.dim))),
                },
            )
        return self

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(r.count for r in self.swept)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def axis_nodes(self) -> List[NDArray[np.float64]]:
        return [r.nodes() for r in self.swept]

    def points(self) -> NDArray[np.float64]:
        """All grid points, row-major over the swept axes, shape (size, dim)."""
        mesh = np.meshgrid(*self.axis_nodes(), indexing="ij")
        points = np.empty((self.size, self.dim), dtype=float)
        for axis, value in self.fixed.items():
            points[:, axis] = value
        for r, coords in zip(self.swept, mesh):
            points[:, r.axis] = coords.reshape(-1)
        return points


@dataclass(frozen=True)
class MapResult:
    """H values over a grid; ``values`` has shape ``grid.shape``."""

    grid: GridSpec
    values: NDArray[np.float64]
    min: float
    max: float
    argmin: Tuple[float, ...]
    argmax: Tuple[float, ...]
    bound_violations: Tuple[int, ...] = ()

    @classmethod
    def from_values(cls, grid: GridSpec, flat: NDArray[np.float64]) -> "MapResult":
        values = np.asarray(flat, dtype=float).reshape(grid.shape)
        values.setflags(write=False)
        points = grid.points()
        lo, hi = int(np.argmin(flat)), int(np.argmax(flat))
        violations = tuple(
            int(i) for i in np.flatnonzero(np.abs(flat) > 1.0 + BOUND_TOL)
        )
        return cls(
            grid=grid,
            values=values,
            min=float(flat[lo]),
            max=float(flat[hi]),
            argmin=tuple(float(c) for c in points[lo]),
            argmax=tuple(float(c) for c in points[hi]),
            bound_violations=violations,
        )

    def rows(self) -> Iterator[Tuple[Tuple[float, ...], float]]:
        """Yield (swept coordinates, H) row-major."""
        points = self.grid.points()
        swept_axes = [r.axis for r in self.grid.swept]
        for point, value in zip(points, self.values.reshape(-1)):
            yield tuple(float(point[a]) for a in swept_axes), float(value)
