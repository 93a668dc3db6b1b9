"""
Probabilistic model types and covariance validation.

- MeanVector, CovarianceMatrix, GaussianModel: immutable pydantic models
- DensityModel: arbitrary joint density on a truncated box (library API only)
- Point: an evaluation point in model units
"""

import math
from dataclasses import dataclass
from typing import Any, Callable, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import linalg

from ..core.exceptions import (
    DensityModelError,
    DimensionMismatchError,
    DimensionTooLargeError,
    NonFiniteEntryError,
    NotPositiveDefiniteError,
    NotSymmetricError,
)

SYMMETRY_TOL = 1e-12
PIVOT_RATIO = 1e-10
MAX_GAUSSIAN_DIM = 16
MAX_DENSITY_DIM = 4

DensityFunction = Callable[[NDArray[np.float64]], NDArray[np.float64]]


def _finite_tuple(values: Any, field: str) -> Tuple[float, ...]:
    array = np.asarray(values, dtype=float)
    if array.ndim != 1:
        raise DimensionMismatchError(field, "1-D vector", list(array.shape))
    if not np.all(np.isfinite(array)):
        raise NonFiniteEntryError(field)
    return tuple(float(v) for v in array)


def _smallest_pivot(matrix: NDArray[np.float64]) -> float:
    """Smallest Cholesky pivot L_kk² as a ratio of leading principal minors."""
    pivots = []
    previous = 1.0
    for k in range(1, matrix.shape[0] + 1):
        minor = float(np.linalg.det(matrix[:k, :k]))
        pivots.append(minor / previous if previous != 0.0 else -math.inf)
        previous = minor
    return min(pivots)


def _check_covariance(entries: Any) -> NDArray[np.float64]:
    """Run the SPD checks and return the symmetrized matrix."""
    matrix = np.asarray(entries, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatchError("cov", "square matrix", list(matrix.shape))
    if matrix.shape[0] < 2:
        raise DimensionMismatchError("cov", "n >= 2", matrix.shape[0])
    if not np.all(np.isfinite(matrix)):
        raise NonFiniteEntryError("cov")

    scale = float(np.max(np.abs(matrix)))
    asymmetry = float(np.max(np.abs(matrix - matrix.T))) / scale if scale > 0 else 0.0
    if asymmetry > SYMMETRY_TOL:
        raise NotSymmetricError(asymmetry)
    matrix = (matrix + matrix.T) / 2.0

    diagonal = np.diag(matrix)
    threshold = PIVOT_RATIO * float(np.max(diagonal)) if np.max(diagonal) > 0 else 0.0
    if np.any(diagonal <= 0):
        raise NotPositiveDefiniteError(float(np.min(diagonal)), threshold)

    try:
        factor = linalg.cholesky(matrix, lower=True)
    except linalg.LinAlgError:
        raise NotPositiveDefiniteError(_smallest_pivot(matrix), threshold) from None

    pivot = float(np.min(np.diag(factor)) ** 2)
    if pivot <= threshold:
        raise NotPositiveDefiniteError(pivot, threshold)
    return matrix


class MeanVector(BaseModel):
    """Mean vector of a model, finite entries, n >= 2."""

    model_config = ConfigDict(frozen=True)

    values: Tuple[float, ...] = Field(description="Mean of each coordinate")

    @field_validator("values", mode="before")
    def validate_values(cls, v: Any) -> Tuple[float, ...]:
        """Entries must be finite; at least two coordinates."""
        values = _finite_tuple(v, "mean")
        if len(values) < 2:
            raise DimensionMismatchError("mean", "n >= 2", len(values))
        return values

    @property
    def dim(self) -> int:
        return len(self.values)

    def as_array(self) -> NDArray[np.float64]:
        return np.asarray(self.values, dtype=float)


class CovarianceMatrix(BaseModel):
    """
    Symmetric, strictly positive definite covariance matrix.

    Input that is symmetric to within 1e-12 relative is symmetrized;
    anything further off is rejected.
    """

    model_config = ConfigDict(frozen=True)

    entries: Tuple[Tuple[float, ...], ...] = Field(description="Row-major entries")

    @field_validator("entries", mode="before")
    def validate_entries(cls, v: Any) -> Tuple[Tuple[float, ...], ...]:
        """Accept only SPD matrices."""
        matrix = _check_covariance(v)
        return tuple(tuple(float(x) for x in row) for row in matrix)

    @property
    def dim(self) -> int:
        return len(self.entries)

    def as_array(self) -> NDArray[np.float64]:
        return np.asarray(self.entries, dtype=float)

    def stddevs(self) -> NDArray[np.float64]:
        return np.sqrt(np.diag(self.as_array()))

    def correlations(self) -> NDArray[np.float64]:
        """Pairwise correlations ρ_ij = σ_ij / (σ_i σ_j), unit diagonal."""
        sd = self.stddevs()
        corr = self.as_array() / np.outer(sd, sd)
        np.fill_diagonal(corr, 1.0)
        return corr

    def correlation(self, i: int, j: int) -> float:
        return float(self.correlations()[i, j])

    def cholesky(self) -> NDArray[np.float64]:
        return linalg.cholesky(self.as_array(), lower=True)

    def determinant(self) -> float:
        """General determinant from the squared Cholesky pivots."""
        return float(np.prod(np.diag(self.cholesky()) ** 2))


def validate_covariance(entries: Any) -> CovarianceMatrix:
    """Validate a square matrix and return it as a CovarianceMatrix."""
    return CovarianceMatrix(entries=entries)


def determinant3(cov: CovarianceMatrix) -> float:
    """Cofactor-expansion determinant of a 3x3 covariance matrix."""
    if cov.dim != 3:
        raise DimensionMismatchError("cov", 3, cov.dim)
    (s11, s12, s13), (_, s22, s23), (_, _, s33) = cov.entries
    return (
        s11 * s22 * s33
        + 2.0 * s12 * s23 * s13
        - s11 * s23**2
        - s22 * s13**2
        - s33 * s12**2
    )


class GaussianModel(BaseModel):
    """n-variate normal model N(mean, cov)."""

    model_config = ConfigDict(frozen=True)

    mean: MeanVector = Field(description="Mean vector")
    cov: CovarianceMatrix = Field(description="Covariance matrix")

    @model_validator(mode="after")
    def validate_dimensions(self) -> "GaussianModel":
        """Mean and covariance must agree; n is capped for the subset expansion."""
        if self.mean.dim != self.cov.dim:
            raise DimensionMismatchError("cov", self.mean.dim, self.cov.dim)
        if self.cov.dim > MAX_GAUSSIAN_DIM:
            raise DimensionTooLargeError(self.cov.dim, MAX_GAUSSIAN_DIM)
        return self

    @property
    def dim(self) -> int:
        return self.mean.dim

    @classmethod
    def from_arrays(cls, mean: Sequence[float], cov: Any) -> "GaussianModel":
        return cls(mean=MeanVector(values=mean), cov=CovarianceMatrix(entries=cov))

    @classmethod
    def bivariate(
        cls,
        rho: float,
        sigma_x: float = 1.0,
        sigma_y: float = 1.0,
        mean: Tuple[float, float] = (0.0, 0.0),
    ) -> "GaussianModel":
        """Bivariate normal with correlation rho."""
        covariance = rho * sigma_x * sigma_y
        return cls.from_arrays(
            mean, [[sigma_x**2, covariance], [covariance, sigma_y**2]]
        )


class Point(BaseModel):
    """Evaluation point."""

    model_config = ConfigDict(frozen=True)

    coords: Tuple[float, ...] = Field(description="Coordinates in model units")

    @field_validator("coords", mode="before")
    def validate_coords(cls, v: Any) -> Tuple[float, ...]:
        return _finite_tuple(v, "point")

    @property
    def dim(self) -> int:
        return len(self.coords)

    def as_array(self) -> NDArray[np.float64]:
        return np.asarray(self.coords, dtype=float)


def as_point(value: Any, dim: int) -> NDArray[np.float64]:
    """Coerce a Point or sequence to a float array, checking its dimension."""
    point = value if isinstance(value, Point) else Point(coords=value)
    if point.dim != dim:
        raise DimensionMismatchError("point", dim, point.dim)
    return point.as_array()


@dataclass(frozen=True, eq=False)
class DensityModel:
    """
    Arbitrary joint density on a truncated box.

    ``density`` is vectorized: an (m, dim) array of points goes in and an
    (m,) array of nonnegative values comes out. The mass over the box is
    checked against ``tol`` on construction.
    """

    dim: int
    density: DensityFunction
    support_box: Tuple[Tuple[float, float], ...]
    quad_order: int = 64
    tol: float = 1e-8
    name: Optional[str] = None

    def __post_init__(self) -> None:
        if self.dim < 2:
            raise DensityModelError("Density models need dim >= 2", {"dim": self.dim})
        if self.dim > MAX_DENSITY_DIM:
            raise DimensionTooLargeError(self.dim, MAX_DENSITY_DIM, backend="quadrature")
        if len(self.support_box) != self.dim:
            raise DimensionMismatchError("support_box", self.dim, len(self.support_box))
        box = tuple((float(lo), float(hi)) for lo, hi in self.support_box)
        for axis, (lo, hi) in enumerate(box):
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
                raise DensityModelError(
                    f"Support interval for axis {axis} must satisfy lo < hi",
                    {"axis": axis, "lo": lo, "hi": hi},
                )
        object.__setattr__(self, "support_box", box)
        if self.tol <= 0:
            raise DensityModelError("tol must be positive", {"tol": self.tol})

        # Imported here: the quadrature backend depends on this module.
        from ..core.quadrature_backend import check_normalization

        check_normalization(self)

    def lower(self) -> NDArray[np.float64]:
        return np.asarray([lo for lo, _ in self.support_box])

    def upper(self) -> NDArray[np.float64]:
        return np.asarray([hi for _, hi in self.support_box])
