"""
Local dependence functions.

H at a point is built from two ingredients:
- φ_i = (μ_i − E(X_i | all other coordinates at the point)) / σ_i
- ρ_S, the standardized mixed central moment of every subset S with |S| >= 2

and is evaluated as

    H = Σ_{S, |S| != 1} ρ_S ∏_{i∉S} φ_i / ∏_i √(1 + φ_i²),   ρ_∅ = 1.

Gaussian models use the closed-form backend, DensityModels the quadrature
oracle. The direct B/√Q integrals are kept as an independent check.
"""

import math
from functools import lru_cache
from itertools import combinations
from typing import Any, Dict, Iterable, List, Mapping, Optional, Protocol, Sequence, Tuple, Union

import numpy as np
import structlog
from numpy.typing import NDArray

from ..models.model_core import MAX_GAUSSIAN_DIM, DensityModel, GaussianModel, as_point
from ..models.results import DependenceResult, PhiVector, Subset
from .exceptions import (
    DimensionMismatchError,
    DimensionTooLargeError,
    MissingRhoTermError,
    NonPositiveDensityInStencilError,
    ValidationError,
)
from .gaussian_backend import backend_for as gaussian_backend_for
from .quadrature_backend import AxisFunction, QuadratureBackend, quadrature_backend_for

logger = structlog.get_logger(__name__)

Model = Union[GaussianModel, DensityModel]

HW_STEP = 1e-4


class DependenceBackend(Protocol):
    """What the dependence core needs from a backend."""

    dim: int

    @property
    def mean(self) -> NDArray[np.float64]: ...

    def sigmas(self) -> NDArray[np.float64]: ...

    def xi(self, point: NDArray[np.float64]) -> NDArray[np.float64]: ...

    def mixed_central_moment(self, subset: Iterable[int]) -> float: ...

    def pdf(self, point: Any) -> float: ...


def backend_for(model: Model) -> DependenceBackend:
    """Closed form for Gaussian models, quadrature for everything else."""
    if isinstance(model, GaussianModel):
        return gaussian_backend_for(model)
    if isinstance(model, DensityModel):
        return quadrature_backend_for(model)
    raise ValidationError(
        f"Unsupported model type {type(model).__name__}",
        error_code="unsupported_model",
    )


@lru_cache(maxsize=None)
def expansion_subsets(dim: int) -> Tuple[Subset, ...]:
    """Subsets with |S| >= 2, ordered by size then lexicographically."""
    return tuple(
        subset
        for size in range(2, dim + 1)
        for subset in combinations(range(dim), size)
    )


@lru_cache(maxsize=64)
def _rho_table(model: Model) -> Tuple[Tuple[Subset, float], ...]:
    backend = backend_for(model)
    return tuple(
        (subset, backend.mixed_central_moment(subset))
        for subset in expansion_subsets(backend.dim)
    )


def rho_terms(model: Model) -> Dict[Subset, float]:
    """ρ_S for every subset with |S| >= 2 (point independent, cached per model)."""
    return dict(_rho_table(model))


def phi_at(model: Model, point: Any) -> PhiVector:
    """φ and ξ at ``point``."""
    backend = backend_for(model)
    coords = as_point(point, backend.dim)
    xi = backend.xi(coords)
    phi = xi / backend.sigmas()
    return PhiVector(
        phi=tuple(float(v) for v in phi),
        xi=tuple(float(v) for v in xi),
    )


def _denominator(phi: Sequence[float]) -> float:
    return float(np.prod(np.sqrt(1.0 + np.square(phi))))


def _expansion_numerator(terms: Mapping[Subset, float], phi: Sequence[float]) -> float:
    dim = len(phi)
    numerator = float(np.prod(phi))
    for subset in expansion_subsets(dim):
        try:
            rho = terms[subset]
        except KeyError:
            raise MissingRhoTermError(subset) from None
        product = 1.0
        for i in range(dim):
            if i not in subset:
                product *= phi[i]
        numerator += rho * product
    return numerator


def H_bivariate(model: Model, point: Any) -> DependenceResult:
    """(ρ + φ_Xφ_Y) / (√(1+φ_Y²)√(1+φ_X²))."""
    if model_dim(model) != 2:
        raise DimensionMismatchError("model", 2, model_dim(model))
    phi = phi_at(model, point)
    terms = rho_terms(model)
    fx, fy = phi.phi
    numerator = terms[(0, 1)] + fx * fy
    denominator = math.sqrt(1.0 + fy * fy) * math.sqrt(1.0 + fx * fx)
    return DependenceResult(numerator / denominator, numerator, denominator, phi, terms)


def H_trivariate(model: Model, point: Any) -> DependenceResult:
    """(ρ_XYZ + ρ_XY φ_Z + ρ_YZ φ_X + ρ_XZ φ_Y + φ_Xφ_Yφ_Z) / ∏√(1+φ²)."""
    if model_dim(model) != 3:
        raise DimensionMismatchError("model", 3, model_dim(model))
    phi = phi_at(model, point)
    terms = rho_terms(model)
    fx, fy, fz = phi.phi
    numerator = (
        terms[(0, 1, 2)]
        + terms[(0, 1)] * fz
        + terms[(1, 2)] * fx
        + terms[(0, 2)] * fy
        + fx * fy * fz
    )
    denominator = (
        math.sqrt(1.0 + fx * fx) * math.sqrt(1.0 + fy * fy) * math.sqrt(1.0 + fz * fz)
    )
    return DependenceResult(numerator / denominator, numerator, denominator, phi, terms)


def H_nvariate(model: Model, point: Any) -> DependenceResult:
    """Subset expansion for any 2 <= n <= 16 (n <= 4 for density models)."""
    dim = model_dim(model)
    if isinstance(model, GaussianModel) and dim > MAX_GAUSSIAN_DIM:
        raise DimensionTooLargeError(dim, MAX_GAUSSIAN_DIM)
    phi = phi_at(model, point)
    terms = rho_terms(model)
    numerator = _expansion_numerator(terms, phi.phi)
    denominator = _denominator(phi.phi)
    return DependenceResult(numerator / denominator, numerator, denominator, phi, terms)


def evaluate(model: Model, point: Any) -> DependenceResult:
    """Dispatch on the model dimension."""
    dim = model_dim(model)
    if dim == 2:
        return H_bivariate(model, point)
    if dim == 3:
        return H_trivariate(model, point)
    return H_nvariate(model, point)


def model_dim(model: Model) -> int:
    return model.dim


def _surrogate_order(t_values: Sequence[float]) -> Tuple[float, ...]:
    """Map surrogate arguments to per-variable φ slots.

    For three variables the arguments are (t, s, w) with t on ρ_XY, s on
    ρ_YZ and w on ρ_XZ, so t sits in the Z slot, s in X and w in Y.
    Otherwise arguments are indexed by variable.
    """
    values = tuple(float(v) for v in t_values)
    if len(values) == 3:
        t, s, w = values
        return (s, w, t)
    return values


def h_surrogate(rho_terms: Mapping[Subset, float], t_values: Sequence[float]) -> float:
    """h(t, s[, w, ...]) for the given mixed-moment coefficients."""
    if len(t_values) < 2:
        raise DimensionMismatchError("t_values", ">= 2", len(t_values))
    slots = _surrogate_order(t_values)
    terms = {tuple(sorted(k)): float(v) for k, v in rho_terms.items()}
    return _expansion_numerator(terms, slots) / _denominator(slots)


def bivariate_closed_form(rho: float, x: float, y: float) -> float:
    """Standard bivariate normal: (ρ + ρ²xy) / (√(1+ρ²y²)√(1+ρ²x²))."""
    r2 = rho * rho
    return (rho + r2 * x * y) / (math.sqrt(1.0 + r2 * y * y) * math.sqrt(1.0 + r2 * x * x))


def holland_wang_H1(
    density: Any, point: Sequence[float], step: float = HW_STEP
) -> float:
    """∂² log f / ∂x∂y by central differences, h_i = step·(1 + |p_i|)."""
    x, y = as_point(point, 2)
    hx = step * (1.0 + abs(x))
    hy = step * (1.0 + abs(y))
    stencil = np.array(
        [[x + hx, y + hy], [x + hx, y - hy], [x - hx, y + hy], [x - hx, y - hy]]
    )
    values = np.asarray(density(stencil), dtype=float).reshape(-1)
    if values.shape != (4,) or not np.all(values > 0):
        raise NonPositiveDensityInStencilError((x, y))
    logs = np.log(values)
    return float((logs[0] - logs[1] - logs[2] + logs[3]) / (4.0 * hx * hy))


def holland_wang_gaussian(rho: float, sigma_x: float = 1.0, sigma_y: float = 1.0) -> float:
    """Closed-form H₁ of a bivariate normal: ρ / ((1−ρ²) σ_x σ_y)."""
    return rho / ((1.0 - rho * rho) * sigma_x * sigma_y)


# Direct oracles: integrate the defining expectations without the expansion.


def _direct_backend(model: DensityModel) -> QuadratureBackend:
    if not isinstance(model, DensityModel):
        raise ValidationError(
            "Direct oracles need a DensityModel", error_code="unsupported_model"
        )
    return quadrature_backend_for(model)


def _conditional_means(backend: QuadratureBackend, coords: NDArray[np.float64]) -> NDArray[np.float64]:
    return np.asarray(
        [backend.conditional_mean(i, np.delete(coords, i)) for i in range(backend.dim)]
    )


def B_direct(model: DensityModel, point: Any) -> float:
    """E[∏_i (X_i − E(X_i | rest = point))]."""
    backend = _direct_backend(model)
    coords = as_point(point, backend.dim)
    centers = _conditional_means(backend, coords)
    factors = [lambda x, c=c: x - c for c in centers]
    return backend.expect(factors, quantity="B").value


def conditional_second_moment(model: DensityModel, axis: int, point: Any) -> float:
    """E(X_i − E(X_i | rest = point))²; equals σ_i² + ξ_i² at the point."""
    backend = _direct_backend(model)
    coords = as_point(point, backend.dim)
    center = backend.conditional_mean(axis, np.delete(coords, axis))
    factors: List[Optional[AxisFunction]] = [None] * backend.dim
    factors[axis] = lambda x: (x - center) ** 2
    return backend.expect(factors, quantity=f"second moment of axis {axis}").value


def Q_direct(model: DensityModel, point: Any) -> float:
    """∏_i E(X_i − E(X_i | rest = point))²."""
    backend = _direct_backend(model)
    return float(
        np.prod([conditional_second_moment(model, i, point) for i in range(backend.dim)])
    )


def H_direct(model: DensityModel, point: Any) -> float:
    return B_direct(model, point) / math.sqrt(Q_direct(model, point))

