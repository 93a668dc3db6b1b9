"""
Closed-form Gaussian machinery.

Joint pdf, conditional means given all other coordinates (Schur complement
via Cholesky of the conditioning block), and standardized mixed central
moments by Isserlis pairing.
"""

import threading
from functools import lru_cache
from typing import Any, Dict, Iterable, Tuple

import numpy as np
import structlog
from numpy.typing import NDArray
from scipy import linalg
from scipy.stats import multivariate_normal

from ..models.model_core import DensityModel, GaussianModel, as_point
from ..models.results import ConditionalMeanCoeffs, Subset
from .exceptions import (
    DimensionMismatchError,
    SingularConditioningBlockError,
    ValidationError,
)

logger = structlog.get_logger(__name__)


def normalize_subset(subset: Iterable[int], dim: int, min_size: int = 2) -> Subset:
    """Sorted tuple of distinct, in-range indices."""
    indices = tuple(int(i) for i in subset)
    if len(set(indices)) != len(indices):
        raise ValidationError(
            f"Repeated index in subset {indices}",
            details={"subset": list(indices)},
            error_code="repeated_index",
        )
    for index in indices:
        if not 0 <= index < dim:
            raise DimensionMismatchError("subset", f"indices in [0, {dim})", index)
    if len(indices) < min_size:
        raise ValidationError(
            f"Subset {indices} needs at least {min_size} indices",
            details={"subset": list(indices)},
            error_code="subset_too_small",
        )
    return tuple(sorted(indices))


class GaussianBackend:
    """
    Closed-form backend for a GaussianModel.

    Conditional-mean coefficients are computed once per target; mixed
    moments are memoized per subset (populate-once under a lock).
    """

    def __init__(self, model: GaussianModel) -> None:
        self.model = model
        self.dim = model.dim
        self.mean = model.mean.as_array()
        self._cov = model.cov.as_array()
        self._sd = model.cov.stddevs()
        self._corr = model.cov.correlations()
        self._dist = multivariate_normal(mean=self.mean, cov=self._cov)
        self._coeffs = tuple(self._build_coeffs(i) for i in range(self.dim))
        self._moments: Dict[Subset, float] = {(): 1.0}
        self._lock = threading.Lock()

        logger.debug("Gaussian backend ready", dim=self.dim)

    def _build_coeffs(self, target: int) -> ConditionalMeanCoeffs:
        rest = [j for j in range(self.dim) if j != target]
        block = self._cov[np.ix_(rest, rest)]
        try:
            factor = linalg.cho_factor(block, lower=True)
        except linalg.LinAlgError:
            raise SingularConditioningBlockError(target) from None
        weights = linalg.cho_solve(factor, self._cov[rest, target])
        offset = self.mean[target] - float(weights @ self.mean[rest])
        return ConditionalMeanCoeffs(
            target_index=target,
            weights=tuple(float(w) for w in weights),
            offset=float(offset),
        )

    def sigmas(self) -> NDArray[np.float64]:
        return self._sd

    def coefficients(self, target: int) -> ConditionalMeanCoeffs:
        if not 0 <= target < self.dim:
            raise DimensionMismatchError("target", f"index in [0, {self.dim})", target)
        return self._coeffs[target]

    def pdf(self, point: Any) -> float:
        return float(self._dist.pdf(as_point(point, self.dim)))

    def density(self, points: NDArray[np.float64]) -> NDArray[np.float64]:
        """Vectorized pdf over an (m, dim) array."""
        return np.atleast_1d(self._dist.pdf(np.asarray(points, dtype=float)))

    def conditional_mean(self, target: int, given: Any) -> float:
        coeffs = self.coefficients(target)
        values = np.asarray(given, dtype=float)
        if values.shape != (self.dim - 1,):
            raise DimensionMismatchError("given", self.dim - 1, list(values.shape))
        return coeffs.evaluate(values)

    def xi(self, point: NDArray[np.float64]) -> NDArray[np.float64]:
        """ξ_i = μ_i − E(X_i | other coordinates at ``point``)."""
        out = np.empty(self.dim)
        for i, coeffs in enumerate(self._coeffs):
            given = np.delete(point, i)
            out[i] = self.mean[i] - coeffs.evaluate(given)
        return out

    def mixed_central_moment(self, subset: Iterable[int]) -> float:
        key = normalize_subset(subset, self.dim)
        with self._lock:
            return self._isserlis(key)

    def _isserlis(self, subset: Subset) -> float:
        cached = self._moments.get(subset)
        if cached is not None:
            return cached
        if len(subset) % 2:
            value = 0.0
        else:
            first, rest = subset[0], subset[1:]
            value = 0.0
            for k, partner in enumerate(rest):
                value += self._corr[first, partner] * self._isserlis(
                    rest[:k] + rest[k + 1:]
                )
        self._moments[subset] = value
        return value


@lru_cache(maxsize=64)
def backend_for(model: GaussianModel) -> GaussianBackend:
    """Shared backend per model; models are immutable and hashable."""
    return GaussianBackend(model)


def pdf(model: GaussianModel, point: Any) -> float:
    """n-variate normal density at ``point``."""
    return backend_for(model).pdf(point)


def conditional_mean(model: GaussianModel, target: int, given: Any) -> float:
    """μ_t + Σ_{t,rest} Σ_{rest,rest}⁻¹ (given − μ_rest)."""
    return backend_for(model).conditional_mean(target, given)


def conditional_mean_coeffs(model: GaussianModel, target: int) -> ConditionalMeanCoeffs:
    return backend_for(model).coefficients(target)


def mixed_central_moment(model: GaussianModel, subset: Iterable[int]) -> float:
    """Standardized mixed central moment ρ_S by Isserlis pairing."""
    return backend_for(model).mixed_central_moment(subset)


def gaussian_density(model: GaussianModel) -> Any:
    """Vectorized density callable for ``model``."""
    return backend_for(model).density


def gaussian_box(model: GaussianModel, sigmas: float = 8.0) -> Tuple[Tuple[float, float], ...]:
    """Truncation box μ ± sigmas·σ per axis."""
    mean = model.mean.as_array()
    sd = model.cov.stddevs()
    return tuple(
        (float(m - sigmas * s), float(m + sigmas * s)) for m, s in zip(mean, sd)
    )


def gaussian_density_model(
    model: GaussianModel,
    sigmas: float = 8.0,
    quad_order: int = 64,
    tol: float = 1e-8,
) -> DensityModel:
    """Wrap a Gaussian as a DensityModel on the μ ± sigmas·σ box."""
    return DensityModel(
        dim=model.dim,
        density=gaussian_density(model),
        support_box=gaussian_box(model, sigmas),
        quad_order=quad_order,
        tol=tol,
        name="gaussian",
    )
