"""
Quadrature oracle for arbitrary joint densities.

Tensor-product Gauss-Legendre integration over the model's support box.
Every estimate is taken at ``n`` nodes per axis and compared against ``n/2``;
if the two differ by more than ``tol`` the order is doubled once and the
refined estimate is compared against ``n``. Expectations are normalized by
the mass computed at the same order.
"""

import threading
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from numpy.typing import NDArray

from ..models.model_core import DensityModel, as_point
from ..models.results import Subset
from .exceptions import (
    DensityModelError,
    DimensionMismatchError,
    IntegrationNotConvergedError,
    NonPositiveVarianceError,
    ValidationError,
    ZeroDensitySliceError,
)
from .gaussian_backend import normalize_subset

logger = structlog.get_logger(__name__)

MIN_NODES = 8
ZERO_SLICE = 1e-300

AxisFunction = Callable[[NDArray[np.float64]], NDArray[np.float64]]


@dataclass(frozen=True)
class QuadratureScheme:
    """Fixed-order Gauss-Legendre rule with one refinement step."""

    nodes_per_axis: int = 64
    tol: float = 1e-8

    def __post_init__(self) -> None:
        if self.nodes_per_axis < MIN_NODES:
            raise ValidationError(
                f"nodes_per_axis must be >= {MIN_NODES}",
                details={"nodes_per_axis": self.nodes_per_axis},
                error_code="invalid_quadrature_scheme",
            )
        if self.tol <= 0:
            raise ValidationError(
                "Quadrature tol must be positive",
                details={"tol": self.tol},
                error_code="invalid_quadrature_scheme",
            )

    @property
    def coarse(self) -> int:
        return self.nodes_per_axis // 2

    @property
    def refined(self) -> int:
        return self.nodes_per_axis * 2


@dataclass(frozen=True)
class QuadratureEstimate:
    """Integral value with its error estimate |refined − coarse|."""

    value: float
    error: float
    order: int


@lru_cache(maxsize=256)
def gauss_legendre_rule(
    lo: float, hi: float, order: int
) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Nodes and weights of the ``order``-point rule on [lo, hi] (read-only)."""
    t, w = np.polynomial.legendre.leggauss(order)
    half = (hi - lo) / 2.0
    nodes = half * t + (hi + lo) / 2.0
    weights = half * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


class QuadratureBackend:
    """
    Numeric backend for a DensityModel.

    Density values on the tensor grid are computed once per order and
    shared between every expectation; marginal moments and mixed moments
    are cached after the first evaluation.
    """

    def __init__(self, model: DensityModel, scheme: Optional[QuadratureScheme] = None) -> None:
        self.model = model
        self.dim = model.dim
        self.scheme = scheme or QuadratureScheme(model.quad_order, model.tol)
        self._tensors: Dict[int, NDArray[np.float64]] = {}
        self._moments: Dict[Subset, QuadratureEstimate] = {(): QuadratureEstimate(1.0, 0.0, 0)}
        self._marginals: Optional[List[Tuple[QuadratureEstimate, QuadratureEstimate]]] = None
        self._lock = threading.RLock()

    # Integration primitives

    def _rules(self, order: int) -> List[Tuple[NDArray[np.float64], NDArray[np.float64]]]:
        return [gauss_legendre_rule(lo, hi, order) for lo, hi in self.model.support_box]

    def _tensor(self, order: int) -> NDArray[np.float64]:
        with self._lock:
            tensor = self._tensors.get(order)
            if tensor is None:
                tensor = self._evaluate_tensor(order)
                self._tensors[order] = tensor
            return tensor

    def _evaluate_tensor(self, order: int) -> NDArray[np.float64]:
        """Density on the full node grid, one slab of the first axis at a time."""
        started = time.perf_counter()
        nodes = [n for n, _ in self._rules(order)]
        trailing = np.stack(np.meshgrid(*nodes[1:], indexing="ij"), axis=-1)
        trailing = trailing.reshape(-1, self.dim - 1)
        tensor = np.empty((order,) * self.dim)
        for i, x0 in enumerate(nodes[0]):
            points = np.column_stack([np.full(len(trailing), x0), trailing])
            values = np.asarray(self.model.density(points), dtype=float).reshape(-1)
            if values.shape[0] != len(trailing):
                raise DensityModelError(
                    "Density callable returned the wrong number of values",
                    {"expected": len(trailing), "actual": int(values.shape[0])},
                )
            if not np.all(np.isfinite(values)) or np.any(values < 0):
                raise DensityModelError(
                    "Density must be finite and nonnegative on the support box",
                    {"order": order},
                )
            tensor[i] = values.reshape((order,) * (self.dim - 1))
        tensor.setflags(write=False)
        logger.debug(
            "Density tensor evaluated",
            order=order,
            nodes=tensor.size,
            duration_ms=round((time.perf_counter() - started) * 1000, 2),
        )
        return tensor

    def _contract(self, order: int, factors: Sequence[Optional[AxisFunction]]) -> Tuple[float, float]:
        """(∫ f ∏ g_k, ∫ f) at ``order``; a ``None`` factor means g_k = 1."""
        tensor = self._tensor(order)
        rules = self._rules(order)
        weighted: Any = tensor
        plain: Any = tensor
        for (nodes, weights), g in zip(reversed(rules), reversed(list(factors))):
            plain = plain @ weights
            weighted = weighted @ (weights if g is None else weights * g(nodes))
        return float(weighted), float(plain)

    def _refine(
        self, quantity: str, estimate: Callable[[int], float]
    ) -> QuadratureEstimate:
        order = self.scheme.nodes_per_axis
        fine = estimate(order)
        error = abs(fine - estimate(self.scheme.coarse))
        if error <= self.scheme.tol:
            return QuadratureEstimate(fine, error, order)

        refined_order = self.scheme.refined
        refined = estimate(refined_order)
        error = abs(refined - fine)
        logger.debug("Quadrature refined", quantity=quantity, order=refined_order, error=error)
        if error > self.scheme.tol:
            raise IntegrationNotConvergedError(quantity, error, self.scheme.tol)
        return QuadratureEstimate(refined, error, refined_order)

    # Public operations

    def mass(self) -> QuadratureEstimate:
        return self._refine("mass", lambda order: self._contract(order, [None] * self.dim)[1])

    def expect(
        self, factors: Sequence[Optional[AxisFunction]], quantity: str = "expectation"
    ) -> QuadratureEstimate:
        """E[∏_k g_k(X_k)] under the normalized density."""
        if len(factors) != self.dim:
            raise DimensionMismatchError("factors", self.dim, len(factors))

        def estimate(order: int) -> float:
            weighted, mass = self._contract(order, factors)
            return weighted / mass

        return self._refine(quantity, estimate)

    def marginal_moments(self, axis: int) -> Tuple[float, float]:
        mean, variance = self.marginal_moment_estimates(axis)
        return mean.value, variance.value

    def marginal_moment_estimates(self, axis: int) -> Tuple[QuadratureEstimate, QuadratureEstimate]:
        """(mean, variance) of one axis with their quadrature errors."""
        if not 0 <= axis < self.dim:
            raise DimensionMismatchError("axis", f"index in [0, {self.dim})", axis)
        return self._marginal_table()[axis]

    def _marginal_table(self) -> List[Tuple[QuadratureEstimate, QuadratureEstimate]]:
        with self._lock:
            if self._marginals is None:
                table = []
                for axis in range(self.dim):
                    mean = self._axis_expect(axis, lambda x: x, "mean")
                    variance = self._axis_expect(
                        axis, lambda x, mu=mean.value: (x - mu) ** 2, "variance"
                    )
                    if variance.value <= 0:
                        raise NonPositiveVarianceError(axis, variance.value)
                    table.append((mean, variance))
                self._marginals = table
            return self._marginals

    def _axis_expect(self, axis: int, g: AxisFunction, what: str) -> QuadratureEstimate:
        factors: List[Optional[AxisFunction]] = [None] * self.dim
        factors[axis] = g
        return self.expect(factors, quantity=f"{what} of axis {axis}")

    @property
    def mean(self) -> NDArray[np.float64]:
        return np.asarray([m.value for m, _ in self._marginal_table()])

    def sigmas(self) -> NDArray[np.float64]:
        return np.sqrt([v.value for _, v in self._marginal_table()])

    def conditional_mean(self, target: int, given: Any) -> float:
        return self.conditional_mean_estimate(target, given).value

    def conditional_mean_estimate(self, target: int, given: Any) -> QuadratureEstimate:
        """∫ x f(x, given) dx / ∫ f(x, given) dx along the target axis."""
        if not 0 <= target < self.dim:
            raise DimensionMismatchError("target", f"index in [0, {self.dim})", target)
        values = np.asarray(given, dtype=float)
        if values.shape != (self.dim - 1,):
            raise DimensionMismatchError("given", self.dim - 1, list(values.shape))
        lo, hi = self.model.support_box[target]

        def estimate(order: int) -> float:
            nodes, weights = gauss_legendre_rule(lo, hi, order)
            points = np.insert(np.tile(values, (order, 1)), target, nodes, axis=1)
            density = np.asarray(self.model.density(points), dtype=float).reshape(-1)
            denominator = float(weights @ density)
            if not denominator > ZERO_SLICE:
                raise ZeroDensitySliceError(target, values)
            return float((weights * nodes) @ density) / denominator

        return self._refine(f"conditional mean of axis {target}", estimate)

    def xi(self, point: NDArray[np.float64]) -> NDArray[np.float64]:
        mean = self.mean
        return np.asarray(
            [mean[i] - self.conditional_mean(i, np.delete(point, i)) for i in range(self.dim)]
        )

    def mixed_central_moment(self, subset: Iterable[int]) -> float:
        return self.mixed_central_moment_estimate(subset).value

    def mixed_central_moment_estimate(self, subset: Iterable[int]) -> QuadratureEstimate:
        """E∏_{i∈S} (X_i − μ_i)/σ_i with its quadrature error."""
        key = normalize_subset(subset, self.dim)
        with self._lock:
            cached = self._moments.get(key)
            if cached is not None:
                return cached
            mean, sd = self.mean, self.sigmas()
            factors: List[Optional[AxisFunction]] = [None] * self.dim
            for i in key:
                factors[i] = lambda x, m=mean[i], s=sd[i]: (x - m) / s
            estimate = self.expect(factors, quantity=f"mixed moment {key}")
            self._moments[key] = estimate
            return estimate

    def pdf(self, point: Any) -> float:
        coords = as_point(point, self.dim)
        return float(np.asarray(self.model.density(coords[None, :])).reshape(-1)[0])


@lru_cache(maxsize=32)
def quadrature_backend_for(model: DensityModel) -> QuadratureBackend:
    """Shared backend per model instance."""
    return QuadratureBackend(model)


def check_normalization(model: DensityModel) -> QuadratureEstimate:
    """Construction check: nonnegative on the nodes and unit mass within tol."""
    estimate = quadrature_backend_for(model).mass()
    if abs(estimate.value - 1.0) > model.tol:
        raise DensityModelError(
            f"Density integrates to {estimate.value:.10g} over the support box",
            {"mass": estimate.value, "tol": model.tol},
        )
    logger.debug("Density model normalized", mass=estimate.value, error=estimate.error)
    return estimate


def marginal_moments(model: DensityModel, axis: int) -> Tuple[float, float]:
    """(mean, variance) of one axis marginal."""
    return quadrature_backend_for(model).marginal_moments(axis)


def conditional_mean_numeric(model: DensityModel, target: int, given: Any) -> float:
    return quadrature_backend_for(model).conditional_mean(target, given)


def mixed_central_moment_numeric(model: DensityModel, subset: Iterable[int]) -> float:
    return quadrature_backend_for(model).mixed_central_moment(subset)


def mixed_central_moment_estimate(model: DensityModel, subset: Iterable[int]) -> QuadratureEstimate:
    return quadrature_backend_for(model).mixed_central_moment_estimate(subset)
