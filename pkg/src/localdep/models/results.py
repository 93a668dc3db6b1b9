"""
Result types returned by the backends and the dependence core.

These are plain frozen dataclasses: they are produced internally at every
grid node, so they skip pydantic validation.
"""

from dataclasses import dataclass, field
from typing import Dict, Sequence, Tuple

import numpy as np

Subset = Tuple[int, ...]


@dataclass(frozen=True)
class ConditionalMeanCoeffs:
    """
    Affine form of a Gaussian conditional mean.

    E(X_target | rest = v) = offset + weights · v, where ``v`` lists the
    other coordinates in increasing index order.
    """

    target_index: int
    weights: Tuple[float, ...]
    offset: float

    def evaluate(self, given: Sequence[float]) -> float:
        return self.offset + float(np.dot(self.weights, given))


@dataclass(frozen=True)
class PhiVector:
    """Standardized conditional-mean deviations at a point."""

    phi: Tuple[float, ...]
    xi: Tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.phi)


@dataclass(frozen=True)
class DependenceResult:
    """Local dependence value with its decomposition."""

    h_value: float
    numerator: float
    denominator: float
    phi: PhiVector
    rho_terms: Dict[Subset, float] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.phi.dim


@dataclass(frozen=True)
class ReferencePoint:
    """Solution of the reference-point system: every ξ_i vanishes."""

    point: Tuple[float, ...]
    residual_norm: float
    iterations: int
    h_value: float
