"""
Data models package.

Contains:
- Validated model inputs (Gaussian and generic density models, points)
- Result types for dependence evaluations and reference points
- Grid specifications and dependence maps
"""

from .grid import AxisRange, GridSpec, MapResult
from .model_core import (
    CovarianceMatrix,
    DensityModel,
    GaussianModel,
    MeanVector,
    Point,
    as_point,
    determinant3,
    validate_covariance,
)
from .results import ConditionalMeanCoeffs, DependenceResult, PhiVector, ReferencePoint

__all__ = [
    # Model inputs
    "MeanVector",
    "CovarianceMatrix",
    "GaussianModel",
    "DensityModel",
    "Point",
    "as_point",
    "validate_covariance",
    "determinant3",

    # Results
    "ConditionalMeanCoeffs",
    "PhiVector",
    "DependenceResult",
    "ReferencePoint",

    # Grids
    "AxisRange",
    "GridSpec",
    "MapResult",
]
