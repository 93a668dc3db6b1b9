"""
Custom exceptions for the local dependence toolkit.

Provides structured error handling with stable process exit codes
and error details for CLI reporting.

Exit codes: 2 input validation, 3 computation, 4 non-convergence.
"""

from typing import Any, Dict, Optional


class LocalDepException(Exception):
    """Base exception for localdep."""

    def __init__(
        self,
        message: str,
        exit_code: int = 3,
        error_code: str = "internal_error",
        details: Optional[Dict[str, Any]] = None,
    ) -> None:
        super().__init__(message)
        self.exit_code = exit_code
        self.error_code = error_code
        self.details = details or {}


class ValidationError(LocalDepException):
    """Raised when an input model, point or grid fails validation."""

    def __init__(
        self,
        message: str,
        details: Optional[Dict[str, Any]] = None,
        error_code: str = "validation_error",
    ) -> None:
        super().__init__(
            message=message,
            exit_code=2,
            error_code=error_code,
            details=details,
        )


class NotSymmetricError(ValidationError):
    """Raised when a covariance matrix is asymmetric beyond tolerance."""

    def __init__(self, asymmetry: float) -> None:
        super().__init__(
            f"Covariance matrix is not symmetric (relative asymmetry {asymmetry:.3e})",
            details={"field": "cov", "asymmetry": asymmetry},
            error_code="not_symmetric",
        )


class NotPositiveDefiniteError(ValidationError):
    """Raised when a covariance matrix is not strictly positive definite."""

    def __init__(self, smallest_pivot: float, threshold: float) -> None:
        super().__init__(
            f"Covariance matrix is not positive definite "
            f"(smallest pivot {smallest_pivot:.3e}, required > {threshold:.3e})",
            details={
                "field": "cov",
                "smallest_pivot": smallest_pivot,
                "threshold": threshold,
            },
            error_code="not_positive_definite",
        )


class NonFiniteEntryError(ValidationError):
    """Raised when an input contains NaN or infinity."""

    def __init__(self, field: str) -> None:
        super().__init__(
            f"Non-finite entry in '{field}'",
            details={"field": field},
            error_code="non_finite_entry",
        )


class DimensionMismatchError(ValidationError):
    """Raised when dimensions of a model and its arguments disagree."""

    def __init__(self, field: str, expected: Any, actual: Any) -> None:
        super().__init__(
            f"Dimension mismatch for '{field}': expected {expected}, got {actual}",
            details={"field": field, "expected": expected, "actual": actual},
            error_code="dimension_mismatch",
        )


class DimensionTooLargeError(ValidationError):
    """Raised when a model exceeds the supported dimension."""

    def __init__(self, dim: int, limit: int, backend: str = "gaussian") -> None:
        super().__init__(
            f"Dimension {dim} exceeds the {backend} limit of {limit}",
            details={"dim": dim, "limit": limit, "backend": backend},
            error_code="dimension_too_large",
        )


class MissingRhoTermError(ValidationError):
    """Raised when a surrogate evaluation lacks a required mixed moment."""

    def __init__(self, subset: Any) -> None:
        super().__init__(
            f"Missing mixed-moment term for subset {tuple(subset)}",
            details={"subset": list(subset)},
            error_code="missing_rho_term",
        )


class GridSpecError(ValidationError):
    """Raised when a grid specification is inconsistent."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message, details=details, error_code="grid_spec_error")


class DensityModelError(ValidationError):
    """Raised when a density model fails its construction checks."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message, details=details, error_code="density_model_error")


class ComputationError(LocalDepException):
    """Raised when a numerical evaluation fails."""

    def __init__(
        self,
        message: str,
        details: Optional[Dict[str, Any]] = None,
        error_code: str = "computation_error",
    ) -> None:
        super().__init__(
            message=message,
            exit_code=3,
            error_code=error_code,
            details=details,
        )


class IntegrationNotConvergedError(ComputationError):
    """Raised when quadrature refinement does not reach the tolerance."""

    def __init__(self, quantity: str, error_estimate: float, tol: float) -> None:
        super().__init__(
            f"Quadrature for {quantity} did not converge "
            f"(error estimate {error_estimate:.3e} > tol {tol:.3e})",
            details={"quantity": quantity, "error_estimate": error_estimate, "tol": tol},
            error_code="integration_not_converged",
        )


class ZeroDensitySliceError(ComputationError):
    """Raised when a conditioning slice carries no density mass."""

    def __init__(self, target: int, given: Any) -> None:
        super().__init__(
            f"Conditioning slice for axis {target} has zero density",
            details={"target": target, "given": list(given)},
            error_code="zero_density_slice",
        )


class NonPositiveVarianceError(ComputationError):
    """Raised when a marginal variance is not positive."""

    def __init__(self, axis: int, variance: float) -> None:
        super().__init__(
            f"Marginal variance of axis {axis} is not positive ({variance:.3e})",
            details={"axis": axis, "variance": variance},
            error_code="non_positive_variance",
        )


class SingularConditioningBlockError(ComputationError):
    """Raised when a conditioning covariance block cannot be factorized."""

    def __init__(self, target: int) -> None:
        super().__init__(
            f"Conditioning block for target {target} is singular",
            details={"target": target},
            error_code="singular_conditioning_block",
        )


class NonPositiveDensityInStencilError(ComputationError):
    """Raised when a finite-difference stencil touches a non-positive density."""

    def __init__(self, point: Any) -> None:
        super().__init__(
            "Density is not strictly positive on the finite-difference stencil",
            details={"point": list(point)},
            error_code="non_positive_density_in_stencil",
        )


class SingularJacobianError(ComputationError):
    """Raised when the reference-point Jacobian cannot be solved."""

    def __init__(self, iteration: int, point: Any) -> None:
        super().__init__(
            f"Singular Jacobian at iteration {iteration}",
            details={"iteration": iteration, "point": list(point)},
            error_code="singular_jacobian",
        )


class GridEvaluationError(ComputationError):
    """Raised when a grid node fails to evaluate."""

    def __init__(self, node_index: int, point: Any, cause: LocalDepException) -> None:
        super().__init__(
            f"Evaluation failed at grid node {node_index}: {cause}",
            details={
                "node_index": node_index,
                "point": list(point),
                "cause": cause.error_code,
            },
            error_code="grid_evaluation_error",
        )
        self.cause = cause


class NoConvergenceError(LocalDepException):
    """Raised when the reference-point solver exhausts its iterations."""

    def __init__(self, max_iter: int, residual_norm: float, reason: str = "max_iter") -> None:
        super().__init__(
            f"Reference-point solver did not converge after {max_iter} iterations "
            f"(residual {residual_norm:.3e}, {reason})",
            exit_code=4,
            error_code="no_convergence",
            details={"max_iter": max_iter, "residual_norm": residual_norm, "reason": reason},
        )
