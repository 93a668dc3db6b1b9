"""
Point-set computations: grid sweeps and the reference-point solver.
"""

import math
import os
import time
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from joblib import Parallel, delayed
from numpy.typing import NDArray

from ..models.grid import BOUND_TOL, GridSpec, MapResult
from ..models.model_core import as_point
from ..models.results import ReferencePoint
from .exceptions import (
    ComputationError,
    DimensionMismatchError,
    GridEvaluationError,
    LocalDepException,
    NoConvergenceError,
    SingularJacobianError,
    ValidationError,
)
from .localdep import Model, backend_for, evaluate, model_dim, rho_terms
from .metrics import MetricsCollector

logger = structlog.get_logger(__name__)

RANK_RTOL = 1e-8


def _resolve_workers(workers: int) -> int:
    if workers < 0:
        raise ValidationError("workers must be >= 0", details={"workers": workers})
    return workers or (os.cpu_count() or 1)


def _evaluate_chunk(model: Model, points: NDArray[np.float64], start: int) -> List[float]:
    values = []
    for offset, point in enumerate(points):
        try:
            h = evaluate(model, point).h_value
        except LocalDepException as exc:
            raise GridEvaluationError(start + offset, point, exc) from exc
        if not math.isfinite(h):
            cause = ComputationError("Non-finite H value", details={"value": str(h)})
            raise GridEvaluationError(start + offset, point, cause)
        values.append(h)
    return values


def sweep(
    model: Model,
    spec: GridSpec,
    workers: int = 1,
    metrics: Optional[MetricsCollector] = None,
) -> MapResult:
    """
    Evaluate H at every node of ``spec``, row-major over the swept axes.

    Nodes are split into contiguous chunks and evaluated on worker threads;
    each node is computed independently, so any worker count gives the
    same values.
    """
    if spec.dim != model_dim(model):
        raise DimensionMismatchError("grid", model_dim(model), spec.dim)
    n_jobs = _resolve_workers(workers)
    points = spec.points()
    started = time.perf_counter()

    # ρ_S are shared by every node; populate the cache before fanning out.
    rho_terms(model)

    logger.info("Sweep started", nodes=len(points), shape=spec.shape, workers=n_jobs)
    if n_jobs == 1:
        flat = _evaluate_chunk(model, points, 0)
    else:
        bounds = np.linspace(0, len(points), min(n_jobs * 4, len(points)) + 1).astype(int)
        chunks = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(_evaluate_chunk)(model, points[lo:hi], lo)
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        )
        flat = [value for chunk in chunks for value in chunk]

    result = MapResult.from_values(spec, np.asarray(flat, dtype=float))
    duration = time.perf_counter() - started

    if result.bound_violations:
        logger.warning(
            "Local dependence exceeds unit bound",
            violations=len(result.bound_violations),
            first_node=result.bound_violations[0],
            tolerance=BOUND_TOL,
        )
    if metrics is not None:
        metrics.record_sweep(len(points), duration, len(result.bound_violations))

    logger.info(
        "Sweep finished",
        nodes=len(points),
        min=result.min,
        max=result.max,
        duration_ms=round(duration * 1000, 2),
    )
    return result


def _jacobian(
    residual: Any, point: NDArray[np.float64], fd_step: float
) -> NDArray[np.float64]:
    """Central finite differences, step fd_step·(1 + |p_j|)."""
    dim = len(point)
    jacobian = np.empty((dim, dim))
    for j in range(dim):
        h = fd_step * (1.0 + abs(point[j]))
        forward = point.copy()
        backward = point.copy()
        forward[j] += h
        backward[j] -= h
        jacobian[:, j] = (residual(forward) - residual(backward)) / (2.0 * h)
    return jacobian


def _newton_parts(
    jacobian: NDArray[np.float64], residual: NDArray[np.float64]
) -> Tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    """
    Pseudo-inverse step J⁺ξ, an orthonormal basis of the null space of J and
    the part of ξ outside range(J). Singular values below RANK_RTOL·s_max
    count as zero.
    """
    u, s, vt = np.linalg.svd(jacobian)
    keep = s > RANK_RTOL * s[0]
    inverse = np.zeros_like(s)
    inverse[keep] = 1.0 / s[keep]
    step = vt.T @ (inverse * (u.T @ residual))
    basis = u[:, keep]
    outside = residual - basis @ (basis.T @ residual)
    return step, vt[~keep].T, outside


def solve_reference_point(
    model: Model,
    start: Optional[Sequence[float]] = None,
    max_iter: int = 100,
    tol: float = 1e-10,
    max_halvings: int = 20,
    fd_step: float = 1e-6,
    metrics: Optional[MetricsCollector] = None,
) -> ReferencePoint:
    """
    Damped Newton on ξ(p) = 0, i.e. every conditional mean equals its
    unconditional mean.

    The step is J⁺ξ. Directions ξ does not depend on (the null space of J,
    e.g. block-diagonal or banded covariances) are moved onto the marginal
    mean, so a Gaussian model lands on μ from any start. Raises
    SingularJacobianError only when part of ξ lies outside range(J) and no
    damped step reduces it.
    """
    if tol <= 0:
        raise ValidationError("tol must be positive", details={"tol": tol})
    if max_iter < 1:
        raise ValidationError("max_iter must be >= 1", details={"max_iter": max_iter})

    backend = backend_for(model)
    dim = backend.dim
    target = np.asarray(backend.mean, dtype=float)
    point = as_point(np.zeros(dim) if start is None else start, dim).copy()
    residual = backend.xi
    current = residual(point)
    norm = float(np.max(np.abs(current)))
    iterations = 0

    while True:
        jacobian = _jacobian(residual, point, fd_step)
        if not np.all(np.isfinite(jacobian)):
            raise SingularJacobianError(iterations + 1, point)
        step, null_basis, outside = _newton_parts(jacobian, current)
        drift = null_basis @ (null_basis.T @ (point - target))
        if norm <= tol and float(np.max(np.abs(drift))) <= tol:
            break
        if iterations >= max_iter:
            raise NoConvergenceError(max_iter, norm)
        iterations += 1

        move = step + drift
        scale = 1.0
        for _ in range(max_halvings + 1):
            trial = point - scale * move
            trial_residual = residual(trial)
            trial_norm = float(np.max(np.abs(trial_residual)))
            if trial_norm < norm or trial_norm <= tol:
                break
            scale /= 2.0
        else:
            if float(np.max(np.abs(outside))) > tol:
                raise SingularJacobianError(iterations, point)
            raise NoConvergenceError(iterations, norm, reason="step halving exhausted")

        point, current, norm = trial, trial_residual, trial_norm
        logger.debug(
            "Newton iteration",
            iteration=iterations,
            residual=norm,
            damping=scale,
            null_dims=null_basis.shape[1],
        )

    h_value = evaluate(model, point).h_value
    if metrics is not None:
        metrics.record_solver(iterations)
        metrics.record_evaluation("reference_point")

    logger.info("Reference point found", iterations=iterations, residual=norm, h=h_value)
    return ReferencePoint(
        point=tuple(float(c) + 0.0 for c in point),
        residual_norm=norm,
        iterations=iterations,
        h_value=h_value,
    )
