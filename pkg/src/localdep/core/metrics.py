"""
Prometheus metrics collection.

Each collector owns a private registry so repeated CLI invocations and
tests never collide on metric names. The CLI dumps the registry in the
text exposition format when --metrics-file is given.
"""

import time
from pathlib import Path
from typing import Union

import structlog
from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, Info
from prometheus_client import generate_latest, write_to_textfile

from .. import __version__

logger = structlog.get_logger(__name__)


class MetricsCollector:
    """
    Metrics for evaluations, sweeps and the reference-point solver.

    Keep metrics simple, in-memory counters; the text file is the export.
    """

    def __init__(self) -> None:
        self.registry = CollectorRegistry()

        self.build_info = Info(
            "localdep_build",
            "localdep build information",
            registry=self.registry,
        )
        self.build_info.info({"version": __version__})

        # Evaluation metrics
        self.evaluations_total = Counter(
            "localdep_evaluations_total",
            "Total local dependence evaluations",
            ["function"],
            registry=self.registry,
        )

        self.bound_violations_total = Counter(
            "localdep_bound_violations_total",
            "Evaluations with |H| above 1 + 1e-9",
            registry=self.registry,
        )

        # Sweep metrics
        self.grid_nodes_total = Counter(
            "localdep_grid_nodes_total",
            "Total grid nodes evaluated",
            registry=self.registry,
        )

        self.sweep_duration = Histogram(
            "localdep_sweep_duration_seconds",
            "Grid sweep duration in seconds",
            buckets=[0.01, 0.05, 0.1, 0.5, 1.0, 5.0, 30.0, 120.0],
            registry=self.registry,
        )

        # Solver metrics
        self.solver_iterations = Histogram(
            "localdep_solver_iterations",
            "Newton iterations per reference-point solve",
            buckets=[0, 1, 2, 3, 5, 10, 25, 50, 100],
            registry=self.registry,
        )

        self.uptime_seconds = Gauge(
            "localdep_uptime_seconds",
            "Seconds since the collector was created",
            registry=self.registry,
        )

        self._start_time = time.time()

    def record_evaluation(self, function: str, count: int = 1) -> None:
        """Record H evaluations by function name."""
        self.evaluations_total.labels(function=function).inc(count)

    def record_sweep(self, nodes: int, duration_seconds: float, violations: int = 0) -> None:
        """Record a completed grid sweep."""
        self.grid_nodes_total.inc(nodes)
        self.sweep_duration.observe(duration_seconds)
        self.record_evaluation("sweep", nodes)
        if violations:
            self.bound_violations_total.inc(violations)

    def record_solver(self, iterations: int) -> None:
        self.solver_iterations.observe(iterations)

    def render(self) -> str:
        """Registry in the Prometheus text format."""
        self.uptime_seconds.set(time.time() - self._start_time)
        return generate_latest(self.registry).decode("utf-8")

    def write(self, path: Union[str, Path]) -> None:
        """Write the registry to ``path`` (atomic rename by prometheus_client)."""
        self.uptime_seconds.set(time.time() - self._start_time)
        write_to_textfile(str(path), self.registry)
        logger.info("Metrics written", path=str(path))
