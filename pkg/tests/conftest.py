"""
Pytest configuration and shared fixtures.

Contains common test fixtures and setup for all test modules.
"""

import os
from pathlib import Path
from typing import Generator

import numpy as np
import pytest
from typer.testing import CliRunner

from src.localdep.config import get_settings
from src.localdep.core.gaussian_backend import gaussian_density_model
from src.localdep.main import configure_logging
from src.localdep.models.model_core import DensityModel, GaussianModel

REFERENCE_COV = [[1.0, 0.5, 0.3], [0.5, 1.0, 0.4], [0.3, 0.4, 1.0]]
STRONG_COV = [[1.0, 0.8, 0.6], [0.8, 1.0, 0.4], [0.6, 0.4, 1.0]]


@pytest.fixture(autouse=True)
def isolated_settings() -> Generator[None, None, None]:
    """Restore the environment and settings cache around every test."""
    saved = dict(os.environ)
    get_settings.cache_clear()
    yield
    os.environ.clear()
    os.environ.update(saved)
    get_settings.cache_clear()
    configure_logging("WARNING")


@pytest.fixture
def reference_model() -> GaussianModel:
    """Zero-mean trivariate normal with the reference covariance."""
    return GaussianModel.from_arrays([0.0, 0.0, 0.0], REFERENCE_COV)


@pytest.fixture
def strong_model() -> GaussianModel:
    """Trivariate normal with stronger pairwise correlations."""
    return GaussianModel.from_arrays([0.0, 0.0, 0.0], STRONG_COV)


@pytest.fixture
def bivariate_model() -> GaussianModel:
    """Standard bivariate normal with rho = 0.5."""
    return GaussianModel.bivariate(0.5)


@pytest.fixture
def diagonal_model() -> GaussianModel:
    """Independent coordinates with unequal variances and a shifted mean."""
    return GaussianModel.from_arrays(
        [0.5, -1.0, 2.0], [[2.0, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 1.5]]
    )


@pytest.fixture(scope="session")
def reference_density() -> DensityModel:
    """Reference Gaussian wrapped for the quadrature oracle (μ ± 8σ box)."""
    model = GaussianModel.from_arrays([0.0, 0.0, 0.0], REFERENCE_COV)
    return gaussian_density_model(model)


@pytest.fixture(scope="session")
def pairwise_independent_density() -> DensityModel:
    """f = (1 + xyz)/8 on [-1, 1]³: pairwise independent, jointly dependent."""

    def density(points: np.ndarray) -> np.ndarray:
        return (1.0 + points[:, 0] * points[:, 1] * points[:, 2]) / 8.0

    return DensityModel(
        dim=3,
        density=density,
        support_box=((-1.0, 1.0), (-1.0, 1.0), (-1.0, 1.0)),
        quad_order=16,
    )


@pytest.fixture(scope="session")
def uniform_square() -> DensityModel:
    """Uniform density on the unit square."""
    return DensityModel(
        dim=2,
        density=lambda points: np.ones(len(points)),
        support_box=((0.0, 1.0), (0.0, 1.0)),
        quad_order=16,
    )


@pytest.fixture
def cli_runner() -> CliRunner:
    """Typer test runner."""
    return CliRunner()


@pytest.fixture
def temp_output_dir(tmp_path: Path) -> Path:
    """Temporary directory for CSV/SVG/metrics output."""
    out = tmp_path / "out"
    out.mkdir()
    return out


def random_spd(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Well-conditioned random covariance matrix."""
    factor = rng.normal(size=(dim, dim))
    return factor @ factor.T + dim * np.eye(dim)
