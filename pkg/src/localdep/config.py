"""
Settings for localdep.

Values come from pydantic-settings section classes. A YAML file (config.yaml
by default) fills in anything the environment leaves unset, so the order of
precedence is CLI flag, then LOCALDEP_* variable, then file, then default.
"""

import os
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

CONFIG_PATH_ENV = "LOCALDEP_CONFIG_FILE"
SEARCH_PATHS = (
    Path("config.yaml"),
    Path(__file__).resolve().parents[2] / "config.yaml",
)


def load_config_file(config_path: Optional[str] = None) -> Dict[str, Any]:
    """Read the YAML config; an absent or empty file yields {}."""
    explicit = config_path or os.environ.get(CONFIG_PATH_ENV)
    if explicit is not None:
        candidates = [Path(explicit)]
    else:
        candidates = [p for p in SEARCH_PATHS if p.is_file()][:1]

    for path in candidates:
        if path.is_file():
            with path.open("r", encoding="utf-8") as f:
                return yaml.safe_load(f) or {}
    return {}


class LoggingSettings(BaseSettings):
    """Logging configuration."""

    level: str = Field(default="WARNING", description="Log level")
    json_logs: bool = Field(default=False, description="Render logs as JSON")

    @field_validator("level")
    def validate_level(cls, v: str) -> str:
        """Normalize and check the level name."""
        level = v.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Unknown log level '{v}'")
        return level

    model_config = SettingsConfigDict(env_prefix="LOCALDEP_LOGGING_")


class QuadratureSettings(BaseSettings):
    """Quadrature oracle configuration."""

    nodes_per_axis: int = Field(
        default=64, ge=8, description="Gauss-Legendre nodes per axis"
    )
    tol: float = Field(default=1e-8, gt=0, description="Convergence tolerance")
    truncation_sigmas: float = Field(
        default=8.0, gt=0, description="Half-width of the Gaussian box in sigmas"
    )

    model_config = SettingsConfigDict(env_prefix="LOCALDEP_QUADRATURE_")


class SolverSettings(BaseSettings):
    """Reference-point solver configuration."""

    max_iter: int = Field(default=100, ge=1, description="Newton iterations")
    tol: float = Field(default=1e-10, gt=0, description="Residual tolerance")
    max_halvings: int = Field(default=20, ge=0, description="Step halvings per iteration")
    fd_step: float = Field(default=1e-6, gt=0, description="Finite-difference step scale")

    model_config = SettingsConfigDict(env_prefix="LOCALDEP_SOLVER_")


class GridSettings(BaseSettings):
    """Grid sweep configuration."""

    workers: int = Field(default=1, ge=0, description="Worker threads (0 = all cores)")

    model_config = SettingsConfigDict(env_prefix="LOCALDEP_GRID_")


class OutputSettings(BaseSettings):
    """Output formatting configuration."""

    precision: int = Field(default=4, ge=0, le=17, description="Decimal places")
    plot_size: int = Field(default=640, ge=64, description="Heatmap plot area in px")

    model_config = SettingsConfigDict(env_prefix="LOCALDEP_OUTPUT_")


class Settings(BaseSettings):
    """Main application settings."""

    # Component settings
    logging: LoggingSettings = Field(default_factory=LoggingSettings)
    quadrature: QuadratureSettings = Field(default_factory=QuadratureSettings)
    solver: SolverSettings = Field(default_factory=SolverSettings)
    grid: GridSettings = Field(default_factory=GridSettings)
    output: OutputSettings = Field(default_factory=OutputSettings)

    model_config = SettingsConfigDict(env_prefix="LOCALDEP_", case_sensitive=False)


@lru_cache()
def get_settings() -> Settings:
    """Settings for this process; call reload_settings() after changing the environment."""
    _export_file_values(load_config_file())
    return Settings()


def _export_file_values(config_data: Dict[str, Any]) -> None:
    """Copy file values into LOCALDEP_* variables that are still unset."""
    mappings = {
        ("logging", "level"): "LOCALDEP_LOGGING_LEVEL",
        ("logging", "json_logs"): "LOCALDEP_LOGGING_JSON_LOGS",
        ("quadrature", "nodes_per_axis"): "LOCALDEP_QUADRATURE_NODES_PER_AXIS",
        ("quadrature", "tol"): "LOCALDEP_QUADRATURE_TOL",
        ("quadrature", "truncation_sigmas"): "LOCALDEP_QUADRATURE_TRUNCATION_SIGMAS",
        ("solver", "max_iter"): "LOCALDEP_SOLVER_MAX_ITER",
        ("solver", "tol"): "LOCALDEP_SOLVER_TOL",
        ("solver", "max_halvings"): "LOCALDEP_SOLVER_MAX_HALVINGS",
        ("solver", "fd_step"): "LOCALDEP_SOLVER_FD_STEP",
        ("grid", "workers"): "LOCALDEP_GRID_WORKERS",
        ("output", "precision"): "LOCALDEP_OUTPUT_PRECISION",
        ("output", "plot_size"): "LOCALDEP_OUTPUT_PLOT_SIZE",
    }

    for (section, key), env_var in mappings.items():
        if env_var not in os.environ:
            value = (config_data.get(section) or {}).get(key)
            if value is not None:
                os.environ[env_var] = str(value)


def reload_settings(config_path: Optional[str] = None) -> Settings:
    """Reload settings (clears cache), optionally from an explicit file."""
    if config_path is not None:
        os.environ[CONFIG_PATH_ENV] = config_path
    get_settings.cache_clear()
    return get_settings()
