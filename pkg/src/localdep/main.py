"""
Command-line application entry point.

This module sets up the typer app, logging and per-invocation state, and
registers the commands.
"""

import logging
import sys
from pathlib import Path
from typing import Optional

import structlog
import typer

from . import __version__
from .cli import cmd_eval, cmd_figures, cmd_grid, cmd_saddle, cmd_table
from .cli.common import AppState
from .config import get_settings, reload_settings
from .core.metrics import MetricsCollector


def configure_logging(log_level: str = "WARNING", json_logs: bool = False) -> None:
    """Configure structured logging; logs go to stderr, results to stdout."""
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, log_level.upper()),
        force=True,
    )

    # Silence matplotlib's font manager chatter
    logging.getLogger("matplotlib").setLevel(logging.WARNING)

    renderer = (
        structlog.processors.JSONRenderer()
        if json_logs
        else structlog.dev.ConsoleRenderer(colors=False)
    )
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.format_exc_info,
            renderer,
        ],
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )


def _version_callback(value: bool) -> None:
    if value:
        typer.echo(f"localdep {__version__}")
        raise typer.Exit()


def create_app() -> typer.Typer:
    """
    Create and configure the typer application.

    Settings are resolved per invocation in the callback so that --config
    and environment overrides apply to every command.
    """
    app = typer.Typer(
        name="localdep",
        help="Local dependence functions: evaluation, maps, tables and reference points.",
        no_args_is_help=True,
        add_completion=False,
    )

    @app.callback()
    def main(
        ctx: typer.Context,
        config: Optional[Path] = typer.Option(
            None, "--config", help="YAML config file", exists=True, dir_okay=False
        ),
        log_level: Optional[str] = typer.Option(None, "--log-level", help="Log level"),
        json_logs: bool = typer.Option(False, "--json-logs", help="Render logs as JSON"),
        metrics_file: Optional[Path] = typer.Option(
            None, "--metrics-file", help="Write Prometheus metrics here on exit"
        ),
        version: bool = typer.Option(
            False, "--version", callback=_version_callback, is_eager=True, help="Show version"
        ),
    ) -> None:
        settings = reload_settings(str(config)) if config is not None else get_settings()
        level = (log_level or settings.logging.level).upper()
        if level not in logging.getLevelNamesMapping():
            typer.echo(f"Error [validation_error]: unknown log level '{log_level}'", err=True)
            raise typer.Exit(2)
        configure_logging(level, json_logs or settings.logging.json_logs)

        state = AppState(settings=settings, metrics=MetricsCollector())
        ctx.obj = state
        if metrics_file is not None:
            ctx.call_on_close(lambda: state.metrics.write(metrics_file))

        structlog.get_logger(__name__).debug(
            "localdep started", command=ctx.invoked_subcommand, version=__version__
        )

    app.command("eval")(cmd_eval)
    app.command("grid")(cmd_grid)
    app.command("table")(cmd_table)
    app.command("saddle")(cmd_saddle)
    app.command("figures")(cmd_figures)
    return app


# Create the app instance
app = create_app()


def run() -> None:
    """Console-script entry point."""
    app()


if __name__ == "__main__":
    run()
