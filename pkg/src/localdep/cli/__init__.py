"""
Command-line commands.

Each command lives in its own module; main.py registers them on the app.
"""

from .evaluate import cmd_eval
from .figures import cmd_figures
from .grid import cmd_grid
from .saddle import cmd_saddle
from .table import cmd_table

__all__ = ["cmd_eval", "cmd_grid", "cmd_table", "cmd_saddle", "cmd_figures"]
