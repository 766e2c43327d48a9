"""Logging setup on top of Rich."""

import logging

from rich.logging import RichHandler

from .output import err_console


def setup_logging(level: str = "WARNING") -> None:
    """Route the "src" logger tree to a RichHandler on stderr.

    Args:
        level: Log level name (DEBUG, INFO, WARNING, ERROR)
    """
    root = logging.getLogger("src")
    root.handlers.clear()
    handler = RichHandler(console=err_console, show_path=False, rich_tracebacks=True)
    handler.setFormatter(logging.Formatter("%(message)s"))
    root.addHandler(handler)
    root.setLevel(level.upper())
    root.propagate = False


def verbosity_level(verbose: int, default: str = "WARNING") -> str:
    """Map a -V count onto a level name (1: INFO, 2+: DEBUG)."""
    if verbose >= 2:
        return "DEBUG"
    if verbose == 1:
        return "INFO"
    return default
