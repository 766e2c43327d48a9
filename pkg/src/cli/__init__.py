"""CLI commands."""

from . import data, evaluate, experiment, gan, main, stratify

__all__ = ["data", "evaluate", "experiment", "gan", "main", "stratify"]
