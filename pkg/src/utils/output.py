"""Output formatting utilities using Rich."""

import json
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from typing import Any

import typer
from rich.console import Console
from rich.progress import Progress, SpinnerColumn, TextColumn
from rich.table import Table

console = Console()
err_console = Console(stderr=True)

JSON_OPTION = typer.Option(
    False,
    "--json",
    help="Output raw JSON to stdout (no colors, no tables)",
)


def print_error(msg: str) -> None:
    """Print an error message to stderr.

    Errors go to stderr so a --json stdout stream stays machine readable.

    Args:
        msg: The error message to display.
    """
    err_console.print(f"[bold red]Error:[/bold red] {msg}")


def print_success(msg: str) -> None:
    """Green check mark line on stdout."""
    console.print(f"[bold green]✓[/bold green] {msg}")


def print_warning(msg: str) -> None:
    """Yellow warning line on stdout."""
    console.print(f"[bold yellow]Warning:[/bold yellow] {msg}")


def print_info(msg: str) -> None:
    """Cyan progress or result note on stdout."""
    console.print(f"[cyan]{msg}[/cyan]")


def create_table(title: str | None, columns: list[tuple[str, str]]) -> Table:
    """Rich table with a bold cyan header.

    Args:
        title: Table title, or None
        columns: (name, style) per column, style "" for the default
    """
    table = Table(title=title, header_style="bold cyan")
    for name, style in columns:
        table.add_column(name, style=style)
    return table


@contextmanager
def spinner(description: str) -> Iterator[None]:
    """Show a transient spinner while a long step runs."""
    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        console=console,
        transient=True,
    ) as progress:
        progress.add_task(description=description, total=None)
        yield


def dumps_json(payload: Any) -> str:
    """Serialise to a stable JSON document (sorted keys, two-space indent)."""
    return json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n"


def emit_json(payload: Any) -> None:
    """Write a JSON document to stdout, bypassing Rich entirely.

    Rich wraps long lines to the console width and interprets square bracket
    markup, both of which would corrupt a machine readable stream, so this
    writes straight to sys.stdout.

    Args:
        payload: Any JSON serialisable object.
    """
    sys.stdout.write(dumps_json(payload))
    sys.stdout.flush()


def format_pm(mean: float, sd: float, decimals: int = 2) -> str:
    """Format a mean with its standard deviation, e.g. '0.13 (±0.22)'."""
    return f"{mean:.{decimals}f} (±{sd:.{decimals}f})"


def format_p_value(p: float | None) -> str:
    """Format a p-value in scientific notation, '-' when absent."""
    if p is None:
        return "-"
    return f"{p:.1e}"
