"""Exceptions raised by halfpack and their console rendering."""

from contextlib import contextmanager
from typing import Iterator, Optional

import typer
from rich.console import Console
from rich.panel import Panel

console = Console(stderr=True)


class HalfpackError(Exception):
    """
    Base exception for halfpack.

    ``details`` holds the offending value or file context, ``suggestion``
    a concrete fix when one exists.
    """

    title = "Error"

    def __init__(
        self,
        message: str,
        details: Optional[str] = None,
        suggestion: Optional[str] = None,
    ):
        self.message = message
        self.details = details
        self.suggestion = suggestion
        super().__init__(message)

    def __str__(self) -> str:
        if self.details:
            return f"{self.message} ({self.details})"
        return self.message

    def display(self):
        """Print the error as a red panel on stderr."""
        content = f"[red bold]{self.message}[/red bold]"

        if self.details:
            content += f"\n\n[dim]{self.details}[/dim]"

        if self.suggestion:
            content += f"\n\n[green]Suggestion:[/green] {self.suggestion}"

        console.print(Panel(
            content,
            title=f"[red]{self.title}[/red]",
            border_style="red",
        ))


class ConfigurationError(HalfpackError):
    """Invalid or unparseable experiment configuration."""
    title = "Configuration error"


class ContractViolation(HalfpackError):
    """A caller broke a lattice or index precondition; always a bug."""
    title = "Contract violation"


class SnapshotFormatError(HalfpackError):
    """Malformed stored configuration."""
    title = "Bad snapshot"


class TraceFormatError(HalfpackError):
    """Malformed or missing trace file."""
    title = "Bad trace"


class OutputError(HalfpackError):
    """Result file could not be written."""
    title = "Output error"


@contextmanager
def exit_on_error(code: int = 1) -> Iterator[None]:
    """Display any HalfpackError raised in the block and exit with ``code``."""
    try:
        yield
    except HalfpackError as e:
        e.display()
        raise typer.Exit(code)
