"""Replay command - verify a trace's placements with a fresh first-fit scan."""

from pathlib import Path

import typer
from rich.console import Console
from rich.table import Table

from halfpack.core.trace import replay_trace
from halfpack.utils.errors import exit_on_error
from halfpack.utils.log import configure_logging

console = Console()

MAX_SHOWN = 20


def replay(
    trace: Path = typer.Argument(..., help="Trace file written by simulate --trace"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose output"),
):
    """
    Replay a trace; exits 1 on any placement mismatch or malformed line.

    Examples:
        halfpack replay results/trace.csv
    """
    configure_logging(verbose)
    with exit_on_error():
        report = replay_trace(trace)

    if verbose and report.header:
        for key, value in report.header.items():
            console.print(f"[dim]{key}={value}[/dim]")

    console.print(f"Replayed {report.events} events from {trace}")

    for error in report.errors[:MAX_SHOWN]:
        console.print(f"[red]Error:[/red] {error}")

    if report.mismatches:
        table = Table(title=f"Placement mismatches ({len(report.mismatches)})")
        table.add_column("Line", justify="right")
        table.add_column("Event", justify="right")
        table.add_column("Recorded", justify="right", style="red")
        table.add_column("First fit", justify="right", style="green")
        for m in report.mismatches[:MAX_SHOWN]:
            table.add_row(str(m.line), str(m.event_index), str(m.recorded), str(m.recomputed))
        console.print(table)

    if not report.clean:
        console.print(f"[red]✗[/red] {len(report.mismatches)} mismatches, "
                      f"{len(report.errors)} errors")
        raise typer.Exit(1)
    console.print("[green]✓[/green] All placements match first fit")
