"""Snapshot command - render a stored configuration."""

from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.table import Table

from halfpack.core.model import ItemType, ModelParams, enumerate_holes
from halfpack.core.observables import WindowSpec, snapshot_observables
from halfpack.core.render import load_snapshot, render_snapshot
from halfpack.utils.errors import exit_on_error
from halfpack.utils.log import configure_logging

console = Console()


def snapshot(
    path: Path = typer.Argument(..., help="Pixmap file ('1', '2', '.', '#' comments)"),
    cells_per_row: int = typer.Option(100, "--cells-per-row", "-w", help="Cells per row"),
    r: Optional[float] = typer.Option(None, "--r", help="Also report window statistics at this r"),
    p1: float = typer.Option(0.5, "--p1", help="Fraction of 1-items, with --r"),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="Skip the pixmap itself"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose output"),
):
    """
    Render a stored configuration and summarise it.

    Examples:
        halfpack snapshot results/transient/t010.000.txt -w 120
        halfpack snapshot state.txt --r 5000 --p1 0.5 -q
    """
    configure_logging(verbose)
    with exit_on_error():
        config = load_snapshot(path)
        text = render_snapshot(config, cells_per_row)
        params = None if r is None else ModelParams.from_p1(r, p1)

    if not quiet and text:
        console.print(text, markup=False, highlight=False, soft_wrap=True)

    holes = enumerate_holes(config, config.rightmost_extent)
    console.print(
        f"\n[bold]{path.name}[/bold]: {config.counts[ItemType.ONE]} 1-items, "
        f"{config.counts[ItemType.TWO]} 2-items, extent {config.rightmost_extent}, "
        f"{len(holes)} holes ({sum(1 for h in holes if h.length % 2)} odd)"
    )

    if params is not None:
        snap = snapshot_observables(config, params, WindowSpec.default(params))
        table = Table(title=f"Window statistics at r={r:g}")
        table.add_column("Statistic", style="cyan")
        table.add_column("Value", justify="right")
        table.add_column("/ r", justify="right", style="dim")
        for name in ("Y", "Z", "X", "D", "G", "G1", "Gdelta", "wasted"):
            value = getattr(snap, name)
            table.add_row(name, str(value), f"{value / r:.4g}")
        table.add_row("F1(p1 r)", str(snap.ones_p1), f"{snap.ones_p1 / r:.4g}")
        table.add_row("F2((p1+2p2) r)", str(snap.twos_optimal), f"{snap.twos_optimal / r:.4g}")
        console.print(table)
