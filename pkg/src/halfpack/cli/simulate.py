"""Simulate command - one run, optional trace and snapshot capture."""

from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.progress import Progress, SpinnerColumn, TextColumn

from halfpack.cli.options import estimates_table, format_estimate, load_experiment
from halfpack.core.config import parse_list_flag
from halfpack.core.experiments import run_single, write_snapshots
from halfpack.core.model import ItemType
from halfpack.utils.errors import exit_on_error
from halfpack.utils.log import configure_logging

console = Console()


def simulate(
    config_file: Optional[Path] = typer.Option(
        None, "--config", "-c", help="Experiment config file"
    ),
    seed: Optional[int] = typer.Option(None, "--seed", "-s", help="Master seed"),
    r: Optional[float] = typer.Option(None, "--r", help="Arrival scale r"),
    p1: Optional[float] = typer.Option(None, "--p1", help="Fraction of 1-items"),
    y: Optional[float] = typer.Option(None, "--y", help="Window end y (default p1 + p2)"),
    delta: Optional[float] = typer.Option(None, "--delta", help="Sub-window offset delta"),
    i_list: Optional[str] = typer.Option(None, "--i-list", help="U caps, e.g. 1,2,4,8,inf"),
    warmup: Optional[float] = typer.Option(None, "--warmup", help="Warm-up time"),
    horizon: Optional[float] = typer.Option(None, "--horizon", help="Run length"),
    batches: Optional[int] = typer.Option(None, "--batches", help="Batch count for CIs"),
    init: Optional[str] = typer.Option(None, "--init", help="empty, opposite or snapshot"),
    snapshot: Optional[Path] = typer.Option(None, "--snapshot", help="Initial configuration file"),
    trace: Optional[Path] = typer.Option(None, "--trace", "-t", help="Write the event trace here"),
    snapshots_dir: Optional[Path] = typer.Option(
        None, "--snapshots-dir", help="Write pixmaps and profiles at SNAPSHOT_TIMES here"
    ),
    snapshot_times: Optional[str] = typer.Option(None, "--snapshot-times", help="e.g. 0,1,2,5,10"),
    cells_per_row: Optional[int] = typer.Option(None, "--cells-per-row", help="Pixmap width"),
    verify_every: int = typer.Option(
        0, "--verify-every", help="Check every n-th snapshot against a full scan (0 = never)"
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose output"),
):
    """
    Run the chain once and report time-averaged window statistics.

    Examples:
        halfpack simulate --r 500 --seed 7
        halfpack simulate -c configs/transient.conf --snapshots-dir results/transient
        halfpack simulate --r 100 --seed 3 --horizon 1000 --trace results/trace.csv
    """
    configure_logging(verbose)
    with exit_on_error():
        config = load_experiment(
            config_file,
            r_values=None if r is None else str(r),
            i_list=i_list,
            master_seed=seed,
            p1=p1, y=y, delta=delta, warmup=warmup, horizon=horizon, batches=batches,
            init=init, snapshot=snapshot, cells_per_row=cells_per_row,
        )
        if config.master_seed is None:
            console.print("[red]Error:[/red] A seed is required (--seed or MASTER_SEED)")
            raise typer.Exit(1)

        times = None
        if snapshots_dir is not None:
            times = config.snapshot_times
            if snapshot_times is not None:
                times = parse_list_flag(snapshot_times)

        run_r = config.r_values[0]
        if verbose:
            console.print(f"[dim]r={run_r:g} p1={config.p1:g} y={config.window_y:g} "
                          f"delta={config.window_delta:g} init={config.init.value}[/dim]")

        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            console=console,
            transient=True,
        ) as progress:
            progress.add_task(f"Simulating r={run_r:g} to t={config.horizon:g}...", total=None)
            result = run_single(
                config, trace=trace, snapshot_times=times, verify_every=verify_every
            )

        written = {}
        if snapshots_dir is not None:
            written = write_snapshots(result, snapshots_dir)

    console.print(f"\n[bold]r={run_r:g}[/bold]  events: {result.run.events}  "
                  f"final items: {len(result.run.state.config)}")
    console.print(estimates_table("Time averages (per r unless a count)", result.estimates))
    for item_type in (ItemType.ONE, ItemType.TWO):
        variance = format_estimate(result.counts.variance(item_type))
        console.print(f"  count{int(item_type)} variance: {variance}")

    if trace is not None:
        console.print(f"\n[green]✓[/green] Trace → {trace}")
    if written:
        console.print(f"[green]✓[/green] {len(written)} snapshot files → {snapshots_dir}")
