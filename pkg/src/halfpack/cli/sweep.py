"""Sweep command - steady-state estimates over a list of r values."""

from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.progress import BarColumn, MofNCompleteColumn, Progress, SpinnerColumn, TextColumn
from rich.table import Table

from halfpack.cli.options import load_experiment
from halfpack.core.experiments import POOLED, run_sweep, write_results
from halfpack.utils.errors import exit_on_error
from halfpack.utils.log import configure_logging

console = Console()

SUMMARY_COLUMNS = ["ones_p1", "twos_optimal", "wasted", "G1", "Gdelta", "U_inf", "P_G1_zero"]


def sweep(
    config_file: Optional[Path] = typer.Option(
        None, "--config", "-c", help="Experiment config file"
    ),
    seed: Optional[int] = typer.Option(None, "--seed", "-s", help="Master seed (required)"),
    r_values: Optional[str] = typer.Option(None, "--r-values", "-r", help="e.g. 125,250,500"),
    p1: Optional[float] = typer.Option(None, "--p1", help="Fraction of 1-items"),
    y: Optional[float] = typer.Option(None, "--y", help="Window end y (default p1 + p2)"),
    delta: Optional[float] = typer.Option(None, "--delta", help="Sub-window offset delta"),
    i_list: Optional[str] = typer.Option(None, "--i-list", help="U caps, e.g. 1,2,4,8,inf"),
    warmup: Optional[float] = typer.Option(None, "--warmup", help="Warm-up time"),
    horizon: Optional[float] = typer.Option(None, "--horizon", help="Run length"),
    replications: Optional[int] = typer.Option(None, "--replications", "-n", help="Runs per r"),
    batches: Optional[int] = typer.Option(None, "--batches", help="Batches per run"),
    init: Optional[str] = typer.Option(None, "--init", help="empty, opposite or snapshot"),
    snapshot: Optional[Path] = typer.Option(None, "--snapshot", help="Initial configuration file"),
    output_dir: Optional[Path] = typer.Option(None, "--output", "-o", help="Output directory"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Parallel processes"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Verbose output"),
):
    """
    Run replications for every r and write sweep.csv and sweep.json.

    Examples:
        halfpack sweep --seed 1
        halfpack sweep -c configs/sweep.conf --seed 1 -w 4 -o results/
        halfpack sweep --seed 2 -r 20,50 --horizon 2000 --warmup 200
    """
    configure_logging(verbose)
    with exit_on_error():
        config = load_experiment(
            config_file,
            r_values=r_values,
            i_list=i_list,
            master_seed=seed,
            p1=p1, y=y, delta=delta, warmup=warmup, horizon=horizon,
            replications=replications, batches=batches, init=init, snapshot=snapshot,
            output_dir=output_dir, workers=workers,
        )
        if config.master_seed is None:
            console.print("[red]Error:[/red] sweep needs a seed (--seed or MASTER_SEED)")
            raise typer.Exit(1)

        total = len(config.r_values) * config.replications
        console.print("\n[bold]halfpack sweep[/bold]")
        console.print(f"r: {', '.join(f'{r:g}' for r in config.r_values)}")
        console.print(f"Replications: {config.replications} × horizon {config.horizon:g} "
                      f"(warm-up {config.warmup:g}), seed {config.master_seed}")
        console.print(f"Output: {config.output_dir}\n")

        with Progress(
            SpinnerColumn(),
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            MofNCompleteColumn(),
            console=console,
        ) as progress:
            task = progress.add_task("Running replications...", total=total)

            def done(res):
                progress.update(
                    task, advance=1,
                    description=f"r={res.r:g} #{res.replication} ({res.events} events)",
                )

            result = run_sweep(config, progress=done)

        paths = write_results(result, config.output_dir)

    pooled = result.table[result.table["replication"] == POOLED]
    table = Table(title="Pooled estimates (per r)")
    table.add_column("r", justify="right", style="cyan")
    for name in SUMMARY_COLUMNS:
        table.add_column(name, justify="right")
    for _, row in pooled.iterrows():
        table.add_row(
            f"{row['r']:g}",
            *[f"{row[name]:.4g} ± {row[name + '_ci']:.2g}" for name in SUMMARY_COLUMNS],
        )
    console.print(table)

    console.print("\n[bold green]Sweep completed![/bold green]")
    console.print(f"  [green]✓[/green] table    → {paths['csv']}")
    console.print(f"  [green]✓[/green] metadata → {paths['json']}")
    if verbose:
        console.print(f"[dim]{result.metadata['events']} events in "
                      f"{result.metadata['elapsed_seconds']}s[/dim]")
