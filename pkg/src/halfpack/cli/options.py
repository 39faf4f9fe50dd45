"""Shared option handling: config file + flags -> validated ExperimentConfig."""

from pathlib import Path
from typing import Any, Dict, Optional

import typer
from rich.console import Console
from rich.table import Table

from halfpack.core.config import ExperimentConfig, build_config, parse_list_flag
from halfpack.core.estimator import Estimate
from halfpack.utils.validators import validate_experiment_config

console = Console()


def load_experiment(
    config_file: Optional[Path],
    r_values: Optional[str] = None,
    i_list: Optional[str] = None,
    **flags: Any,
) -> ExperimentConfig:
    """
    Build the effective configuration, print warnings, exit 1 on errors.

    HalfpackError from parsing propagates to the command's handler.
    """
    overrides: Dict[str, Any] = dict(flags)
    overrides["r_values"] = parse_list_flag(r_values)
    overrides["i_list"] = parse_list_flag(i_list, caps=True)
    config = build_config(config_file, **overrides)

    result = validate_experiment_config(config)
    for warning in result.warnings:
        console.print(f"[yellow]Warning:[/yellow] {warning}")
    if not result.ok:
        for error in result.errors:
            console.print(f"[red]Error:[/red] {error}")
        raise typer.Exit(1)
    return config


def format_estimate(est: Estimate) -> str:
    if est.inconclusive:
        return f"{est.mean:.5g} [dim](inconclusive)[/dim]"
    return f"{est.mean:.5g} ± {est.half_width:.2g}"


def estimates_table(title: str, estimates: Dict[str, Estimate]) -> Table:
    table = Table(title=title)
    table.add_column("Statistic", style="cyan")
    table.add_column("Estimate", justify="right")
    table.add_column("Batches", justify="right", style="dim")
    for name, est in estimates.items():
        table.add_row(name, format_estimate(est), str(est.batches))
    return table
