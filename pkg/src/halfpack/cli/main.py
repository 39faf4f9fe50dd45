"""
halfpack CLI - Main entry point.

Usage:
    halfpack simulate --r 500 --seed 7          # One run, window statistics
    halfpack sweep --seed 1 -r 125,250,500      # Steady-state table over r
    halfpack replay results/trace.csv           # Verify a recorded trace
    halfpack snapshot results/transient/t.txt     # Render a stored configuration
"""

import typer
from rich.console import Console

from halfpack import __version__
from halfpack.cli.replay import replay
from halfpack.cli.simulate import simulate
from halfpack.cli.snapshot import snapshot
from halfpack.cli.sweep import sweep

# Create main app
app = typer.Typer(
    name="halfpack",
    help="Dynamic first-fit packing of 1-items and 2-items on the half-axis",
    add_completion=False,
    context_settings={"help_option_names": ["-h", "--help"]},
)

console = Console()


def version_callback(value: bool):
    if value:
        console.print(f"halfpack version {__version__}")
        raise typer.Exit()


@app.callback()
def main(
    version: bool = typer.Option(
        False, "--version", "-V", callback=version_callback, is_eager=True,
        help="Show version and exit"
    ),
):
    """halfpack - dynamic first-fit packing simulator and measurement lab."""
    pass


app.command()(simulate)
app.command()(sweep)
app.command()(replay)
app.command()(snapshot)


if __name__ == "__main__":
    app()
