"""halfpack command-line interface."""
