"""Allow running halfpack as a module: python -m halfpack"""

from halfpack.cli.main import app

if __name__ == "__main__":
    app()
