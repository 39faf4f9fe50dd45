"""Library logging routed through rich."""

import logging

from rich.logging import RichHandler

_LOGGER_NAME = "halfpack"


def get_logger(name: str = _LOGGER_NAME) -> logging.Logger:
    """Return a child of the package logger (``halfpack.<name>``)."""
    if name == _LOGGER_NAME or name.startswith(_LOGGER_NAME + "."):
        return logging.getLogger(name)
    return logging.getLogger(f"{_LOGGER_NAME}.{name}")


def configure_logging(verbose: bool = False) -> None:
    """
    Attach a RichHandler to the package logger.

    Safe to call more than once; the handler is only installed the first time.

    Args:
        verbose: Log at DEBUG instead of WARNING
    """
    root = logging.getLogger(_LOGGER_NAME)
    root.setLevel(logging.DEBUG if verbose else logging.WARNING)

    if not any(isinstance(h, RichHandler) for h in root.handlers):
        handler = RichHandler(show_path=False, rich_tracebacks=True)
        handler.setFormatter(logging.Formatter("%(message)s"))
        root.addHandler(handler)
