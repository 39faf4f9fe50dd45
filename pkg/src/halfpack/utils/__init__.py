"""halfpack utility modules."""

from halfpack.utils.errors import (
    ConfigurationError,
    ContractViolation,
    HalfpackError,
    OutputError,
    SnapshotFormatError,
    TraceFormatError,
)
from halfpack.utils.log import configure_logging, get_logger

__all__ = [
    "HalfpackError",
    "ConfigurationError",
    "ContractViolation",
    "SnapshotFormatError",
    "TraceFormatError",
    "OutputError",
    "configure_logging",
    "get_logger",
]
