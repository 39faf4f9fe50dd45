"""halfpack simulation core."""

from halfpack.core.engine import (
    InitKind,
    SimState,
    apply_event,
    draw_next_event,
    make_initial,
    simulate,
)
from halfpack.core.estimator import Estimate, TimeAverageEstimator
from halfpack.core.gap_index import FitIndex, naive_leftmost_fit
from halfpack.core.model import Configuration, ItemType, ModelParams, place_first_fit
from halfpack.core.observables import WindowSpec, snapshot_observables

__all__ = [
    "Configuration",
    "ItemType",
    "ModelParams",
    "place_first_fit",
    "FitIndex",
    "naive_leftmost_fit",
    "InitKind",
    "SimState",
    "apply_event",
    "draw_next_event",
    "make_initial",
    "simulate",
    "WindowSpec",
    "snapshot_observables",
    "Estimate",
    "TimeAverageEstimator",
]
