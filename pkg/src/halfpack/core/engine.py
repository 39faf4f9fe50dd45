"""
Continuous-time Markov chain simulation of dynamic first-fit packing.

Arrivals of type i come at rate p_i * r, every live item departs at rate 1.
The next event is drawn from competing exponential clocks (Gillespie): the
holding time is Exponential(r + N) and, by memorylessness, a departure is a
uniformly chosen live item.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Protocol, Sequence, Union

import numpy as np

from halfpack.core.gap_index import FitIndex
from halfpack.core.model import (
    Configuration,
    Item,
    ItemType,
    ModelParams,
    place_first_fit,
    remove_item,
    round_half_up,
)
from halfpack.core.render import load_snapshot
from halfpack.utils.errors import ConfigurationError, ContractViolation
from halfpack.utils.log import get_logger

logger = get_logger(__name__)

SeedLike = Union[int, Sequence[int], np.random.SeedSequence]


class InitKind(str, Enum):
    EMPTY = "empty"
    OPPOSITE = "opposite"
    SNAPSHOT = "snapshot"


class EventKind(str, Enum):
    ARRIVAL = "ARR"
    DEPARTURE = "DEP"


@dataclass(frozen=True)
class Event:
    """Next transition; ``at`` is the absolute time, ``hold`` the time spent before it."""

    kind: EventKind
    at: float
    hold: float
    item_type: Optional[ItemType] = None
    item_id: Optional[int] = None


@dataclass(frozen=True)
class DeltaRecord:
    """What one applied event did, in the form traces record it."""

    index: int
    clock: float
    event: Event
    item: Item

    @property
    def placement(self) -> Optional[int]:
        return self.item.start if self.event.kind is EventKind.ARRIVAL else None


@dataclass
class SimState:
    params: ModelParams
    config: Configuration
    index: FitIndex
    rng: np.random.Generator
    clock: float = 0.0
    event_count: int = 0
    last_delta: Optional[DeltaRecord] = None
    _live: List[int] = field(default_factory=list)
    _slot: Dict[int, int] = field(default_factory=dict)

    @classmethod
    def from_config(
        cls, params: ModelParams, config: Configuration, seed: SeedLike = 0
    ) -> "SimState":
        index = FitIndex.from_bitmap(config.kinds(config.rightmost_extent) != 0)
        state = cls(params=params, config=config, index=index, rng=make_rng(seed))
        for item_id in sorted(config.items):
            state._track(item_id)
        return state

    @property
    def live_item_count(self) -> int:
        return len(self._live)

    def live_item(self, slot: int) -> int:
        return self._live[slot]

    def _track(self, item_id: int):
        self._slot[item_id] = len(self._live)
        self._live.append(item_id)

    def _untrack(self, item_id: int):
        slot = self._slot.pop(item_id, None)
        if slot is None:
            raise ContractViolation(f"Departure of item {item_id}, which is not live")
        last = self._live.pop()
        if last != item_id:
            self._live[slot] = last
            self._slot[last] = slot


class Observer(Protocol):
    """Receives the state before every change, with the time it is held."""

    name: str

    def observe(self, state: SimState, hold: float) -> None: ...

    def finish(self, state: SimState) -> Any: ...


@dataclass
class RunResult:
    state: SimState
    outputs: Dict[str, Any]
    events: int
    clock: float


def make_rng(seed: SeedLike) -> np.random.Generator:
    """
    Seeded PCG64 generator.

    Replications derive independent substreams from a SeedSequence keyed by
    (master seed, ...), see ``replication_seed``.
    """
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    return np.random.default_rng(np.random.SeedSequence(seed))


def replication_seed(master_seed: int, *key: int) -> np.random.SeedSequence:
    """Independent substream for one replication, e.g. key = (r_index, replication)."""
    return np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))


def draw_next_event(state: SimState) -> Event:
    """
    Sample the next transition without applying it.

    An empty system always draws an arrival.
    """
    params = state.params
    live = state.live_item_count
    total = params.r + live
    hold = float(state.rng.exponential(1.0 / total))
    at = state.clock + hold

    u = float(state.rng.random()) * total
    if u < params.r:
        item_type = ItemType.ONE if u < params.p1 * params.r else ItemType.TWO
        return Event(EventKind.ARRIVAL, at=at, hold=hold, item_type=item_type)

    # u - r is uniform on [0, live): its integer part picks the departing item.
    slot = min(int(u - params.r), live - 1)
    return Event(EventKind.DEPARTURE, at=at, hold=hold, item_id=state.live_item(slot))


def apply_event(state: SimState, event: Event) -> DeltaRecord:
    """Apply an arrival (first-fit) or departure to the state and advance the clock."""
    if event.at < state.clock:
        raise ContractViolation(f"Event at {event.at} precedes clock {state.clock}")

    if event.kind is EventKind.ARRIVAL:
        item = place_first_fit(state.config, event.item_type, state.index)
        state.index.set_occupied(item.start, item.size)
        state._track(item.id)
    else:
        state._untrack(event.item_id)
        item = remove_item(state.config, event.item_id)
        state.index.set_free(item.start, item.size)

    state.clock = event.at
    delta = DeltaRecord(index=state.event_count, clock=event.at, event=event, item=item)
    state.event_count += 1
    state.last_delta = delta
    return delta


def opposite_layout(params: ModelParams) -> Configuration:
    """All 2-items packed from the origin, then all 1-items, no gaps."""
    n2 = round_half_up(params.p2 * params.r)
    n1 = round_half_up(params.p1 * params.r)
    layout = [(ItemType.TWO, 2 * k) for k in range(n2)]
    layout += [(ItemType.ONE, 2 * n2 + k) for k in range(n1)]
    return Configuration.from_layout(layout)


def make_initial(
    kind: Union[InitKind, str],
    params: ModelParams,
    seed: SeedLike = 0,
    snapshot: Optional[Union[str, Path]] = None,
) -> SimState:
    """
    Build the starting state.

    Args:
        kind: empty, opposite or snapshot
        params: Model parameters
        seed: Seed or SeedSequence for the run's generator
        snapshot: Pixmap file to load when kind is snapshot

    Raises:
        SnapshotFormatError: If the snapshot file is malformed
        ConfigurationError: If kind is snapshot and no path is given
    """
    kind = InitKind(kind)
    if kind is InitKind.EMPTY:
        config = Configuration()
    elif kind is InitKind.OPPOSITE:
        config = opposite_layout(params)
    else:
        if snapshot is None:
            raise ConfigurationError(
                "Snapshot initial state needs a file",
                suggestion="Set SNAPSHOT=<path> or pass --snapshot.",
            )
        config = load_snapshot(snapshot)
    return SimState.from_config(params, config, seed)


def simulate(
    init: SimState,
    horizon: float,
    observers: Sequence[Observer] = (),
    on_event: Optional[Callable[[DeltaRecord], None]] = None,
) -> RunResult:
    """
    Run the chain from ``init`` until the clock reaches ``horizon``.

    Before each state change every observer sees the current state and the
    time it is held, so time-weighted statistics are exact. The last
    holding interval is clipped at ``horizon`` and the event ending it is
    not applied.
    """
    if not math.isfinite(horizon):
        raise ContractViolation(f"Horizon must be finite, got {horizon}")

    state = init
    while state.clock < horizon:
        event = draw_next_event(state)
        if event.at >= horizon:
            for observer in observers:
                observer.observe(state, horizon - state.clock)
            state.clock = horizon
            break
        for observer in observers:
            observer.observe(state, event.hold)
        delta = apply_event(state, event)
        if on_event is not None:
            on_event(delta)

    logger.debug(
        "run finished: %d events, clock %.3f, %d live items",
        state.event_count, state.clock, state.live_item_count,
    )
    outputs = {observer.name: observer.finish(state) for observer in observers}
    return RunResult(state=state, outputs=outputs, events=state.event_count, clock=state.clock)
