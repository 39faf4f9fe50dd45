"""
Observers plugged into ``simulate``: each sees the state before every
change together with the time that state is held.
"""

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence

import numpy as np

from halfpack.core.engine import SimState
from halfpack.core.estimator import DEFAULT_BATCHES, Estimate, TimeAverageEstimator
from halfpack.core.model import Configuration, ItemType, ModelParams
from halfpack.core.observables import (
    ObservableSnapshot,
    WindowSpec,
    scan_snapshot,
    series_names,
    snapshot_mismatches,
    snapshot_observables,
    snapshot_series,
    snapshot_violations,
)
from halfpack.utils.errors import ContractViolation
from halfpack.utils.log import get_logger

logger = get_logger(__name__)


@dataclass
class SeriesSummary:
    """Time-averaged window statistics of one run."""

    names: List[str]
    estimator: TimeAverageEstimator
    snapshots: int = 0
    recomputed: int = 0
    verified: int = 0

    def estimates(self) -> Dict[str, Estimate]:
        return dict(zip(self.names, self.estimator.finalize_all()))

    def merge(self, other: "SeriesSummary") -> "SeriesSummary":
        if other.names != self.names:
            raise ContractViolation("Cannot merge summaries with different columns")
        return SeriesSummary(
            names=self.names,
            estimator=self.estimator.merge(other.estimator),
            snapshots=self.snapshots + other.snapshots,
            recomputed=self.recomputed + other.recomputed,
            verified=self.verified + other.verified,
        )


class ObservableObserver:
    """
    Accumulates every window statistic, weighted by holding time.

    The window part of the snapshot only depends on cells below the window
    limit, so it is recomputed only when the last event touched that
    region. Structural properties are asserted on every recomputed
    snapshot; with ``verify_every`` > 0, every n-th snapshot is also checked
    against the full lattice scan.
    """

    name = "observables"

    def __init__(
        self,
        params: ModelParams,
        window: WindowSpec,
        warmup: float,
        horizon: float,
        batches: int = DEFAULT_BATCHES,
        check: bool = True,
        verify_every: int = 0,
    ):
        self.params = params
        self.window = window
        self.check = check
        self.verify_every = verify_every
        self._limit = window.bounds(params).limit
        self._names = series_names(window.i_list)
        self._estimator = TimeAverageEstimator(warmup, horizon, batches, width=len(self._names))
        self._snap: Optional[ObservableSnapshot] = None
        self._series: Optional[np.ndarray] = None
        self._version = -1
        self._snapshots = 0
        self._recomputed = 0
        self._verified = 0

    @property
    def names(self) -> List[str]:
        return list(self._names)

    def current(self, state: SimState) -> ObservableSnapshot:
        """Snapshot of ``state.config``, refreshed from the cache where possible."""
        config = state.config
        if self._snap is not None and config.version == self._version:
            return self._snap

        delta = state.last_delta
        local = (
            self._snap is not None
            and config.version == self._version + 1
            and delta is not None
            and delta.item.start >= self._limit
        )
        if local:
            self._snap = replace(
                self._snap,
                count1=config.counts[ItemType.ONE],
                count2=config.counts[ItemType.TWO],
                extent=config.rightmost_extent,
                total_occupied=config.total_occupied,
            )
        else:
            self._snap = snapshot_observables(config, self.params, self.window)
            self._recomputed += 1
            if self.check:
                self._assert_structure(self._snap, state)
        self._version = config.version
        self._series = snapshot_series(self._snap, self.params, self.window)
        return self._snap

    def observe(self, state: SimState, hold: float) -> None:
        snap = self.current(state)
        self._snapshots += 1
        if self.verify_every and self._snapshots % self.verify_every == 0:
            self._verify(snap, state)
        self._estimator.accumulate(self._series, hold, state.clock)

    def finish(self, state: SimState) -> SeriesSummary:
        logger.debug(
            "observables: %d snapshots, %d recomputed, %d verified",
            self._snapshots, self._recomputed, self._verified,
        )
        return SeriesSummary(
            names=self.names,
            estimator=self._estimator,
            snapshots=self._snapshots,
            recomputed=self._recomputed,
            verified=self._verified,
        )

    def _assert_structure(self, snap: ObservableSnapshot, state: SimState):
        problems = snapshot_violations(snap, self.params, self.window)
        if problems:
            raise ContractViolation(
                f"Snapshot at clock {state.clock:.6f} breaks window bounds",
                details="; ".join(problems),
            )

    def _verify(self, snap: ObservableSnapshot, state: SimState):
        reference = scan_snapshot(state.config, self.params, self.window)
        diffs = snapshot_mismatches(snap, reference)
        self._verified += 1
        if diffs:
            raise ContractViolation(
                f"Snapshot at clock {state.clock:.6f} differs from full scan",
                details=", ".join(f"{k}: {a} != {b}" for k, (a, b) in diffs.items()),
            )


@dataclass
class CountSummary:
    """Time-weighted item-count statistics of one run."""

    estimator: TimeAverageEstimator
    histograms: Dict[ItemType, np.ndarray]
    samples: Dict[ItemType, List[int]] = field(default_factory=dict)

    def _column(self, item_type: ItemType) -> int:
        return 0 if item_type is ItemType.ONE else 1

    def mean(self, item_type: ItemType) -> Estimate:
        return self.estimator.finalize(self._column(item_type))

    def variance(self, item_type: ItemType) -> Estimate:
        """
        Stationary variance E[n^2] - E[n]^2 from the pooled time averages.

        The interval comes from the linearised per-batch values
        m2 - 2 mu m1 + mu^2, with mu the pooled mean, so slow fluctuations
        between batches are counted.
        """
        col = self._column(item_type)
        elapsed = self.estimator.elapsed
        if elapsed <= 0:
            return Estimate.undetermined(0)
        pooled = self.estimator.integral / elapsed
        mu = float(pooled[col])
        value = float(pooled[col + 2]) - mu * mu

        means = self.estimator.batch_means()
        spread = Estimate.from_batch_means(means[:, col + 2] - 2 * mu * means[:, col] + mu * mu)
        return replace(spread, mean=value)

    def distribution(self, item_type: ItemType) -> np.ndarray:
        """Fraction of measured time spent at each count value."""
        hist = self.histograms[item_type]
        total = hist.sum()
        return hist / total if total > 0 else hist


class CountObserver:
    """
    Tracks the numbers of 1-items and 2-items.

    Besides time averages of n and n^2 it keeps time-weighted histograms and
    samples the counts every ``sample_every`` time units after warm-up, for
    goodness-of-fit tests on approximately independent draws.
    """

    name = "counts"

    def __init__(
        self,
        warmup: float,
        horizon: float,
        batches: int = DEFAULT_BATCHES,
        sample_every: float = 5.0,
    ):
        self.warmup = warmup
        self.horizon = horizon
        self.sample_every = sample_every
        self._estimator = TimeAverageEstimator(warmup, horizon, batches, width=4)
        self._hist = {ItemType.ONE: np.zeros(16), ItemType.TWO: np.zeros(16)}
        self._samples: Dict[ItemType, List[int]] = {ItemType.ONE: [], ItemType.TWO: []}
        self._next_sample = warmup

    def observe(self, state: SimState, hold: float) -> None:
        counts = state.config.counts
        n1, n2 = counts[ItemType.ONE], counts[ItemType.TWO]
        self._estimator.accumulate((n1, n2, n1 * n1, n2 * n2), hold, state.clock)

        start = max(state.clock, self.warmup)
        end = min(state.clock + hold, self.horizon)
        if end > start:
            self._add(ItemType.ONE, n1, end - start)
            self._add(ItemType.TWO, n2, end - start)

        while self._next_sample < min(state.clock + hold, self.horizon):
            if self._next_sample >= state.clock:
                self._samples[ItemType.ONE].append(n1)
                self._samples[ItemType.TWO].append(n2)
            self._next_sample += self.sample_every

    def finish(self, state: SimState) -> CountSummary:
        return CountSummary(
            estimator=self._estimator,
            histograms={t: h.copy() for t, h in self._hist.items()},
            samples={t: list(s) for t, s in self._samples.items()},
        )

    def _add(self, item_type: ItemType, count: int, weight: float):
        hist = self._hist[item_type]
        if count >= hist.size:
            grown = np.zeros(max(2 * hist.size, count + 1))
            grown[:hist.size] = hist
            self._hist[item_type] = hist = grown
        hist[count] += weight


class SnapshotRecorder:
    """Copies the configuration in effect at each requested time."""

    name = "snapshots"

    def __init__(self, times: Sequence[float]):
        self._pending = sorted(float(t) for t in times if math.isfinite(t) and t >= 0)
        self._taken: Dict[float, Configuration] = {}

    def observe(self, state: SimState, hold: float) -> None:
        until = state.clock + hold
        while self._pending and self._pending[0] < until:
            self._taken[self._pending.pop(0)] = state.config.copy()

    def finish(self, state: SimState) -> Dict[float, Configuration]:
        while self._pending and self._pending[0] <= state.clock:
            self._taken[self._pending.pop(0)] = state.config.copy()
        if self._pending:
            logger.debug("snapshot times past the horizon skipped: %s", self._pending)
        return dict(self._taken)
