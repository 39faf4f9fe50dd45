"""Tests for the simulation observers."""

import numpy as np
import pytest

from halfpack.core.engine import InitKind, make_initial, simulate
from halfpack.core.estimator import TimeAverageEstimator
from halfpack.core.model import ItemType, ModelParams
from halfpack.core.observables import WindowSpec, scan_snapshot, series_names, snapshot_mismatches
from halfpack.core.observers import (
    CountObserver,
    CountSummary,
    ObservableObserver,
    SnapshotRecorder,
)


@pytest.fixture
def params():
    return ModelParams.from_p1(40, 0.5)


def observable_run(params, horizon=5.0, seed=1, **kwargs):
    window = WindowSpec.default(params)
    observer = ObservableObserver(params, window, warmup=1.0, horizon=horizon, batches=8, **kwargs)
    result = simulate(make_initial(InitKind.EMPTY, params, seed), horizon, [observer])
    return observer, result


class TestObservableObserver:
    def test_columns(self, params):
        _, result = observable_run(params)
        summary = result.outputs["observables"]
        assert summary.names == series_names(WindowSpec.default(params).i_list)
        estimates = summary.estimates()
        assert set(estimates) == set(summary.names)
        assert estimates["count1"].mean > 0
        assert 0 <= estimates["P_G1_zero"].mean <= 1

    def test_cache_skips_far_events(self, params):
        _, result = observable_run(params, horizon=20.0)
        summary = result.outputs["observables"]
        assert summary.snapshots == result.events + 1
        assert summary.recomputed <= summary.snapshots

    def test_cached_snapshot_matches_scan(self, params):
        observer, result = observable_run(params, horizon=8.0, verify_every=1)
        assert result.outputs["observables"].verified == result.events + 1

    def test_current_matches_scan_after_run(self, params):
        observer, result = observable_run(params, horizon=6.0, seed=4)
        state = result.state
        reference = scan_snapshot(state.config, params, WindowSpec.default(params))
        assert snapshot_mismatches(observer.current(state), reference) == {}

    def test_summaries_merge(self, params):
        _, first = observable_run(params, seed=1)
        _, second = observable_run(params, seed=2)
        merged = first.outputs["observables"].merge(second.outputs["observables"])
        assert merged.estimator.batches == 16
        assert merged.snapshots == (
            first.outputs["observables"].snapshots + second.outputs["observables"].snapshots
        )


class TestCountObserver:
    def test_means_and_histogram(self, params):
        counts = CountObserver(warmup=2.0, horizon=30.0, batches=10, sample_every=1.0)
        result = simulate(make_initial(InitKind.EMPTY, params, 3), 30.0, [counts])
        summary = result.outputs["counts"]
        for item_type in (ItemType.ONE, ItemType.TWO):
            hist = summary.histograms[item_type]
            assert hist.sum() == pytest.approx(28.0)
            distribution = summary.distribution(item_type)
            mean_from_hist = float((distribution * np.arange(distribution.size)).sum())
            assert mean_from_hist == pytest.approx(summary.mean(item_type).mean)
            assert len(summary.samples[item_type]) == 28

    def test_variance_of_constant_count(self, params):
        counts = CountObserver(warmup=0.0, horizon=1.0, batches=4)
        state = make_initial(InitKind.OPPOSITE, params, 0)
        counts.observe(state, 1.0)
        summary = counts.finish(state)
        variance = summary.variance(ItemType.ONE)
        assert variance.mean == pytest.approx(0.0, abs=1e-9)
        assert summary.mean(ItemType.ONE).mean == pytest.approx(20.0)

    def test_variance_counts_changes_between_batches(self):
        estimator = TimeAverageEstimator(warmup=0.0, horizon=2.0, batches=2, width=4)
        estimator.accumulate((20, 0, 400, 0), 1.0, 0.0)
        estimator.accumulate((30, 0, 900, 0), 1.0, 1.0)
        summary = CountSummary(estimator=estimator, histograms={})
        variance = summary.variance(ItemType.ONE)
        assert variance.mean == pytest.approx(25.0)
        assert variance.batches == 2
        assert not variance.inconclusive

    def test_variance_matches_histogram(self, params):
        counts = CountObserver(warmup=2.0, horizon=30.0, batches=10)
        result = simulate(make_initial(InitKind.EMPTY, params, 5), 30.0, [counts])
        summary = result.outputs["counts"]
        for item_type in (ItemType.ONE, ItemType.TWO):
            distribution = summary.distribution(item_type)
            values = np.arange(distribution.size)
            mean = float((distribution * values).sum())
            expected = float((distribution * values ** 2).sum()) - mean ** 2
            assert summary.variance(item_type).mean == pytest.approx(expected, rel=1e-6, abs=1e-9)


class TestSnapshotRecorder:
    def test_captures_requested_times(self, params):
        recorder = SnapshotRecorder([0.0, 1.0, 2.5, 3.0, 99.0])
        result = simulate(make_initial(InitKind.OPPOSITE, params, 2), 3.0, [recorder])
        taken = result.outputs["snapshots"]
        assert sorted(taken) == [0.0, 1.0, 2.5, 3.0]
        assert taken[0.0].layout() == make_initial(InitKind.OPPOSITE, params, 2).config.layout()
        assert taken[3.0].layout() == result.state.config.layout()

    def test_copies_are_frozen(self, params):
        recorder = SnapshotRecorder([0.5])
        result = simulate(make_initial(InitKind.EMPTY, params, 5), 4.0, [recorder])
        snap = result.outputs["snapshots"][0.5]
        assert snap.layout() != result.state.config.layout()
