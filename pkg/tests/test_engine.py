"""Tests for the event loop, initial states and reproducibility."""

import math

import numpy as np
import pytest

from halfpack.core.engine import (
    Event,
    EventKind,
    InitKind,
    SimState,
    apply_event,
    draw_next_event,
    make_initial,
    opposite_layout,
    replication_seed,
    simulate,
)
from halfpack.core.model import Configuration, ItemType, ModelParams
from halfpack.core.observers import CountObserver
from halfpack.core.render import save_snapshot
from halfpack.utils.errors import ConfigurationError, ContractViolation, SnapshotFormatError


def fresh(r=10.0, p1=0.5, seed=0, kind=InitKind.EMPTY):
    return make_initial(kind, ModelParams.from_p1(r, p1), seed)


class TestDrawNextEvent:
    def test_empty_system_always_arrives(self):
        state = fresh(seed=3)
        for _ in range(200):
            assert draw_next_event(state).kind is EventKind.ARRIVAL

    def test_does_not_advance_clock(self):
        state = fresh()
        event = draw_next_event(state)
        assert state.clock == 0.0
        assert event.at == pytest.approx(event.hold)

    def test_rate_arithmetic(self):
        params = ModelParams.from_p1(1.0, 0.5)
        config = Configuration.from_layout([(ItemType.TWO, 0)])
        state = SimState.from_config(params, config, seed=11)
        draws = 40_000
        arrivals = ones = 0
        for _ in range(draws):
            event = draw_next_event(state)
            if event.kind is EventKind.ARRIVAL:
                arrivals += 1
                ones += event.item_type is ItemType.ONE
            else:
                assert event.item_id == 0
        # P(arrival) = 1/2, P(type-1 arrival) = 1/4; tolerance is 5 standard errors
        assert arrivals / draws == pytest.approx(0.5, abs=5 * math.sqrt(0.25 / draws))
        assert ones / draws == pytest.approx(0.25, abs=5 * math.sqrt(0.1875 / draws))

    def test_arrival_rate(self):
        r, horizon = 10.0, 2000.0
        arrivals = 0

        def count(delta):
            nonlocal arrivals
            arrivals += delta.event.kind is EventKind.ARRIVAL

        simulate(fresh(r=r, seed=5), horizon, on_event=count)
        standard_error = math.sqrt(r / horizon)
        assert abs(arrivals / horizon - r) <= 3 * standard_error


class TestApplyEvent:
    def test_two_item_on_empty(self):
        state = fresh()
        event = Event(EventKind.ARRIVAL, at=0.5, hold=0.5, item_type=ItemType.TWO)
        delta = apply_event(state, event)
        assert delta.placement == 0
        assert (delta.item.start, delta.item.end) == (0, 2)
        assert state.clock == 0.5
        assert state.live_item_count == 1

    def test_departure_of_sole_item(self):
        state = fresh()
        arrival = apply_event(state, Event(EventKind.ARRIVAL, 0.1, 0.1, item_type=ItemType.ONE))
        delta = apply_event(
            state, Event(EventKind.DEPARTURE, 0.3, 0.2, item_id=arrival.item.id)
        )
        assert delta.placement is None
        assert len(state.config) == 0
        assert state.config.rightmost_extent == 0
        assert state.index.leftmost_fit(2) == 0

    def test_departure_of_dead_item(self):
        state = fresh()
        with pytest.raises(ContractViolation):
            apply_event(state, Event(EventKind.DEPARTURE, 0.1, 0.1, item_id=42))

    def test_event_before_clock(self):
        state = fresh()
        state.clock = 1.0
        with pytest.raises(ContractViolation):
            apply_event(state, Event(EventKind.ARRIVAL, 0.5, 0.0, item_type=ItemType.ONE))

    def test_conservation_per_event(self):
        state = fresh(r=20, seed=9)
        for _ in range(2000):
            live, occupied = state.live_item_count, state.config.total_occupied
            clock = state.clock
            delta = apply_event(state, draw_next_event(state))
            size = delta.item.size
            if delta.event.kind is EventKind.ARRIVAL:
                assert state.live_item_count == live + 1
                assert state.config.total_occupied == occupied + size
            else:
                assert state.live_item_count == live - 1
                assert state.config.total_occupied == occupied - size
            assert state.clock >= clock
            assert state.live_item_count == len(state.config)

    def test_index_mirrors_configuration(self):
        state = fresh(r=30, seed=4)
        for _ in range(3000):
            apply_event(state, draw_next_event(state))
        extent = state.config.rightmost_extent
        bitmap = np.array(state.index.bitmap()[:extent], dtype=bool)
        assert (bitmap == (state.config.kinds(extent) != 0)).all()
        assert state.index.capacity >= extent + 2


class TestMakeInitial:
    def test_empty(self):
        assert fresh().config.rightmost_extent == 0

    def test_opposite_small(self):
        config = opposite_layout(ModelParams.from_p1(4, 0.5))
        assert config.layout() == [(0, 2, 0), (1, 2, 2), (2, 1, 4), (3, 1, 5)]

    def test_opposite_large(self):
        state = fresh(r=5000, kind=InitKind.OPPOSITE)
        config = state.config
        assert config.counts[ItemType.TWO] == 2500
        assert config.counts[ItemType.ONE] == 2500
        assert config.rightmost_extent == 7500
        kinds = config.kinds(7500)
        assert (kinds[:5000] == ItemType.TWO).all()
        assert (kinds[5000:] == ItemType.ONE).all()
        assert state.live_item_count == 5000

    def test_from_snapshot(self, tmp_path, optimal_config):
        path = save_snapshot(optimal_config, tmp_path / "state.txt", cells_per_row=4)
        state = make_initial("snapshot", ModelParams.from_p1(4, 0.5), 0, path)
        assert state.config.layout() == optimal_config.layout()

    def test_snapshot_needs_path(self):
        with pytest.raises(ConfigurationError):
            make_initial(InitKind.SNAPSHOT, ModelParams.from_p1(4, 0.5))

    def test_malformed_snapshot(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("12.2\n")
        with pytest.raises(SnapshotFormatError):
            make_initial(InitKind.SNAPSHOT, ModelParams.from_p1(4, 0.5), 0, path)


class TestSimulate:
    def test_zero_horizon(self):
        state = fresh()
        result = simulate(state, 0.0)
        assert result.events == 0
        assert result.clock == 0.0
        assert len(result.state.config) == 0

    def test_clock_ends_at_horizon(self):
        result = simulate(fresh(seed=2), 5.0)
        assert result.clock == 5.0
        assert result.events > 0

    def test_golden_trace_reproducible(self):
        def run():
            records = []
            state = fresh(r=10, seed=replication_seed(77, 0, 0))
            for _ in range(1000):
                delta = apply_event(state, draw_next_event(state))
                records.append((delta.index, delta.clock, delta.event.kind, delta.item))
            return records, state.config.layout()

        assert run() == run()

    def test_distinct_replications_differ(self):
        a = simulate(fresh(seed=replication_seed(1, 0, 0)), 3.0)
        b = simulate(fresh(seed=replication_seed(1, 0, 1)), 3.0)
        assert a.state.config.layout() != b.state.config.layout()

    def test_observers_receive_all_time(self):
        seen = []

        class Recorder:
            name = "holds"

            def observe(self, state, hold):
                seen.append((state.clock, hold))

            def finish(self, state):
                return len(seen)

        result = simulate(fresh(seed=8), 4.0, [Recorder()])
        assert result.outputs["holds"] == result.events + 1
        assert sum(hold for _, hold in seen) == pytest.approx(4.0)
        for (clock, hold), (next_clock, _) in zip(seen, seen[1:]):
            assert clock + hold == pytest.approx(next_clock)


@pytest.mark.slow
def test_stationary_counts_are_poisson_means():
    params = ModelParams.from_p1(50, 0.5)
    counts = CountObserver(warmup=200, horizon=2000)
    result = simulate(make_initial(InitKind.EMPTY, params, 21), 2000, [counts])
    summary = result.outputs["counts"]
    for item_type in (ItemType.ONE, ItemType.TWO):
        mean = summary.mean(item_type)
        assert abs(mean.mean - 25) <= 3 * mean.std_error
        variance = summary.variance(item_type)
        assert abs(variance.mean - 25) <= 3 * variance.std_error
