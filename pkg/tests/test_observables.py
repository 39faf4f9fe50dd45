"""Tests for window statistics, profiles and the full-scan oracle."""

import math

import numpy as np
import pytest

from halfpack.core.model import Configuration, ItemType, ModelParams, enumerate_holes
from halfpack.core.observables import (
    INF,
    WindowSpec,
    count_U_pairs,
    rescaled_profile,
    scan_snapshot,
    series_names,
    snapshot_mismatches,
    snapshot_observables,
    snapshot_series,
    snapshot_violations,
    wasted_space,
)
from halfpack.utils.errors import ConfigurationError, ContractViolation


def layout(*parts):
    """Build a configuration from (type, start) pairs."""
    return Configuration.from_layout(parts)


def ones(*cells):
    return [(ItemType.ONE, c) for c in cells]


def twos(*cells):
    return [(ItemType.TWO, c) for c in cells]


@pytest.fixture
def nine_cell_window():
    """r = 9, p1 = 1/2, y = 1: the window is [0, 9)."""
    params = ModelParams.from_p1(9, 0.5)
    window = WindowSpec(y=1.0, delta=0.05)
    assert window.bounds(params).window == 9
    return params, window


class TestWindowSpec:
    def test_i_list_normalised(self):
        assert WindowSpec(y=1.0, i_list=(4, 1)).i_list == (1, 4, INF)

    def test_default(self):
        window = WindowSpec.default(ModelParams.from_p1(10, 0.4))
        assert window.y == pytest.approx(1.0)
        assert window.delta == pytest.approx(0.06)

    def test_delta_must_stay_below_y_minus_p1(self):
        params = ModelParams.from_p1(10, 0.5)
        with pytest.raises(ConfigurationError):
            WindowSpec(y=0.6, delta=0.2).validate(params)
        WindowSpec(y=0.6, delta=0.2).validate(params, need_u=False)

    def test_rejects_zero_cap(self):
        with pytest.raises(ConfigurationError):
            WindowSpec(y=1.0, i_list=(0, 2))


class TestSnapshot:
    def test_holes_and_d_with_tail(self, nine_cell_window):
        params, window = nine_cell_window
        config = layout(*ones(0, 1, 3, 6, 7))
        snap = snapshot_observables(config, params, window)
        assert snap.G == 1
        assert snap.D == 1
        assert snap.X == 5
        assert snap.Y == 5

    def test_fully_packed(self, nine_cell_window):
        params, window = nine_cell_window
        config = layout(*ones(*range(9)), *twos(9, 11, 13))
        snap = snapshot_observables(config, params, window)
        assert (snap.X, snap.D, snap.G) == (9, 0, 0)
        assert snap.wasted == 0

    def test_straddling_two_item(self, nine_cell_window):
        params, window = nine_cell_window
        config = layout(*twos(8))
        snap = snapshot_observables(config, params, window)
        assert (snap.Z, snap.X) == (0, 1)
        assert snap.D == 4

    def test_empty_configuration(self, nine_cell_window):
        params, window = nine_cell_window
        snap = snapshot_observables(Configuration(), params, window)
        assert (snap.X, snap.G, snap.G1, snap.Gdelta) == (0, 0, 0, 0)
        assert snap.D == 4
        assert snap.g1_zero and snap.g_zero_and_d_pos
        assert snap.wasted == params.optimal_cells

    def test_tail_is_never_an_odd_hole(self, nine_cell_window):
        params, window = nine_cell_window
        snap = snapshot_observables(layout(*ones(0, 1)), params, window)
        assert snap.G == 0
        assert snap.D == 3

    def test_hole_straddling_window_end_not_counted(self, nine_cell_window):
        params, window = nine_cell_window
        snap = snapshot_observables(layout(*ones(0, 6, 12)), params, window)
        # holes [1, 6) inside, [7, 12) straddles 9
        assert snap.G == 1
        assert snap.D == 2 + 1

    def test_flags(self, nine_cell_window):
        params, window = nine_cell_window
        snap = snapshot_observables(layout(*ones(0, 2, 4)), params, window)
        assert snap.G1 == 2
        assert not snap.g1_zero
        assert not snap.g_zero_and_d_pos


class TestUPairs:
    @pytest.fixture
    def paired(self):
        # odd holes {10,1} and {15,1}, only 2-items between them
        return layout(*ones(*range(10)), *twos(11, 13), *ones(16))

    def test_distance_cap(self, paired):
        assert count_U_pairs(paired, 0, 20, 1) == 0
        assert count_U_pairs(paired, 0, 20, 2) == 1
        assert count_U_pairs(paired, 0, 20, INF) == 1

    def test_pair_must_lie_inside(self, paired):
        assert count_U_pairs(paired, 11, 20, INF) == 0
        assert count_U_pairs(paired, 0, 15, INF) == 0

    def test_one_item_between_breaks_pair(self):
        config = layout(*ones(*range(10)), *ones(11), *twos(12), *ones(14), *ones(16))
        assert count_U_pairs(config, 0, 20, INF) == 0

    def test_right_hole_must_have_size_one(self):
        config = layout(*ones(*range(10)), *twos(11, 13), *ones(18))
        # right hole is [15, 18), length 3
        assert count_U_pairs(config, 0, 20, INF) == 0

    def test_even_hole_between_is_allowed(self):
        config = layout(*ones(0), *twos(2, 6), *ones(9))
        # odd holes [1, 2) and [8, 9); even hole [4, 6) between
        assert count_U_pairs(config, 0, 10, INF) == 1
        assert count_U_pairs(config, 0, 10, 2) == 0
        assert count_U_pairs(config, 0, 10, 3) == 1

    def test_invalid_bounds(self):
        with pytest.raises(ContractViolation):
            count_U_pairs(Configuration(), 5, 5, 1)

    def test_monotone_in_cap(self, rng, make_random_config):
        for _ in range(100):
            config = make_random_config(rng, 80, fill=0.8)
            counts = [count_U_pairs(config, 0, 80, i) for i in (1, 2, 4, 8, INF)]
            assert counts == sorted(counts)


class TestWasted:
    def test_optimal_configuration(self, half_params, optimal_config):
        assert wasted_space(optimal_config, half_params) == 0

    def test_empty(self, half_params):
        assert wasted_space(Configuration(), half_params) == 6

    def test_opposite_start_is_gapless(self, half_params):
        config = layout(*twos(0, 2), *ones(4, 5))
        assert wasted_space(config, half_params) == 0


class TestProfile:
    def test_empty(self):
        ones_profile, twos_profile = rescaled_profile(Configuration(), 10, 0.1)
        assert all(f == 0 for _, f in ones_profile + twos_profile)

    def test_optimal_shape_small(self, optimal_config):
        ones_profile, twos_profile = rescaled_profile(optimal_config, 4, 0.5)
        assert [x for x, _ in ones_profile] == [0.0, 0.5, 1.0, 1.5, 2.0]
        for (x, f1), (_, f2) in zip(ones_profile, twos_profile):
            assert f1 == min(x, 0.5)
            assert f2 == max(0.0, min((x - 0.5) / 2, 0.5))

    def test_optimal_shape_large(self):
        r = 100
        config = layout(*ones(*range(50)), *twos(*range(50, 150, 2)))
        ones_profile, twos_profile = rescaled_profile(config, r, 0.02)
        for (x, f1), (_, f2) in zip(ones_profile, twos_profile):
            assert f1 == pytest.approx(min(x, 0.5))
            assert f2 == pytest.approx(max(0.0, min((x - 0.5) / 2, 0.5)))

    def test_monotone_with_total_at_end(self, rng, make_random_config):
        for _ in range(20):
            config = make_random_config(rng, 120)
            r = 40.0
            ones_profile, twos_profile = rescaled_profile(config, r, 0.05)
            for profile, item_type in ((ones_profile, ItemType.ONE), (twos_profile, ItemType.TWO)):
                values = [f for _, f in profile]
                assert values == sorted(values)
                assert values[-1] == config.counts[item_type] / r

    def test_rejects_bad_step(self):
        with pytest.raises(ContractViolation):
            rescaled_profile(Configuration(), 10, 0.0)


def random_window(rng):
    r = float(rng.integers(15, 60))
    p1 = float(rng.uniform(0.2, 0.8))
    params = ModelParams.from_p1(r, p1)
    y = p1 + float(rng.uniform(0.05, 2 * (1 - p1) + 0.3))
    delta = float(rng.uniform(0, y - p1))
    i_list = tuple(int(i) for i in rng.choice([1, 2, 3, 4, 8], size=3, replace=False))
    return params, WindowSpec(y=y, delta=delta, i_list=i_list)


def check_against_scan(make_random_config, configs: int, seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(configs):
        params, window = random_window(rng)
        cells = int(rng.integers(1, 3 * params.r))
        fill = float(rng.uniform(0.3, 0.95))
        config = make_random_config(rng, cells, fill)
        fast = snapshot_observables(config, params, window)
        reference = scan_snapshot(config, params, window)
        assert snapshot_mismatches(fast, reference) == {}
        assert snapshot_violations(fast, params, window) == []
        assert fast.Gdelta <= fast.G


class TestOracle:
    def test_matches_full_scan(self, make_random_config):
        check_against_scan(make_random_config, 500, seed=3)

    @pytest.mark.slow
    def test_matches_full_scan_long(self, make_random_config):
        check_against_scan(make_random_config, 10_000, seed=4)

    def test_window_accounting(self, rng, make_random_config):
        params = ModelParams.from_p1(30, 0.5)
        window = WindowSpec.default(params)
        W = window.bounds(params).window
        for _ in range(200):
            config = make_random_config(rng, int(rng.integers(1, 60)))
            snap = snapshot_observables(config, params, window)
            holes = enumerate_holes(config, W)
            kinds = config.kinds(W + 1)
            clipped = 0
            if W and not kinds[W - 1] and not kinds[W]:
                occupied = np.flatnonzero(kinds[:W])
                clipped = W - (int(occupied[-1]) + 1 if occupied.size else 0)
            assert snap.X + sum(h.length for h in holes) + clipped == W
            assert 2 * snap.D <= W - snap.X

    def test_mismatch_is_reported(self, nine_cell_window):
        params, window = nine_cell_window
        a = snapshot_observables(layout(*ones(0, 2)), params, window)
        b = snapshot_observables(layout(*ones(0, 3)), params, window)
        diffs = snapshot_mismatches(a, b)
        assert "Y" not in diffs
        assert diffs["extent"] == (3, 4)
        assert snapshot_mismatches(a, a) == {}


class TestSeries:
    def test_names_match_vector(self, nine_cell_window):
        params, window = nine_cell_window
        snap = snapshot_observables(layout(*ones(0, 2, 5)), params, window)
        vector = snapshot_series(snap, params, window)
        names = series_names(window.i_list)
        assert vector.shape == (len(names),)
        values = dict(zip(names, vector))
        assert values["count1"] == 3
        assert values["Y"] == pytest.approx(3 / 9)
        assert values["P_G1_zero"] in (0.0, 1.0)
        assert "U_inf" in values and "U_1" in values
        assert values["extent_slack"] == pytest.approx((6 - 3) / 9)

    def test_gdelta_excess_is_finite(self, rng, make_random_config):
        params = ModelParams.from_p1(25, 0.5)
        window = WindowSpec.default(params)
        for _ in range(50):
            snap = snapshot_observables(make_random_config(rng, 60), params, window)
            vector = snapshot_series(snap, params, window)
            assert all(math.isfinite(v) for v in vector)
