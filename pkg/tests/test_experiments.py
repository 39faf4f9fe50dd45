"""Tests for sweeps, result tables and snapshot output."""

import json
import logging

import pandas as pd
import pytest

from halfpack.core.config import build_config
from halfpack.core.experiments import (
    POOLED,
    build_table,
    run_replication,
    run_single,
    run_sweep,
    single_run_seed,
    write_results,
    write_snapshots,
)
from halfpack.core.render import load_snapshot
from halfpack.utils.errors import ConfigurationError


def sweep_config(**overrides):
    settings = dict(
        master_seed=11, r_values=[10, 20], warmup=1.0, horizon=6.0,
        replications=2, batches=4,
    )
    settings.update(overrides)
    return build_config(**settings)


@pytest.fixture(scope="module")
def sweep():
    return run_sweep(sweep_config())


class TestSweep:
    def test_table_shape(self, sweep):
        table = sweep.table
        assert len(table) == 2 * (2 + 1)
        assert list(table["replication"]) == ["0", "1", POOLED] * 2
        assert list(table["r"]) == [10, 10, 10, 20, 20, 20]
        assert "wasted" in table.columns and "wasted_ci" in table.columns
        assert "U_inf_ci" in table.columns

    def test_pooled_events(self, sweep):
        table = sweep.table
        for r in (10, 20):
            rows = table[table["r"] == r]
            per_rep = rows[rows["replication"] != POOLED]["events"].sum()
            assert rows[rows["replication"] == POOLED]["events"].iloc[0] == per_rep

    def test_metadata(self, sweep):
        meta = sweep.metadata
        assert meta["master_seed"] == 11
        assert meta["z_limit"] == pytest.approx(0.25)
        assert set(meta["warmup_sensitivity"]) == {"10", "20"}
        assert meta["events"] == sum(res.events for res in sweep.replications)

    def test_requires_seed(self):
        with pytest.raises(ConfigurationError):
            run_sweep(sweep_config(master_seed=None))

    def test_replication_is_order_free(self, sweep):
        again = run_replication(sweep_config(), r_index=1, replication=0)
        original = next(
            res for res in sweep.replications if res.r_index == 1 and res.replication == 0
        )
        assert again.events == original.events

    def test_table_ignores_completion_order(self, sweep):
        shuffled = list(reversed(sweep.replications))
        pd.testing.assert_frame_equal(build_table(shuffled), sweep.table)

    def test_parallel_matches_sequential(self, sweep):
        parallel = run_sweep(sweep_config(workers=2))
        pd.testing.assert_frame_equal(parallel.table, sweep.table)


class TestWriteResults:
    def test_same_seed_same_csv(self, tmp_path, sweep):
        first = write_results(sweep, tmp_path / "a")
        second = write_results(run_sweep(sweep_config()), tmp_path / "b")
        assert first["csv"].read_bytes() == second["csv"].read_bytes()

    def test_files(self, tmp_path, sweep):
        paths = write_results(sweep, tmp_path, stem="small")
        assert paths["csv"].name == "small.csv"
        table = pd.read_csv(paths["csv"], dtype={"replication": str})
        assert len(table) == len(sweep.table)
        meta = json.loads(paths["json"].read_text())
        assert meta["config"]["r_values"] == [10, 20]


class TestSingleRun:
    def test_estimates(self):
        result = run_single(sweep_config())
        estimates = result.estimates
        assert estimates["count1"].mean > 0
        assert result.run.clock == 6.0

    def test_warmup_past_horizon_measures_everything(self):
        result = run_single(sweep_config(warmup=10.0, horizon=3.0))
        assert result.series.estimator.warmup == 0.0

    def test_snapshots_written(self, tmp_path):
        config = sweep_config(init="opposite", warmup=0.0, horizon=2.0, cells_per_row=8)
        result = run_single(config, r=20, snapshot_times=[0.0, 1.0, 2.0])
        written = write_snapshots(result, tmp_path)
        assert {"t000.000.txt", "t001.000.txt", "t002.000.txt", "snapshots.csv"} <= set(written)
        assert "t001.000_profile.csv" in written

        start = load_snapshot(tmp_path / "t000.000.txt")
        assert start.layout() == result.snapshots[0.0].layout()

        summary = pd.read_csv(written["snapshots.csv"])
        assert list(summary["time"]) == [0.0, 1.0, 2.0]
        first = summary.iloc[0]
        assert first["ones_p1"] == 0.0
        assert first["wasted"] == 0.0
        assert first["items"] == 20

        profile = pd.read_csv(written["t000.000_profile.csv"])
        assert list(profile.columns) == ["x", "f1", "f2"]
        assert profile["f1"].iloc[-1] == pytest.approx(0.5)

    def test_configured_r_uses_its_sweep_stream(self):
        config = sweep_config()
        assert single_run_seed(config, 20).spawn_key == (1, 0)
        assert single_run_seed(config, 10).spawn_key == (0, 0)

    def test_unlisted_r_is_seeded_from_its_value(self, caplog):
        config = sweep_config()
        with caplog.at_level(logging.WARNING, logger="halfpack"):
            seed = single_run_seed(config, 15)
        assert "not in r_values" in caplog.text
        assert seed.spawn_key != single_run_seed(config, 10).spawn_key
        assert seed.spawn_key == single_run_seed(config, 15).spawn_key
        assert single_run_seed(config, 15.5).spawn_key != seed.spawn_key

        first = run_single(config, r=15)
        second = run_single(config, r=15)
        assert first.run.events == second.run.events
        assert first.run.state.config.layout() == second.run.state.config.layout()
