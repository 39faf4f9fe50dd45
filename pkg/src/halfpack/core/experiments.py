"""
Experiment drivers: single runs, r-sweeps with parallel replications, and
result emission (CSV tables, JSON metadata, snapshot pixmaps and profiles).
"""

import json
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path
from typing import Callable, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from halfpack import __version__
from halfpack.core.config import ExperimentConfig
from halfpack.core.engine import RunResult, make_initial, replication_seed, simulate
from halfpack.core.estimator import Estimate
from halfpack.core.model import Configuration, ModelParams
from halfpack.core.observables import rescaled_profile, snapshot_observables
from halfpack.core.observers import (
    CountObserver,
    CountSummary,
    ObservableObserver,
    SeriesSummary,
    SnapshotRecorder,
)
from halfpack.core.render import save_snapshot
from halfpack.core.trace import TraceWriter
from halfpack.utils.errors import ConfigurationError, OutputError
from halfpack.utils.log import get_logger

logger = get_logger(__name__)

FLOAT_FORMAT = "%.10g"
POOLED = "pooled"


@dataclass
class ReplicationResult:
    r: float
    r_index: int
    replication: int
    events: int
    series: SeriesSummary
    counts: CountSummary
    seconds: float = 0.0


@dataclass
class SweepResult:
    config: ExperimentConfig
    table: pd.DataFrame
    replications: List[ReplicationResult]
    metadata: Dict[str, object] = field(default_factory=dict)


@dataclass
class SingleRunResult:
    config: ExperimentConfig
    params: ModelParams
    run: RunResult
    series: SeriesSummary
    counts: CountSummary
    snapshots: Dict[float, Configuration]

    @property
    def estimates(self) -> Dict[str, Estimate]:
        return self.series.estimates()


def _measured_warmup(config: ExperimentConfig) -> float:
    if config.warmup < config.horizon:
        return config.warmup
    logger.warning(
        "warm-up %.3g is not below horizon %.3g; measuring from time 0",
        config.warmup, config.horizon,
    )
    return 0.0


def _observers(config: ExperimentConfig, params: ModelParams, verify_every: int = 0):
    warmup = _measured_warmup(config)
    return [
        ObservableObserver(
            params, config.window(), warmup, config.horizon, config.batches,
            verify_every=verify_every,
        ),
        CountObserver(warmup, config.horizon, config.batches),
    ]


def run_replication(
    config: ExperimentConfig, r_index: int, replication: int, verify_every: int = 0
) -> ReplicationResult:
    """
    One independent replication at ``config.r_values[r_index]``.

    The generator is seeded from (master seed, r index, replication), so the
    result does not depend on which worker runs it or when.
    """
    if config.master_seed is None:
        raise ConfigurationError("A master seed is required", suggestion="Pass --seed.")
    r = config.r_values[r_index]
    params = config.params(r)
    seed = replication_seed(config.master_seed, r_index, replication)
    state = make_initial(config.init, params, seed, config.snapshot)

    started = time.perf_counter()
    result = simulate(state, config.horizon, _observers(config, params, verify_every))
    seconds = time.perf_counter() - started
    logger.debug("r=%g replication %d: %d events in %.2fs", r, replication, result.events, seconds)
    return ReplicationResult(
        r=r,
        r_index=r_index,
        replication=replication,
        events=result.events,
        series=result.outputs["observables"],
        counts=result.outputs["counts"],
        seconds=seconds,
    )


def _estimate_columns(series: SeriesSummary) -> Dict[str, float]:
    row = {}
    for name, est in series.estimates().items():
        row[name] = est.mean
        row[f"{name}_ci"] = est.half_width
    return row


def pool(results: List[ReplicationResult]) -> SeriesSummary:
    """Merge replications in replication order; the merge is associative."""
    ordered = sorted(results, key=lambda res: res.replication)
    return reduce(lambda a, b: a.merge(b), (res.series for res in ordered))


def build_table(results: List[ReplicationResult]) -> pd.DataFrame:
    """
    One row per (r, replication) and a pooled row per r.

    Every estimate column ``name`` is paired with ``name_ci``, the 95%
    half-width; an inconclusive estimate has an NA half-width.
    """
    rows = []
    by_r: Dict[int, List[ReplicationResult]] = {}
    for res in sorted(results, key=lambda x: (x.r_index, x.replication)):
        by_r.setdefault(res.r_index, []).append(res)

    for r_index, group in sorted(by_r.items()):
        for res in group:
            rows.append({
                "r": res.r, "replication": str(res.replication), "events": res.events,
                **_estimate_columns(res.series),
            })
        rows.append({
            "r": group[0].r, "replication": POOLED,
            "events": sum(res.events for res in group),
            **_estimate_columns(pool(group)),
        })
    return pd.DataFrame(rows)


def warmup_sensitivity(results: List[ReplicationResult], column: str = "wasted") -> Dict[str, dict]:
    """First-half vs second-half batch means of one column, per r."""
    report = {}
    by_r: Dict[float, List[ReplicationResult]] = {}
    for res in results:
        by_r.setdefault(res.r, []).append(res)
    for r, group in sorted(by_r.items()):
        firsts, seconds = [], []
        for res in sorted(group, key=lambda x: x.replication):
            col = res.series.names.index(column)
            means = res.series.estimator.batch_means(col)
            half = means.shape[0] // 2
            if half:
                firsts.append(float(np.mean(means[:half])))
                seconds.append(float(np.mean(means[half:])))
        report[f"{r:g}"] = {
            "first_half": float(np.mean(firsts)) if firsts else None,
            "second_half": float(np.mean(seconds)) if seconds else None,
        }
    return report


def run_sweep(
    config: ExperimentConfig,
    progress: Optional[Callable[[ReplicationResult], None]] = None,
) -> SweepResult:
    """
    Run every (r, replication) pair and collect the result table.

    Replications run in ``config.workers`` processes when more than one;
    results are gathered by this process only, and the table is ordered
    by (r, replication) whatever order they finish in.
    """
    if config.master_seed is None:
        raise ConfigurationError("Sweeps need a master seed", suggestion="Pass --seed.")
    jobs = [
        (r_index, rep)
        for r_index in range(len(config.r_values))
        for rep in range(config.replications)
    ]
    started = time.perf_counter()
    results: List[ReplicationResult] = []

    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool_executor:
            futures = [
                pool_executor.submit(run_replication, config, r_index, rep)
                for r_index, rep in jobs
            ]
            for future in as_completed(futures):
                res = future.result()
                results.append(res)
                if progress:
                    progress(res)
    else:
        for r_index, rep in jobs:
            res = run_replication(config, r_index, rep)
            results.append(res)
            if progress:
                progress(res)

    metadata = {
        "version": __version__,
        "master_seed": config.master_seed,
        "config": config.to_dict(),
        "z_limit": config.z_limit(),
        "warmup_sensitivity": warmup_sensitivity(results),
        "events": sum(res.events for res in results),
        "elapsed_seconds": round(time.perf_counter() - started, 3),
    }
    return SweepResult(
        config=config, table=build_table(results), replications=results, metadata=metadata
    )


def write_results(
    result: SweepResult, output_dir: Union[str, Path], stem: str = "sweep"
) -> Dict[str, Path]:
    """Write ``<stem>.csv`` and ``<stem>.json`` into ``output_dir``."""
    output_dir = Path(output_dir)
    csv_path = output_dir / f"{stem}.csv"
    json_path = output_dir / f"{stem}.json"
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
        result.table.to_csv(csv_path, index=False, float_format=FLOAT_FORMAT, na_rep="NA")
        json_path.write_text(json.dumps(result.metadata, indent=2) + "\n", encoding="utf-8")
    except OSError as e:
        raise OutputError(f"Cannot write results to {output_dir}", details=str(e)) from e
    return {"csv": csv_path, "json": json_path}


def single_run_seed(config: ExperimentConfig, r: float) -> np.random.SeedSequence:
    """
    Seed of a single run: replication 0 of r's sweep stream, or a stream
    keyed by the bits of r when r is not among the configured values.
    """
    if r in config.r_values:
        return replication_seed(config.master_seed, config.r_values.index(r), 0)
    logger.warning("r=%g is not in r_values; seeding from its value", r)
    return replication_seed(config.master_seed, int(np.float64(r).view(np.uint64)), 0, 0)


def run_single(
    config: ExperimentConfig,
    r: Optional[float] = None,
    trace: Optional[Union[str, Path]] = None,
    snapshot_times: Optional[List[float]] = None,
    verify_every: int = 0,
) -> SingleRunResult:
    """
    One run at ``r`` (default: the first configured r), seeded like the
    first replication of a sweep over that r.

    Optionally records a trace and copies the configuration at the given
    snapshot times.
    """
    if config.master_seed is None:
        raise ConfigurationError("A seed is required", suggestion="Pass --seed.")
    r = config.r_values[0] if r is None else r
    params = config.params(r)
    state = make_initial(config.init, params, single_run_seed(config, r), config.snapshot)

    observers = _observers(config, params, verify_every)
    if snapshot_times:
        observers.append(SnapshotRecorder(snapshot_times))

    if trace is not None:
        header = {
            "r": r, "p1": config.p1, "seed": config.master_seed,
            "init": config.init.value, "snapshot": config.snapshot,
        }
        with TraceWriter(trace, header) as writer:
            run = simulate(state, config.horizon, observers, on_event=writer)
        logger.debug("wrote %d trace records to %s", writer.count, trace)
    else:
        run = simulate(state, config.horizon, observers)

    return SingleRunResult(
        config=config,
        params=params,
        run=run,
        series=run.outputs["observables"],
        counts=run.outputs["counts"],
        snapshots=run.outputs.get("snapshots", {}),
    )


def record_trace(config: ExperimentConfig, path: Union[str, Path]) -> SingleRunResult:
    """Run once at the first configured r and write its event trace to ``path``."""
    return run_single(config, trace=path)


def snapshot_summary(
    snapshots: Dict[float, Configuration], params: ModelParams, config: ExperimentConfig
) -> pd.DataFrame:
    """Per-time F1(p1 r)/r, F2((p1 + 2 p2) r)/r and wasted/r of captured configurations."""
    window = config.window()
    rows = []
    for t, snap_config in sorted(snapshots.items()):
        snap = snapshot_observables(snap_config, params, window)
        rows.append({
            "time": t,
            "ones_p1": snap.ones_p1 / params.r,
            "twos_optimal": snap.twos_optimal / params.r,
            "wasted": snap.wasted / params.r,
            "extent": snap.extent / params.r,
            "items": len(snap_config),
        })
    return pd.DataFrame(
        rows, columns=["time", "ones_p1", "twos_optimal", "wasted", "extent", "items"]
    )


def write_snapshots(
    result: SingleRunResult,
    output_dir: Union[str, Path],
    grid_step: float = 0.01,
) -> Dict[str, Path]:
    """
    Write a pixmap and a rescaled profile per captured time, plus
    ``snapshots.csv`` summarising them.
    """
    output_dir = Path(output_dir)
    params = result.params
    cells_per_row = result.config.cells_per_row
    written: Dict[str, Path] = {}
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
        for t, snap_config in sorted(result.snapshots.items()):
            label = f"t{t:07.3f}"
            header = {"time": t, "r": params.r, "p1": params.p1, "cells_per_row": cells_per_row}
            written[f"{label}.txt"] = save_snapshot(
                snap_config, output_dir / f"{label}.txt", cells_per_row, header
            )
            ones, twos = rescaled_profile(snap_config, params.r, grid_step)
            profile = pd.DataFrame({
                "x": [x for x, _ in ones],
                "f1": [f for _, f in ones],
                "f2": [f for _, f in twos],
            })
            profile_path = output_dir / f"{label}_profile.csv"
            profile.to_csv(profile_path, index=False, float_format=FLOAT_FORMAT)
            written[profile_path.name] = profile_path

        summary_path = output_dir / "snapshots.csv"
        snapshot_summary(result.snapshots, params, result.config).to_csv(
            summary_path, index=False, float_format=FLOAT_FORMAT
        )
        written[summary_path.name] = summary_path
    except OSError as e:
        raise OutputError(f"Cannot write snapshots to {output_dir}", details=str(e)) from e
    return written
