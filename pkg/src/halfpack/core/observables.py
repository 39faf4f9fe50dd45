"""
Window statistics of a configuration.

For a window [0, y r) the snapshot holds Y and Z (1-items and 2-items
completely inside), X (occupied cells), D (how many 2-items the empty
space could take), G (odd holes), G1 (odd holes in [0, p1 r)), G^delta
(odd holes in [(p1 + delta) r, y r)) and U^{i,delta} (odd-hole pairs
separated only by 2-items and even holes, right hole of size 1, at
distance at most 2i). Items and holes count toward a window only when
completely inside it. Window ends are floored to whole cells.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

import numpy as np

from halfpack.core.model import (
    Configuration,
    ItemType,
    ModelParams,
    cell_bound,
    count_items_left_of,
    occupied_space_in,
)
from halfpack.utils.errors import ConfigurationError, ContractViolation

INF = math.inf

DEFAULT_I_LIST: Tuple[float, ...] = (1, 2, 4, 8, INF)


def _cap_label(i: float) -> str:
    return "inf" if math.isinf(i) else str(int(i))


@dataclass(frozen=True)
class WindowBounds:
    """Window ends in cells."""

    window: int
    p1: int
    delta_start: int
    optimal: int

    @property
    def limit(self) -> int:
        """One past the last cell any window statistic can depend on."""
        return max(self.window, self.p1, self.delta_start, self.optimal) + 1


@dataclass(frozen=True)
class WindowSpec:
    """
    Window [0, y r), sub-window [(p1 + delta) r, y r) and the caps i for U^{i,delta}.

    ``i_list`` is normalised to a sorted tuple that always ends with inf.
    """

    y: float
    delta: float = 0.0
    i_list: Tuple[float, ...] = DEFAULT_I_LIST

    def __post_init__(self):
        caps = sorted({float(i) for i in self.i_list} | {INF})
        if any(not (i >= 1) for i in caps):
            raise ConfigurationError(f"U caps must be positive integers, got {self.i_list}")
        object.__setattr__(self, "i_list", tuple(INF if math.isinf(i) else int(i) for i in caps))

    @classmethod
    def default(cls, params: ModelParams) -> "WindowSpec":
        """y midway through (p1, p1 + 2 p2), delta a tenth of y - p1."""
        y = params.p1 + params.p2
        return cls(y=y, delta=0.1 * (y - params.p1))

    def validate(self, params: ModelParams, need_u: bool = True):
        if not self.y > 0:
            raise ConfigurationError(f"y must be positive, got {self.y}")
        if self.delta < 0:
            raise ConfigurationError(f"delta must be non-negative, got {self.delta}")
        if need_u and not self.delta < self.y - params.p1:
            raise ConfigurationError(
                f"delta must be below y - p1 = {self.y - params.p1:g}, got {self.delta}",
                suggestion="Pick y above p1 (for example y = p1 + p2).",
            )

    def bounds(self, params: ModelParams) -> WindowBounds:
        return WindowBounds(
            window=cell_bound(self.y * params.r),
            p1=params.p1_cells,
            delta_start=cell_bound((params.p1 + self.delta) * params.r),
            optimal=params.optimal_cells,
        )


@dataclass(frozen=True)
class ObservableSnapshot:
    """One-instant values of every window statistic."""

    Y: int
    Z: int
    X: int
    D: int
    G: int
    G1: int
    Gdelta: int
    U: Dict[float, int]
    wasted: int
    g1_zero: bool
    g_zero_and_d_pos: bool
    # whole-configuration and fixed-window extras
    count1: int = 0
    count2: int = 0
    extent: int = 0
    total_occupied: int = 0
    ones_p1: int = 0
    twos_p1: int = 0
    occupied_p1: int = 0
    ones_optimal: int = 0
    twos_optimal: int = 0
    u_gaps: Tuple[int, ...] = field(default=(), compare=False)


# ----------------------------------------------------------------------
# primitives
# ----------------------------------------------------------------------


def _runs(config: Configuration, limit: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Maximal empty runs inside [0, min(extent, limit)), as (starts, ends, ones prefix).

    A run cut off at ``limit`` shows up with end == limit; callers only use
    runs ending strictly below ``limit``.
    """
    bound = min(config.rightmost_extent, limit)
    kinds = config.kinds(bound)
    ones_prefix = np.concatenate(([0], np.cumsum(kinds == ItemType.ONE)))
    if bound == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, ones_prefix
    free = (kinds == 0).astype(np.int8)
    edges = np.diff(np.concatenate(([0], free, [0])))
    return np.flatnonzero(edges == 1), np.flatnonzero(edges == -1), ones_prefix


def _pair_gaps(
    starts: np.ndarray, ends: np.ndarray, ones_prefix: np.ndarray, a: int, b: int
) -> np.ndarray:
    """
    Distances hR.start - hL.end of qualifying odd-hole pairs inside [a, b).

    Two odd holes with only 2-items and even holes between them are
    necessarily consecutive among the odd holes, so only consecutive
    pairs are inspected.
    """
    lengths = ends - starts
    inside = ((lengths & 1) == 1) & (starts >= a) & (ends <= b)
    odd_starts, odd_ends, odd_lengths = starts[inside], ends[inside], lengths[inside]
    if odd_starts.size < 2:
        return np.zeros(0, dtype=np.int64)

    left_end = odd_ends[:-1]
    right_start = odd_starts[1:]
    ones_between = ones_prefix[right_start] - ones_prefix[left_end]
    keep = (odd_lengths[1:] == 1) & (ones_between == 0)
    return (right_start - left_end)[keep]


def _count_within(gaps: np.ndarray, i: float) -> int:
    if math.isinf(i):
        return int(gaps.size)
    return int(np.count_nonzero(gaps <= 2 * i))


def count_U_pairs(config: Configuration, a: int, b: int, i: float) -> int:
    """
    U^{i}: odd-hole pairs completely in [a, b), right hole of size 1,
    separated only by 2-items and even holes, at distance <= 2i (i may be inf).
    """
    if not 0 <= a < b:
        raise ContractViolation(f"Need 0 <= a < b, got a={a}, b={b}")
    starts, ends, ones_prefix = _runs(config, b + 1)
    return _count_within(_pair_gaps(starts, ends, ones_prefix, a, b), i)


def wasted_space(config: Configuration, params: ModelParams) -> int:
    """Empty cells below (p1 + 2 p2) r, the region the optimal packing fills exactly."""
    optimal = params.optimal_cells
    return optimal - occupied_space_in(config, optimal)


def snapshot_observables(
    config: Configuration, params: ModelParams, window: WindowSpec
) -> ObservableSnapshot:
    """Compute every window statistic of ``config``."""
    b = window.bounds(params)
    starts, ends, ones_prefix = _runs(config, b.limit)
    odd = ((ends - starts) & 1) == 1

    W = b.window
    X = occupied_space_in(config, W)

    # 2-item capacity of the empty space below W, tail included, runs clipped at W.
    below = starts < W
    D = int(np.sum((np.minimum(ends[below], W) - starts[below]) // 2))
    if config.rightmost_extent < W:
        D += (W - config.rightmost_extent) // 2

    G = int(np.count_nonzero(odd & (ends <= W)))
    G1 = int(np.count_nonzero(odd & (ends <= b.p1)))
    Gdelta = int(np.count_nonzero(odd & (starts >= b.delta_start) & (ends <= W)))

    gaps = _pair_gaps(starts, ends, ones_prefix, b.delta_start, W)
    U = {i: _count_within(gaps, i) for i in window.i_list}

    ones = ItemType.ONE
    twos = ItemType.TWO
    return ObservableSnapshot(
        Y=count_items_left_of(config, ones, W),
        Z=count_items_left_of(config, twos, W),
        X=X,
        D=D,
        G=G,
        G1=G1,
        Gdelta=Gdelta,
        U=U,
        wasted=wasted_space(config, params),
        g1_zero=G1 == 0,
        g_zero_and_d_pos=G == 0 and D > 0,
        count1=config.counts[ones],
        count2=config.counts[twos],
        extent=config.rightmost_extent,
        total_occupied=config.total_occupied,
        ones_p1=count_items_left_of(config, ones, b.p1),
        twos_p1=count_items_left_of(config, twos, b.p1),
        occupied_p1=occupied_space_in(config, b.p1),
        ones_optimal=count_items_left_of(config, ones, b.optimal),
        twos_optimal=count_items_left_of(config, twos, b.optimal),
        u_gaps=tuple(int(g) for g in gaps),
    )


def snapshot_violations(
    snap: ObservableSnapshot, params: ModelParams, window: WindowSpec
) -> List[str]:
    """Exact structural properties every snapshot must satisfy; empty when all hold."""
    W = window.bounds(params).window
    problems = []

    if not 0 <= snap.X <= W:
        problems.append(f"X={snap.X} outside [0, {W}]")
    if 2 * snap.D > W - snap.X:
        problems.append(f"D={snap.D} exceeds (W - X)/2 with W={W}, X={snap.X}")
    if not snap.Y + 2 * snap.Z <= snap.X <= snap.Y + 2 * snap.Z + 1:
        problems.append(f"X={snap.X} not within [Y + 2Z, Y + 2Z + 1] for Y={snap.Y}, Z={snap.Z}")

    caps = list(window.i_list)
    for lo, hi in zip(caps, caps[1:]):
        if snap.U[lo] > snap.U[hi]:
            problems.append(f"U not monotone: U[{_cap_label(lo)}] > U[{_cap_label(hi)}]")
    unbounded = snap.U[INF]
    if unbounded > snap.Gdelta:
        problems.append(f"U[inf]={unbounded} exceeds Gdelta={snap.Gdelta}")
    for i in caps:
        if not math.isinf(i) and 2 * i * (unbounded - snap.U[i]) > W:
            problems.append(f"U[inf] - U[{i}] = {unbounded - snap.U[i]} exceeds W/(2i)")
    odd_gaps = [g for g in snap.u_gaps if g % 2]
    if odd_gaps:
        problems.append(f"odd U-pair distances {odd_gaps}")
    return problems


# ----------------------------------------------------------------------
# hydrodynamic profile
# ----------------------------------------------------------------------


def rescaled_profile(
    config: Configuration, r: float, grid_step: float
) -> Tuple[List[Tuple[float, float]], List[Tuple[float, float]]]:
    """
    f_i(x) = F_i(floor(r x)) / r on the grid x = 0, step, 2 step, ...
    up to rightmost_extent / r + step.

    Returns:
        (profile of 1-items, profile of 2-items), each a list of (x, f)
    """
    if not grid_step > 0:
        raise ContractViolation(f"grid_step must be positive, got {grid_step}")

    points = math.floor(config.rightmost_extent / (r * grid_step) + 1 + 1e-9)
    xs = [k * grid_step for k in range(points + 1)]
    cells = np.array([cell_bound(r * x) for x in xs], dtype=np.int64)

    heads = config.heads(int(cells.max()) + 1)
    ones_cum = np.concatenate(([0], np.cumsum(heads == ItemType.ONE)))
    twos_cum = np.concatenate(([0], np.cumsum(heads == ItemType.TWO)))

    f1 = ones_cum[cells] / r
    f2 = twos_cum[np.maximum(cells - 1, 0)] / r
    return (
        [(x, float(f)) for x, f in zip(xs, f1)],
        [(x, float(f)) for x, f in zip(xs, f2)],
    )


# ----------------------------------------------------------------------
# full-scan reference
# ----------------------------------------------------------------------


def scan_snapshot(
    config: Configuration, params: ModelParams, window: WindowSpec
) -> ObservableSnapshot:
    """
    Recompute a snapshot by walking the lattice cell by cell.

    Slow; shares no code with ``snapshot_observables`` beyond the window
    bounds, and serves as its oracle.
    """
    b = window.bounds(params)
    extent = config.rightmost_extent
    cells = config.kinds(max(extent, b.limit) + 2).tolist()
    items = list(config.items.values())

    def left_of(item_type: ItemType, x: int) -> int:
        return sum(1 for it in items if it.item_type is item_type and it.end <= x)

    def occupied_below(x: int) -> int:
        return sum(1 for c in range(x) if cells[c])

    holes = []
    c = 0
    while c < extent:
        if cells[c]:
            c += 1
            continue
        start = c
        while cells[c] == 0:
            c += 1
        holes.append((start, c))

    def odd_in(lo: int, hi: int) -> List[Tuple[int, int]]:
        return [(s, e) for s, e in holes if (e - s) % 2 and s >= lo and e <= hi]

    W = b.window
    D = 0
    run = 0
    for c in range(W):
        if cells[c]:
            D += run // 2
            run = 0
        else:
            run += 1
    D += run // 2

    window_odd = odd_in(b.delta_start, W)
    gaps = []
    for k, (left_start, left_end) in enumerate(window_odd):
        for right_start, right_end in window_odd[k + 1:]:
            if right_end - right_start != 1:
                continue
            span_ok = all(cells[x] != ItemType.ONE for x in range(left_end, right_start))
            span_ok = span_ok and all(
                (e - s) % 2 == 0 for s, e in holes if s >= left_end and e <= right_start
            )
            if span_ok:
                gaps.append(right_start - left_end)
    gaps.sort()

    def capped(i: float) -> int:
        return sum(1 for g in gaps if math.isinf(i) or g <= 2 * i)

    G = len(odd_in(0, W))
    G1 = len(odd_in(0, b.p1))
    ones, twos = ItemType.ONE, ItemType.TWO
    return ObservableSnapshot(
        Y=left_of(ones, W),
        Z=left_of(twos, W),
        X=occupied_below(W),
        D=D,
        G=G,
        G1=G1,
        Gdelta=len(window_odd),
        U={i: capped(i) for i in window.i_list},
        wasted=b.optimal - occupied_below(b.optimal),
        g1_zero=G1 == 0,
        g_zero_and_d_pos=G == 0 and D > 0,
        count1=sum(1 for it in items if it.item_type is ones),
        count2=sum(1 for it in items if it.item_type is twos),
        extent=extent,
        total_occupied=occupied_below(extent),
        ones_p1=left_of(ones, b.p1),
        twos_p1=left_of(twos, b.p1),
        occupied_p1=occupied_below(b.p1),
        ones_optimal=left_of(ones, b.optimal),
        twos_optimal=left_of(twos, b.optimal),
        u_gaps=tuple(gaps),
    )


def snapshot_mismatches(
    fast: ObservableSnapshot, reference: ObservableSnapshot
) -> Dict[str, Tuple[object, object]]:
    """Fields on which two snapshots disagree, as name -> (fast, reference)."""
    names = [f for f in fast.__dataclass_fields__ if f != "u_gaps"]
    diffs = {
        name: (getattr(fast, name), getattr(reference, name))
        for name in names
        if getattr(fast, name) != getattr(reference, name)
    }
    if sorted(fast.u_gaps) != sorted(reference.u_gaps):
        diffs["u_gaps"] = (fast.u_gaps, reference.u_gaps)
    return diffs


def series_names(i_list: Sequence[float]) -> List[str]:
    """Column names of the time-averaged statistics, in ``snapshot_series`` order."""
    return [
        "count1", "count2",
        "ones_p1", "z_p1", "empty_p1", "ones_optimal", "twos_optimal",
        "Y", "Z", "X", "D", "G", "G1", "Gdelta",
        *[f"U_{_cap_label(i)}" for i in i_list],
        "P_G1_zero", "P_G_zero_D_pos",
        "wasted", "extent", "extent_slack", "stray_ones", "stray_twos", "gdelta_excess",
    ]


def snapshot_series(
    snap: ObservableSnapshot, params: ModelParams, window: WindowSpec
) -> np.ndarray:
    """
    Snapshot as one vector in ``series_names`` order.

    Counts of items are raw; probabilities are indicators; every other
    statistic is divided by r.
    """
    b = window.bounds(params)
    scaled = [
        snap.ones_p1, snap.twos_p1, b.p1 - snap.occupied_p1,
        snap.ones_optimal, snap.twos_optimal,
        snap.Y, snap.Z, snap.X, snap.D, snap.G, snap.G1, snap.Gdelta,
        *[snap.U[i] for i in window.i_list],
    ]
    tail = [
        snap.wasted,
        snap.extent,
        snap.extent - snap.total_occupied,
        snap.count1 - snap.ones_p1,
        snap.count2 - snap.twos_p1,
        snap.Gdelta - (snap.D + 2 * snap.U[INF] + snap.Y - snap.ones_p1),
    ]
    r = params.r
    return np.array(
        [snap.count1, snap.count2]
        + [v / r for v in scaled]
        + [float(snap.g1_zero), float(snap.g_zero_and_d_pos)]
        + [v / r for v in tail],
        dtype=np.float64,
    )
