"""
Lattice occupancy model for first-fit packing of 1-items and 2-items.

Cells are the integer intervals [c, c+1), c >= 0. A type-i item of size
alpha_i occupies [start, start + alpha_i). Items live only on integer
cells; real-valued positions are never represented.
"""

import math
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, List, Optional, Tuple

import numpy as np

from halfpack.core.gap_index import naive_leftmost_fit
from halfpack.utils.errors import ConfigurationError, ContractViolation

# Float products like (p1 + 2*p2) * r are floored to whole cells; this slack
# keeps 0.1 * 30 == 3 from landing on 2.
_CELL_EPS = 1e-9


def cell_bound(x: float) -> int:
    """Floor a real window end to a whole cell count (``floor(yr)``)."""
    return max(0, math.floor(x + _CELL_EPS))


def round_half_up(x: float) -> int:
    return math.floor(x + 0.5)


class ItemType(IntEnum):
    """Item class; the value doubles as the item size in cells."""

    ONE = 1
    TWO = 2

    @property
    def size(self) -> int:
        return int(self)


@dataclass(frozen=True)
class ModelParams:
    """Arrival scale r and type mix (p1, p2); sizes are fixed at 1 and 2."""

    r: float
    p1: float
    p2: float

    def __post_init__(self):
        if not self.r > 0:
            raise ConfigurationError(f"r must be positive, got {self.r}")
        if not (self.p1 > 0 and self.p2 > 0):
            raise ConfigurationError(
                f"p1 and p2 must both be positive, got p1={self.p1}, p2={self.p2}"
            )
        if abs(self.p1 + self.p2 - 1.0) > 1e-9:
            raise ConfigurationError(
                f"p1 + p2 must equal 1, got {self.p1 + self.p2}",
                suggestion="Pass only p1 and let p2 default to 1 - p1.",
            )

    @classmethod
    def from_p1(cls, r: float, p1: float) -> "ModelParams":
        return cls(r=r, p1=p1, p2=1.0 - p1)

    @property
    def alpha1(self) -> int:
        return ItemType.ONE.size

    @property
    def alpha2(self) -> int:
        return ItemType.TWO.size

    def rate(self, item_type: ItemType) -> float:
        return (self.p1 if item_type is ItemType.ONE else self.p2) * self.r

    @property
    def p1_cells(self) -> int:
        """End of the region [0, p1 r) that 1-items fill in the limit."""
        return cell_bound(self.p1 * self.r)

    @property
    def optimal_cells(self) -> int:
        """End of the region [0, (p1 + 2 p2) r) filled by the optimal configuration."""
        return cell_bound((self.p1 + 2 * self.p2) * self.r)


@dataclass(frozen=True)
class Item:
    id: int
    item_type: ItemType
    start: int

    @property
    def size(self) -> int:
        return self.item_type.size

    @property
    def end(self) -> int:
        return self.start + self.size


@dataclass(frozen=True)
class Hole:
    """Maximal empty run [start, start + length) bounded by items or the origin."""

    start: int
    length: int

    @property
    def end(self) -> int:
        return self.start + self.length


class Configuration:
    """
    Occupancy state of the half-axis.

    Two views are kept consistent: ``items`` (id -> Item) and per-cell numpy
    arrays holding the item type covering each cell (0 = empty), the owning
    item id (-1 = empty) and, at each item's start cell only, its type.
    Every cell at or beyond ``rightmost_extent`` is empty.
    """

    def __init__(self, capacity: int = 64):
        capacity = max(int(capacity), 4)
        self.items: dict[int, Item] = {}
        self._kind = np.zeros(capacity, dtype=np.int8)
        self._head = np.zeros(capacity, dtype=np.int8)
        self._owner = np.full(capacity, -1, dtype=np.int64)
        self.rightmost_extent = 0
        self.counts = {ItemType.ONE: 0, ItemType.TWO: 0}
        self.version = 0
        self._next_id = 0

    # ------------------------------------------------------------------
    # construction helpers
    # ------------------------------------------------------------------

    @classmethod
    def from_layout(cls, layout: Iterable[Tuple[ItemType, int]]) -> "Configuration":
        """Build a configuration from (type, start) pairs; ids follow input order."""
        config = cls()
        for item_type, start in layout:
            config.insert(ItemType(item_type), int(start))
        return config

    @classmethod
    def from_occupied(cls, cells: Iterable[int], item_type: ItemType = ItemType.ONE):
        """Convenience builder: one item of ``item_type`` per listed start cell."""
        return cls.from_layout((item_type, c) for c in cells)

    def copy(self) -> "Configuration":
        clone = Configuration.__new__(Configuration)
        clone.items = dict(self.items)
        clone._kind = self._kind.copy()
        clone._head = self._head.copy()
        clone._owner = self._owner.copy()
        clone.rightmost_extent = self.rightmost_extent
        clone.counts = dict(self.counts)
        clone.version = self.version
        clone._next_id = self._next_id
        return clone

    # ------------------------------------------------------------------
    # views
    # ------------------------------------------------------------------

    @property
    def capacity(self) -> int:
        return int(self._kind.shape[0])

    @property
    def next_id(self) -> int:
        return self._next_id

    @property
    def total_occupied(self) -> int:
        return self.counts[ItemType.ONE] + 2 * self.counts[ItemType.TWO]

    def __len__(self) -> int:
        return len(self.items)

    def kinds(self, bound: Optional[int] = None) -> np.ndarray:
        """
        Item type per cell for cells [0, bound); 0 marks an empty cell.

        Returns a read-only view when ``bound`` is within capacity.
        """
        return self._window(self._kind, bound)

    def heads(self, bound: Optional[int] = None) -> np.ndarray:
        """Item type at each item's start cell, 0 elsewhere, for cells [0, bound)."""
        return self._window(self._head, bound)

    def owner_at(self, cell: int) -> Optional[int]:
        if cell < 0 or cell >= self.capacity:
            return None
        owner = int(self._owner[cell])
        return None if owner < 0 else owner

    def is_free(self, start: int, length: int) -> bool:
        if start < 0:
            return False
        end = min(start + length, self.capacity)
        return start >= end or not self._kind[start:end].any()

    def layout(self) -> List[Tuple[int, int, int]]:
        """Sorted (id, type, start) triples, for equality checks and traces."""
        return sorted((i.id, int(i.item_type), i.start) for i in self.items.values())

    def _window(self, arr: np.ndarray, bound: Optional[int]) -> np.ndarray:
        if bound is None:
            bound = self.rightmost_extent
        bound = max(0, int(bound))
        if bound <= arr.shape[0]:
            view = arr[:bound]
            view.flags.writeable = False
            return view
        return np.concatenate([arr, np.zeros(bound - arr.shape[0], dtype=arr.dtype)])

    # ------------------------------------------------------------------
    # mutation
    # ------------------------------------------------------------------

    def insert(self, item_type: ItemType, start: int) -> Item:
        """Insert a new item at ``start``; the cells must be empty."""
        item_type = ItemType(item_type)
        if start < 0:
            raise ContractViolation(f"Item start must be non-negative, got {start}")
        end = start + item_type.size
        self._ensure_capacity(end + 2)
        if self._kind[start:end].any():
            raise ContractViolation(
                f"Cells [{start}, {end}) already occupied",
                details=f"owners: {self._owner[start:end].tolist()}",
            )

        item = Item(id=self._next_id, item_type=item_type, start=start)
        self._next_id += 1
        self.items[item.id] = item
        self._kind[start:end] = int(item_type)
        self._head[start] = int(item_type)
        self._owner[start:end] = item.id
        self.counts[item_type] += 1
        if end > self.rightmost_extent:
            self.rightmost_extent = end
        self.version += 1
        return item

    def remove(self, item_id: int) -> Item:
        item = self.items.pop(item_id, None)
        if item is None:
            raise ContractViolation(f"Unknown item id {item_id}")

        self._kind[item.start:item.end] = 0
        self._head[item.start] = 0
        self._owner[item.start:item.end] = -1
        self.counts[item.item_type] -= 1
        if item.end == self.rightmost_extent:
            occupied = np.flatnonzero(self._kind[:item.start])
            self.rightmost_extent = int(occupied[-1]) + 1 if occupied.size else 0
        self.version += 1
        return item

    def _ensure_capacity(self, needed: int):
        capacity = self.capacity
        if needed <= capacity:
            return
        while capacity < needed:
            capacity *= 2
        grow = capacity - self.capacity
        self._kind = np.concatenate([self._kind, np.zeros(grow, dtype=np.int8)])
        self._head = np.concatenate([self._head, np.zeros(grow, dtype=np.int8)])
        self._owner = np.concatenate([self._owner, np.full(grow, -1, dtype=np.int64)])


# ----------------------------------------------------------------------
# operations
# ----------------------------------------------------------------------


def place_first_fit(config: Configuration, item_type: ItemType, index=None) -> Item:
    """
    Place an arriving item at the left-most empty run large enough for it.

    Uses ``index`` (a FitIndex mirroring ``config``) when given, otherwise a
    linear scan. The caller is responsible for marking the index occupied.

    Returns:
        The inserted Item (its ``id`` and ``start`` are the placement)
    """
    item_type = ItemType(item_type)
    if index is not None:
        start = index.leftmost_fit(item_type.size)
    else:
        start = naive_leftmost_fit(config.kinds(config.rightmost_extent), item_type.size)
    return config.insert(item_type, start)


def remove_item(config: Configuration, item_id: int) -> Item:
    """Remove a departing item; unknown ids are a ContractViolation."""
    return config.remove(item_id)


def hole_arrays(config: Configuration) -> Tuple[np.ndarray, np.ndarray]:
    """
    Starts and lengths of every hole, ordered by start.

    Holes are the maximal empty runs inside [0, rightmost_extent); the
    unbounded empty tail is never one of them.
    """
    extent = config.rightmost_extent
    if extent == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty

    free = (config.kinds(extent) == 0).astype(np.int8)
    edges = np.diff(np.concatenate(([0], free, [0])))
    starts = np.flatnonzero(edges == 1)
    ends = np.flatnonzero(edges == -1)
    return starts, ends - starts


def enumerate_holes(config: Configuration, bound: int) -> List[Hole]:
    """Holes lying completely within [0, bound), ordered by start."""
    if bound < 0:
        raise ContractViolation(f"bound must be non-negative, got {bound}")
    starts, lengths = hole_arrays(config)
    inside = starts + lengths <= bound
    return [Hole(int(s), int(n)) for s, n in zip(starts[inside], lengths[inside])]


def count_items_left_of(config: Configuration, item_type: ItemType, x: int) -> int:
    """F_i(x): number of type-i items lying completely within [0, x)."""
    if x < 0:
        raise ContractViolation(f"x must be non-negative, got {x}")
    item_type = ItemType(item_type)
    last_start = x - item_type.size + 1
    if last_start <= 0:
        return 0
    return int(np.count_nonzero(config.heads(last_start) == int(item_type)))


def occupied_space_in(config: Configuration, bound: int) -> int:
    """X: number of occupied cells with index below ``bound``."""
    if bound < 0:
        raise ContractViolation(f"bound must be non-negative, got {bound}")
    return int(np.count_nonzero(config.kinds(min(bound, config.rightmost_extent))))
