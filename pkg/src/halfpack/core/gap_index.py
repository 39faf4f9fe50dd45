"""
Leftmost-fit index over the occupancy lattice.

A segment tree whose nodes summarise their cell range by
(longest empty run, longest empty prefix, longest empty suffix). That
summary answers "leftmost empty run of length >= L" for any L in
O(log capacity); the simulator only asks for L in {1, 2}.
"""

from typing import Iterable, List, Sequence

from halfpack.utils.errors import ContractViolation
from halfpack.utils.log import get_logger

logger = get_logger(__name__)

# Cells kept free past the last occupied cell, so a 2-item that straddles the
# current extent is always placeable without growing first.
_TAIL_SLACK = 2


def naive_leftmost_fit(bitmap: Sequence, length: int) -> int:
    """
    Reference first-fit by direct left-to-right scan.

    Cells past the end of ``bitmap`` are empty, so this always succeeds.

    Args:
        bitmap: Occupancy per cell (truthy = occupied)
        length: Run length required

    Returns:
        Smallest s such that cells [s, s + length) are all empty
    """
    if length < 1:
        raise ContractViolation(f"Run length must be positive, got {length}")
    run = 0
    for cell, occupied in enumerate(bitmap):
        if occupied:
            run = 0
            continue
        run += 1
        if run == length:
            return cell - length + 1
    return len(bitmap) - run


class FitIndex:
    """
    Segment tree for leftmost empty-run queries; capacity doubles on demand.

    ``touches`` counts node summaries read or written, so tests can check
    the per-operation cost without timing anything.
    """

    def __init__(self, capacity: int = 64):
        size = 4
        while size < capacity:
            size *= 2
        self.touches = 0
        self._build(size, bytearray(size))

    @classmethod
    def from_bitmap(cls, bitmap: Iterable) -> "FitIndex":
        cells = bytearray(1 if occupied else 0 for occupied in bitmap)
        index = cls(len(cells) + _TAIL_SLACK)
        index._build(index.capacity, cells + bytearray(index.capacity - len(cells)))
        return index

    # ------------------------------------------------------------------
    # queries
    # ------------------------------------------------------------------

    @property
    def capacity(self) -> int:
        return self._capacity

    def bitmap(self) -> List[int]:
        return list(self._occupied)

    def is_free(self, start: int, length: int) -> bool:
        end = min(start + length, self._capacity)
        return not any(self._occupied[start:end])

    def leftmost_fit(self, length: int) -> int:
        """Smallest s with cells [s, s + length) empty."""
        if length < 1:
            raise ContractViolation(f"Run length must be positive, got {length}")
        while self._best[1] < length:
            self._grow(self._capacity * 2)

        best, prefix, suffix = self._best, self._prefix, self._suffix
        node, lo, span = 1, 0, self._capacity
        while node < self._capacity:
            self.touches += 1
            half = span >> 1
            left = node << 1
            if best[left] >= length:
                node, span = left, half
            elif suffix[left] + prefix[left | 1] >= length:
                return lo + half - suffix[left]
            else:
                node, lo, span = left | 1, lo + half, half
        return lo

    # ------------------------------------------------------------------
    # updates
    # ------------------------------------------------------------------

    def set_occupied(self, start: int, length: int):
        """Mark [start, start + length) occupied; the cells must be empty."""
        if start < 0 or length < 1:
            raise ContractViolation(f"Invalid cell range start={start} length={length}")
        if start + length + _TAIL_SLACK > self._capacity:
            self._grow(start + length + _TAIL_SLACK)
        if any(self._occupied[start:start + length]):
            raise ContractViolation(
                f"Double occupation of cells [{start}, {start + length})"
            )
        for cell in range(start, start + length):
            self._set_leaf(cell, 1)

    def set_free(self, start: int, length: int):
        """Mark [start, start + length) empty; the cells must be occupied."""
        if start < 0 or length < 1 or start + length > self._capacity:
            raise ContractViolation(f"Invalid cell range start={start} length={length}")
        if not all(self._occupied[start:start + length]):
            raise ContractViolation(
                f"Freeing empty cells in [{start}, {start + length})"
            )
        for cell in range(start, start + length):
            self._set_leaf(cell, 0)

    # ------------------------------------------------------------------
    # tree maintenance
    # ------------------------------------------------------------------

    def _build(self, capacity: int, occupied: bytearray):
        self._capacity = capacity
        self._occupied = occupied
        size = 2 * capacity
        self._best = [0] * size
        self._prefix = [0] * size
        self._suffix = [0] * size
        self._span = [0] * size

        for cell in range(capacity):
            leaf = capacity + cell
            free = 0 if occupied[cell] else 1
            self._best[leaf] = self._prefix[leaf] = self._suffix[leaf] = free
            self._span[leaf] = 1
        for node in range(capacity - 1, 0, -1):
            self._span[node] = 2 * self._span[node << 1]
            self._pull(node)

    def _pull(self, node: int):
        left, right = node << 1, node << 1 | 1
        half = self._span[left]
        prefix, suffix = self._prefix, self._suffix
        prefix[node] = prefix[left] if prefix[left] < half else half + prefix[right]
        suffix[node] = suffix[right] if suffix[right] < half else half + suffix[left]
        self._best[node] = max(self._best[left], self._best[right], suffix[left] + prefix[right])

    def _set_leaf(self, cell: int, occupied: int):
        self._occupied[cell] = occupied
        node = self._capacity + cell
        free = 1 - occupied
        self._best[node] = self._prefix[node] = self._suffix[node] = free
        node >>= 1
        while node:
            self._pull(node)
            self.touches += 1
            node >>= 1

    def _grow(self, needed: int):
        capacity = self._capacity
        while capacity < needed:
            capacity *= 2
        logger.debug("fit index grows %d -> %d cells", self._capacity, capacity)
        self._build(capacity, self._occupied + bytearray(capacity - self._capacity))
