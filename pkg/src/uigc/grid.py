"""Token maps, the four-group partition, window tiling, and coding order.

Positions split into four groups by coordinate parity; coding walks the
groups stage-major so that later groups always see a fully coded
neighborhood. Group 0 = (even row, even col), 1 = (odd, odd),
2 = (even, odd), 3 = (odd, even); groups 0 and 1 together form the
checkerboard color with even coordinate sum.

Every operation here is a pure function; the orders are cached per
(height, width, window) triple.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import AlphabetMismatch

MASK = -1
GROUP_COUNT = 4

# Per-stage causal context offsets (row, col), fixed order. Stages 0/1 see
# only previously coded cells of groups <= their own; stages 2/3 see the full
# 4-neighborhood of anchor cells plus one same-group cell to the left.
CONTEXT_TEMPLATES: tuple[tuple[tuple[int, int], ...], ...] = (
    ((0, -2), (-2, 0), (-2, -2), (-2, 2)),
    ((-1, -1), (-1, 1), (1, -1), (1, 1), (0, -2), (-2, 0)),
    ((0, -1), (-1, 0), (0, 1), (1, 0), (0, -2)),
    ((0, -1), (-1, 0), (0, 1), (1, 0), (0, -2)),
)

# Upper-left template for the raster-order baseline.
RASTER_TEMPLATE: tuple[tuple[int, int], ...] = ((0, -1), (-1, 0), (-1, -1), (-1, 1))


@dataclass(frozen=True)
class WindowRect:
    row0: int
    col0: int
    height: int
    width: int

    def contains(self, i: int, j: int) -> bool:
        return (
            self.row0 <= i < self.row0 + self.height
            and self.col0 <= j < self.col0 + self.width
        )


class TokenMap:
    """Rectangular grid of token indices in [0, alphabet) with MASK holes."""

    __slots__ = ("cells", "alphabet")

    def __init__(self, cells, alphabet: int):
        arr = np.ascontiguousarray(cells, dtype=np.int32)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError("token map must be a non-empty 2-d grid")
        if not 2 <= alphabet <= 32768:
            raise AlphabetMismatch(f"alphabet size {alphabet} outside [2, 32768]")
        bad = (arr != MASK) & ((arr < 0) | (arr >= alphabet))
        if bad.any():
            raise ValueError("cell values must be MASK or in [0, alphabet)")
        self.cells = arr
        self.alphabet = alphabet

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    def has_mask(self) -> bool:
        return bool((self.cells == MASK).any())

    def copy(self) -> "TokenMap":
        return TokenMap(self.cells.copy(), self.alphabet)

    def masked(self, keep) -> "TokenMap":
        """Return a copy with cells where ``keep`` is falsy replaced by MASK."""
        keep = np.asarray(keep)
        if keep.shape != self.cells.shape:
            raise ValueError("keep grid dimensions do not match the token map")
        out = self.cells.copy()
        out[keep == 0] = MASK
        return TokenMap(out, self.alphabet)

    def __eq__(self, other):
        if not isinstance(other, TokenMap):
            return NotImplemented
        return self.alphabet == other.alphabet and np.array_equal(self.cells, other.cells)

    def __repr__(self):
        return f"TokenMap(h={self.height}, w={self.width}, alphabet={self.alphabet})"


def group_of(i: int, j: int) -> int:
    """Group id of position (i, j); total over all non-negative coordinates."""
    return (i & 1) + 2 * ((i ^ j) & 1)


def _check_window(size: int) -> None:
    if size < 2 or size % 2 != 0:
        raise ValueError(f"window size must be even and >= 2, got {size}")


@lru_cache(maxsize=None)
def tile_windows(height: int, width: int, window: int) -> tuple[WindowRect, ...]:
    """Non-overlapping raster tiling; edge remainders become smaller windows."""
    _check_window(window)
    if height < 1 or width < 1:
        raise ValueError("grid dimensions must be positive")
    out = []
    for r0 in range(0, height, window):
        for c0 in range(0, width, window):
            out.append(
                WindowRect(r0, c0, min(window, height - r0), min(window, width - c0))
            )
    return tuple(out)


def window_of(i: int, j: int, height: int, width: int, window: int) -> WindowRect:
    """The tile rectangle containing position (i, j)."""
    r0 = (i // window) * window
    c0 = (j // window) * window
    return WindowRect(r0, c0, min(window, height - r0), min(window, width - c0))


def window_lookup(height: int, width: int, window: int):
    """O(1) position-to-tile mapping over prebuilt rectangles."""
    tiles = tile_windows(height, width, window)
    per_row = (width + window - 1) // window
    return lambda i, j: tiles[(i // window) * per_row + (j // window)]


@lru_cache(maxsize=None)
def coding_order(height: int, width: int, window: int) -> tuple[tuple[tuple[int, int], int], ...]:
    """Stage-major permutation of all positions: ((i, j), stage) entries.

    Stage s enumerates, window by window in raster order, the group-s
    positions of each window in raster order.
    """
    tiles = tile_windows(height, width, window)
    entries = []
    for stage in range(GROUP_COUNT):
        for rect in tiles:
            for i in range(rect.row0, rect.row0 + rect.height):
                for j in range(rect.col0, rect.col0 + rect.width):
                    if group_of(i, j) == stage:
                        entries.append(((i, j), stage))
    return tuple(entries)


@lru_cache(maxsize=None)
def raster_order(height: int, width: int, window: int) -> tuple[tuple[tuple[int, int], int], ...]:
    """Window-by-window raster permutation for the raster-order baseline."""
    tiles = tile_windows(height, width, window)
    entries = []
    for rect in tiles:
        for i in range(rect.row0, rect.row0 + rect.height):
            for j in range(rect.col0, rect.col0 + rect.width):
                entries.append(((i, j), 0))
    return tuple(entries)


def context_positions(
    pos: tuple[int, int], stage: int, window: WindowRect
) -> tuple[tuple[int, int] | None, ...]:
    """Absolute context positions for ``pos``, slot id = tuple index.

    Slots falling outside ``window`` are reported as None so context tuples
    keep a fixed arity per stage.
    """
    i, j = pos
    out = []
    for di, dj in CONTEXT_TEMPLATES[stage]:
        ii, jj = i + di, j + dj
        out.append((ii, jj) if window.contains(ii, jj) else None)
    return tuple(out)
