"""Cutpoint grids and the count-matrix sketch.

A :class:`CutpointGrid` partitions the plane into ``m1 x m2`` half-open cells
``[cx[i-1], cx[i]) x [cy[j-1], cy[j])`` with implicit infinite outer
boundaries. A :class:`CountSketch` counts observations per cell and caches the
row sums, column sums and total, which is all the rank estimators need.

Cell indices are 0-based throughout: row ``i`` holds x values in
``[x_cuts[i-1], x_cuts[i])``, so a value equal to a cutpoint lands in the
upper cell.

>>> grid = CutpointGrid([0.0], [0.0])
>>> grid.find_cell(-0.3, 0.3)
(0, 1)
>>> sketch = CountSketch(grid)
>>> sketch.insert(0, 1)
>>> sketch.counts.tolist(), sketch.total
([[0, 1], [0, 0]], 1)
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from statistics import NormalDist
from typing import Iterable, Sequence

import numpy as np

from .exceptions import InputError, SketchStateError

__all__ = [
    "CutpointGrid",
    "CountSketch",
    "normal_quantile_cuts",
    "empirical_quantile_cuts",
    "unique_value_cuts",
    "levels_of",
    "even_probs",
    "grid_from_sample",
]


def _as_cuts(values, name):
    cuts = tuple(float(v) for v in values)
    for c in cuts:
        if not math.isfinite(c):
            raise InputError(f"{name} must be finite, got {c!r}")
    for a, b in zip(cuts, cuts[1:]):
        if not a < b:
            raise InputError(f"{name} must be strictly increasing ({a!r} >= {b!r})")
    return cuts


@dataclass(frozen=True)
class CutpointGrid:
    """Sorted finite cutpoints for each axis.

    The ``-inf``/``+inf`` sentinels are implicit, so ``k`` cutpoints give
    ``k + 1`` cells on that axis. Grids are immutable; a sketch built over a
    grid can never be rebinned.
    """

    x_cuts: tuple[float, ...]
    y_cuts: tuple[float, ...]

    def __init__(self, x_cuts: Iterable[float] = (), y_cuts: Iterable[float] = ()):
        object.__setattr__(self, "x_cuts", _as_cuts(x_cuts, "x_cuts"))
        object.__setattr__(self, "y_cuts", _as_cuts(y_cuts, "y_cuts"))

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.x_cuts) + 1, len(self.y_cuts) + 1

    def find_cell(self, x: float, y: float) -> tuple[int, int]:
        """Return the 0-based ``(row, col)`` cell containing ``(x, y)``.

        Binary search on each axis, ``O(log m1 + log m2)``. Infinite values
        fall in the outermost cells; NaN raises :class:`InputError`.
        """
        if x != x or y != y:
            raise InputError(f"cannot bin NaN observation ({x!r}, {y!r})")
        return bisect_right(self.x_cuts, x), bisect_right(self.y_cuts, y)

    def find_cells(self, xs, ys) -> tuple[np.ndarray, np.ndarray]:
        """Vectorised :meth:`find_cell` over arrays of finite or infinite values."""
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        if np.isnan(xs).any() or np.isnan(ys).any():
            raise InputError("cannot bin NaN observations")
        rows = np.searchsorted(np.asarray(self.x_cuts), xs, side="right")
        cols = np.searchsorted(np.asarray(self.y_cuts), ys, side="right")
        return rows, cols


class CountSketch:
    """``m1 x m2`` matrix of observation counts over a :class:`CutpointGrid`.

    Counts are int64. Row sums, column sums and the total are kept in step
    with every :meth:`insert` and :meth:`remove`.
    """

    __slots__ = ("grid", "counts", "row_sums", "col_sums", "total")

    def __init__(self, grid: CutpointGrid):
        self.grid = grid
        m1, m2 = grid.shape
        self.counts = np.zeros((m1, m2), dtype=np.int64)
        self.row_sums = np.zeros(m1, dtype=np.int64)
        self.col_sums = np.zeros(m2, dtype=np.int64)
        self.total = 0

    @classmethod
    def from_counts(cls, counts, grid: CutpointGrid | None = None) -> "CountSketch":
        """Build a sketch from an explicit count matrix.

        Without ``grid`` an integer-valued placeholder grid of matching shape
        is used (cutpoints ``0.5, 1.5, ...``), which is what the estimator
        tests need.
        """
        counts = np.array(counts, dtype=np.int64, ndmin=2)
        if counts.ndim != 2:
            raise InputError("counts must be a 2-D matrix")
        if (counts < 0).any():
            raise InputError("counts must be nonnegative")
        m1, m2 = counts.shape
        if grid is None:
            grid = CutpointGrid(np.arange(m1 - 1) + 0.5, np.arange(m2 - 1) + 0.5)
        elif grid.shape != counts.shape:
            raise InputError(f"counts shape {counts.shape} does not match grid {grid.shape}")
        sketch = cls(grid)
        sketch.counts[...] = counts
        sketch.row_sums[...] = counts.sum(axis=1)
        sketch.col_sums[...] = counts.sum(axis=0)
        sketch.total = int(counts.sum())
        return sketch

    @classmethod
    def from_observations(cls, grid: CutpointGrid, xs, ys) -> "CountSketch":
        """Bin a batch of observations in one pass."""
        rows, cols = grid.find_cells(xs, ys)
        counts = np.zeros(grid.shape, dtype=np.int64)
        np.add.at(counts, (rows, cols), 1)
        return cls.from_counts(counts, grid)

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape

    def _check_cell(self, i, j):
        m1, m2 = self.counts.shape
        if not (0 <= i < m1 and 0 <= j < m2):
            raise SketchStateError(f"cell ({i}, {j}) outside {m1}x{m2} sketch")

    def insert(self, i: int, j: int) -> None:
        self._check_cell(i, j)
        self.counts[i, j] += 1
        self.row_sums[i] += 1
        self.col_sums[j] += 1
        self.total += 1

    def remove(self, i: int, j: int) -> None:
        self._check_cell(i, j)
        if self.counts[i, j] <= 0:
            raise SketchStateError(f"cannot remove from empty cell ({i}, {j})")
        self.counts[i, j] -= 1
        self.row_sums[i] -= 1
        self.col_sums[j] -= 1
        self.total -= 1

    def add(self, x: float, y: float) -> tuple[int, int]:
        """Bin and insert one observation; returns its cell."""
        i, j = self.grid.find_cell(x, y)
        self.insert(i, j)
        return i, j

    def merge(self, other: "CountSketch") -> "CountSketch":
        """Elementwise sum of two sketches sharing a grid, as a new sketch."""
        if self.grid != other.grid:
            raise SketchStateError("cannot merge sketches built over different grids")
        merged = CountSketch(self.grid)
        merged.counts = self.counts + other.counts
        merged.row_sums = self.row_sums + other.row_sums
        merged.col_sums = self.col_sums + other.col_sums
        merged.total = self.total + other.total
        return merged

    __add__ = merge

    def copy(self) -> "CountSketch":
        dup = CountSketch(self.grid)
        dup.counts = self.counts.copy()
        dup.row_sums = self.row_sums.copy()
        dup.col_sums = self.col_sums.copy()
        dup.total = self.total
        return dup

    def transpose(self) -> "CountSketch":
        grid = CutpointGrid(self.grid.y_cuts, self.grid.x_cuts)
        return CountSketch.from_counts(self.counts.T, grid)

    def is_consistent(self) -> bool:
        """True when the cached sums match sums recomputed from ``counts``."""
        return (
            bool((self.counts >= 0).all())
            and np.array_equal(self.row_sums, self.counts.sum(axis=1))
            and np.array_equal(self.col_sums, self.counts.sum(axis=0))
            and self.total == int(self.counts.sum())
        )

    def __eq__(self, other):
        if not isinstance(other, CountSketch):
            return NotImplemented
        return (
            self.grid == other.grid
            and self.total == other.total
            and np.array_equal(self.counts, other.counts)
            and np.array_equal(self.row_sums, other.row_sums)
            and np.array_equal(self.col_sums, other.col_sums)
        )

    __hash__ = None

    def __repr__(self):
        m1, m2 = self.shape
        return f"CountSketch({m1}x{m2}, total={self.total})"


def normal_quantile_cuts(k: int) -> list[float]:
    """Standard normal quantiles at ``1/(k+1), ..., k/(k+1)``.

    The lower half is computed and mirrored, so the result is exactly
    antisymmetric about zero. ``k == 0`` gives no cutpoints (a single cell).
    """
    k = int(k)
    if k < 0:
        raise InputError(f"number of cutpoints must be >= 0, got {k}")
    dist = NormalDist()
    lower = [dist.inv_cdf(i / (k + 1)) for i in range(1, k // 2 + 1)]
    middle = [0.0] if k % 2 else []
    return lower + middle + [-c for c in reversed(lower)]


def empirical_quantile_cuts(sample: Iterable[float], probs: Sequence[float]) -> list[float]:
    """Nearest-rank sample quantiles at ``probs``, deduplicated.

    Heavily tied samples collapse to fewer cutpoints than ``probs``. NaNs in
    the sample are ignored.
    """
    values = np.asarray(list(sample), dtype=float)
    values = np.sort(values[~np.isnan(values)])
    if values.size == 0:
        raise InputError("cannot compute quantile cutpoints of an empty sample")
    probs = np.asarray(probs, dtype=float)
    if ((probs <= 0) | (probs >= 1)).any():
        raise InputError("quantile probabilities must lie in (0, 1)")
    if (np.diff(probs) <= 0).any():
        raise InputError("quantile probabilities must be strictly increasing")
    n = values.size
    # 1-based nearest rank ceil(p * n); the slack absorbs products like 0.15 * 20
    ranks = np.ceil(probs * n - 1e-9).astype(np.int64)
    picked = values[np.clip(ranks - 1, 0, n - 1)]
    return [float(c) for c in np.unique(picked) if math.isfinite(c)]


def unique_value_cuts(levels: Sequence[float]) -> list[float]:
    """Cutpoints giving every level its own cell: midpoints between neighbours."""
    levels = [float(v) for v in levels]
    if not levels:
        raise InputError("need at least one level")
    cuts = []
    for lo, hi in zip(levels, levels[1:]):
        if not lo < hi:
            raise InputError("levels must be sorted and distinct")
        mid = lo + (hi - lo) / 2
        if not (lo < mid < hi and math.isfinite(mid)):
            # adjacent floats or infinite levels; the half-open convention
            # only needs lo < cut <= hi
            mid = math.nextafter(lo, hi)
        cuts.append(mid)
    return cuts


def levels_of(values: Iterable[float]) -> list[float]:
    """Sorted distinct non-NaN values, ready for :func:`unique_value_cuts`."""
    arr = np.asarray(list(values), dtype=float)
    return np.unique(arr[~np.isnan(arr)]).tolist()


def even_probs(k: int) -> list[float]:
    """``1/(k+1), ..., k/(k+1)``: the probabilities behind ``k`` quantile cutpoints."""
    return [i / (k + 1) for i in range(1, k + 1)]


def grid_from_sample(xs, ys, method: str = "normal", k: int | None = 30) -> CutpointGrid:
    """Build a grid by ``method``: ``"normal"``, ``"empirical"`` or ``"unique"``.

    ``"normal"`` ignores the sample; ``"empirical"`` uses ``k`` evenly spaced
    sample quantiles per axis; ``"unique"`` gives every observed level its
    own cell.
    """
    if method == "normal":
        cuts = normal_quantile_cuts(k)
        return CutpointGrid(cuts, cuts)
    if method == "empirical":
        probs = even_probs(k)
        return CutpointGrid(empirical_quantile_cuts(xs, probs), empirical_quantile_cuts(ys, probs))
    if method == "unique":
        return CutpointGrid(unique_value_cuts(levels_of(xs)), unique_value_cuts(levels_of(ys)))
    raise ValueError(f"unknown cutpoint method {method!r}")
