"""Online driver: bin each observation, update the sketch, emit every ``n_gap``.

In ``"all"`` mode the sketch accumulates every accepted observation. In
``"window"`` mode the cells of the last ``window`` observations are kept in a
ring buffer and the oldest one is evicted from the sketch before a new one
goes in, so estimates cover exactly the most recent ``window`` observations.
Before the window fills, estimates cover everything seen so far.
"""

from __future__ import annotations

from array import array
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .estimators import CorrelationEstimate, kendall_from_sketch, spearman_from_sketch
from .exceptions import InputError
from .grid import CountSketch, CutpointGrid
from .oracles import PearsonState

__all__ = [
    "KINDS",
    "normalize_kinds",
    "default_n_cutpoints",
    "StreamConfig",
    "ObservationWindow",
    "EmissionRecord",
    "CorrelationStream",
    "run_stream",
]

KINDS = ("spearman", "kendall", "pearson")

_ALIASES = {
    "spearman": "spearman",
    "sr": "spearman",
    "rho": "spearman",
    "kendall": "kendall",
    "kt": "kendall",
    "tau": "kendall",
    "pearson": "pearson",
    "p": "pearson",
    "r": "pearson",
}


def default_n_cutpoints(kinds) -> int:
    """Rule of thumb: 30 cutpoints per axis for Spearman, 100 once Kendall is involved."""
    return 100 if "kendall" in normalize_kinds(kinds) else 30


def normalize_kinds(kinds) -> tuple[str, ...]:
    """Canonical, de-duplicated kind names; accepts ``"SR,KT"`` style strings."""
    if isinstance(kinds, str):
        kinds = kinds.split(",")
    out = []
    for k in kinds:
        key = str(k).strip().lower()
        if key not in _ALIASES:
            raise ValueError(f"unknown correlation kind {k!r}; expected one of {KINDS}")
        if _ALIASES[key] not in out:
            out.append(_ALIASES[key])
    if not out:
        raise ValueError("at least one correlation kind is required")
    return tuple(out)


@dataclass(frozen=True)
class StreamConfig:
    mode: str = "all"
    n_gap: int = 1
    window: int | None = None
    kinds: tuple[str, ...] = ("spearman",)

    def __post_init__(self):
        if self.mode not in ("all", "window"):
            raise ValueError(f"mode must be 'all' or 'window', got {self.mode!r}")
        if int(self.n_gap) < 1:
            raise ValueError(f"n_gap must be >= 1, got {self.n_gap}")
        if self.mode == "window" and (self.window is None or int(self.window) < 1):
            raise ValueError("window mode needs a window size >= 1")
        object.__setattr__(self, "n_gap", int(self.n_gap))
        object.__setattr__(self, "kinds", normalize_kinds(self.kinds))
        if self.window is not None:
            object.__setattr__(self, "window", int(self.window))

    @property
    def sliding(self) -> bool:
        return self.mode == "window"


class ObservationWindow:
    """Fixed-capacity FIFO of cell coordinates, optionally with raw values.

    Raw values are only kept when something downstream (Pearson) needs them.
    """

    def __init__(self, capacity: int, keep_values: bool = False):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.rows = array("q", bytes(8 * capacity))
        self.cols = array("q", bytes(8 * capacity))
        self.xs = array("d", bytes(8 * capacity)) if keep_values else None
        self.ys = array("d", bytes(8 * capacity)) if keep_values else None
        self._head = 0  # slot of the oldest entry once full
        self._len = 0

    def __len__(self):
        return self._len

    @property
    def full(self) -> bool:
        return self._len == self.capacity

    def oldest(self) -> tuple[int, int]:
        if not self._len:
            raise IndexError("window is empty")
        slot = self._head if self.full else 0
        return self.rows[slot], self.cols[slot]

    def push(self, i: int, j: int, x: float = 0.0, y: float = 0.0):
        """Append a cell; returns the evicted ``(i, j, x, y)`` or ``None``."""
        slot = self._head
        evicted = None
        if self._len == self.capacity:
            if self.xs is None:
                evicted = (self.rows[slot], self.cols[slot], 0.0, 0.0)
            else:
                evicted = (self.rows[slot], self.cols[slot], self.xs[slot], self.ys[slot])
        else:
            self._len += 1
        self.rows[slot] = i
        self.cols[slot] = j
        if self.xs is not None:
            self.xs[slot] = x
            self.ys[slot] = y
        self._head = (slot + 1) % self.capacity
        return evicted

    def __iter__(self) -> Iterator[tuple[int, int]]:
        start = self._head if self.full else 0
        for k in range(self._len):
            slot = (start + k) % self.capacity
            yield self.rows[slot], self.cols[slot]

    def values(self) -> Iterator[tuple[float, float]]:
        if self.xs is None:
            raise ValueError("window was created without keep_values")
        start = self._head if self.full else 0
        for k in range(self._len):
            slot = (start + k) % self.capacity
            yield self.xs[slot], self.ys[slot]


@dataclass(frozen=True)
class EmissionRecord:
    t: int
    estimates: dict[str, CorrelationEstimate] = field(default_factory=dict)

    def __getitem__(self, kind: str) -> CorrelationEstimate:
        return self.estimates[kind]


class CorrelationStream:
    """Stateful driver for one ``(x, y)`` stream.

    ``t`` counts accepted observations only; NaN pairs are tallied in
    ``skipped`` and do not advance the emission schedule.
    """

    def __init__(self, grid: CutpointGrid, config: StreamConfig | None = None):
        self.grid = grid
        self.config = config if config is not None else StreamConfig()
        self.sketch = CountSketch(grid)
        self.t = 0
        self.skipped = 0
        kinds = self.config.kinds
        self._want_pearson = "pearson" in kinds
        self.pearson = PearsonState() if self._want_pearson else None
        self.window = (
            ObservationWindow(self.config.window, keep_values=self._want_pearson)
            if self.config.sliding
            else None
        )
        self._n_gap = self.config.n_gap
        self._x_cuts = grid.x_cuts
        self._y_cuts = grid.y_cuts

    def step(self, x: float, y: float) -> EmissionRecord | None:
        if x != x or y != y:
            self.skipped += 1
            return None
        i = bisect_right(self._x_cuts, x)
        j = bisect_right(self._y_cuts, y)
        sketch = self.sketch
        window = self.window
        if window is not None:
            evicted = window.push(i, j, x, y)
            if evicted is not None:
                sketch.remove(evicted[0], evicted[1])
                if self.pearson is not None:
                    self.pearson.downdate(evicted[2], evicted[3])
        # cells from the grid's own binary search are always in range
        sketch.counts[i, j] += 1
        sketch.row_sums[i] += 1
        sketch.col_sums[j] += 1
        sketch.total += 1
        if self.pearson is not None:
            self.pearson.update(x, y)
            if window is not None and window.full and window._head == 0:
                self._resync_pearson()
        self.t += 1
        if self.t % self._n_gap == 0:
            return EmissionRecord(self.t, self.estimates())
        return None

    def _resync_pearson(self):
        # downdating accumulates rounding error; rebuild once per window pass
        state = PearsonState()
        for x, y in self.window.values():
            state.update(x, y)
        self.pearson = state

    def estimates(self) -> dict[str, CorrelationEstimate]:
        """Current estimates for every configured kind, stamped with ``t``."""
        out = {}
        for kind in self.config.kinds:
            if kind == "spearman":
                est = spearman_from_sketch(self.sketch)
            elif kind == "kendall":
                est = kendall_from_sketch(self.sketch)
            else:
                est = self.pearson.value()
            out[kind] = CorrelationEstimate(est.value, self.t)
        return out

    def extend(self, pairs: Iterable) -> Iterator[EmissionRecord]:
        """Feed ``pairs`` lazily, yielding each emission as it happens."""
        for index, pair in enumerate(pairs):
            try:
                x, y = pair
                x = float(x)
                y = float(y)
            except (TypeError, ValueError) as exc:
                raise InputError(f"not a numeric pair: {pair!r} ({exc})", index) from exc
            record = self.step(x, y)
            if record is not None:
                yield record


def run_stream(source: Iterable, grid: CutpointGrid, config: StreamConfig | None = None) -> list[EmissionRecord]:
    """Run a fresh driver over ``source`` and collect every emission in order."""
    return list(CorrelationStream(grid, config).extend(source))
