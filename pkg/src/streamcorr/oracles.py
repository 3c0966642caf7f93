"""Exact batch correlations used as ground truth.

``exact_kendall_taub`` enumerates every pair, which is slow but obviously
right; ``batch_kendall_taub`` is the fast ``O(n log n)`` comparator used when
a batch recomputation runs at every emission point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .estimators import CorrelationEstimate, KendallTally, taub_from_tally
from .exceptions import InputError

__all__ = [
    "midranks",
    "exact_spearman",
    "exact_kendall_taub",
    "kendall_tally",
    "batch_kendall_taub",
    "batch_pearson",
    "PearsonState",
    "run_batch",
    "iter_batch",
]


def _pair_arrays(xs, ys):
    x = np.asarray(xs, dtype=float).ravel()
    y = np.asarray(ys, dtype=float).ravel()
    if x.shape != y.shape:
        raise InputError(f"length mismatch: {x.size} x values vs {y.size} y values")
    if x.size < 2:
        raise InputError(f"need at least 2 observations, got {x.size}")
    if np.isnan(x).any() or np.isnan(y).any():
        raise InputError("NaN in input; drop incomplete pairs first")
    return x, y


def midranks(values) -> np.ndarray:
    """1-based ranks with ties sharing the average of the ranks they span."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="mergesort")
    sorted_v = v[order]
    # group boundaries in the sorted sequence
    starts = np.flatnonzero(np.r_[True, sorted_v[1:] != sorted_v[:-1]])
    ends = np.r_[starts[1:], v.size]
    group_rank = (starts + 1 + ends) / 2.0
    ranks = np.empty(v.size, dtype=float)
    ranks[order] = np.repeat(group_rank, ends - starts)
    return ranks


def _pearson(a: np.ndarray, b: np.ndarray, at_index: int) -> CorrelationEstimate:
    if a.min() == a.max() or b.min() == b.max():
        return CorrelationEstimate(None, at_index)
    da = a - a.mean()
    db = b - b.mean()
    saa = float(da @ da)
    sbb = float(db @ db)
    return CorrelationEstimate.from_ratio(float(da @ db), math.sqrt(saa * sbb), at_index)


def exact_spearman(xs, ys) -> CorrelationEstimate:
    """Pearson correlation of the midranks of ``xs`` and ``ys``."""
    x, y = _pair_arrays(xs, ys)
    return _pearson(midranks(x), midranks(y), x.size)


def batch_pearson(xs, ys) -> CorrelationEstimate:
    x, y = _pair_arrays(xs, ys)
    return _pearson(x, y, x.size)


def kendall_tally(xs, ys, block: int = 512) -> KendallTally:
    """Classify all ``n(n-1)/2`` pairs by brute force.

    Works in row blocks against the upper triangle so memory stays at
    ``block * n`` booleans.
    """
    x, y = _pair_arrays(xs, ys)
    n = x.size
    P = Q = T = U = B = 0
    idx = np.arange(n)
    for lo in range(0, n - 1, block):
        hi = min(lo + block, n - 1)
        rows = idx[lo:hi, None]
        upper = idx[None, :] > rows
        sx = np.sign(x[None, :] - x[lo:hi, None])
        sy = np.sign(y[None, :] - y[lo:hi, None])
        xt = (sx == 0) & upper
        yt = (sy == 0) & upper
        prod = sx * sy
        P += int(np.count_nonzero((prod > 0) & upper))
        Q += int(np.count_nonzero((prod < 0) & upper))
        both = int(np.count_nonzero(xt & yt))
        T += int(np.count_nonzero(xt)) - both
        U += int(np.count_nonzero(yt)) - both
        B += both
    return KendallTally(P, Q, T, U, B)


def exact_kendall_taub(xs, ys) -> CorrelationEstimate:
    """Kendall's tau-b by enumerating every pair, ``O(n^2)``."""
    tally = kendall_tally(xs, ys)
    return taub_from_tally(tally, len(xs))


def _tied_pairs(v: np.ndarray) -> int:
    counts = np.unique(v, return_counts=True)[1].astype(np.int64)
    return int(counts @ (counts - 1)) // 2


def batch_kendall_taub(xs, ys) -> CorrelationEstimate:
    """Kendall's tau-b in ``O(n log n)`` via :func:`scipy.stats.kendalltau`.

    scipy divides by two separate square roots, which leaves monotone data a
    rounding step short of 1. ``P - Q`` is an integer, so it is recovered from
    scipy's tau and re-divided by ``sqrt(a * b)`` over exact integer pair
    counts, the same arithmetic the sketch estimator uses.
    """
    x, y = _pair_arrays(xs, ys)
    tau = stats.kendalltau(x, y, variant="b").statistic
    n = x.size
    if not math.isfinite(tau):
        return CorrelationEstimate(None, n)
    pairs = n * (n - 1) // 2
    a, b = pairs - _tied_pairs(x), pairs - _tied_pairs(y)
    den = math.sqrt(a * b)
    if den < 2.0**40:
        return CorrelationEstimate.from_ratio(float(round(tau * den)), den, n)
    return CorrelationEstimate(min(1.0, max(-1.0, float(tau))), n)


@dataclass
class PearsonState:
    """Running sufficient statistics for Pearson's r.

    ``update`` adds a pair and ``downdate`` takes one back out, so the same
    state serves sliding windows.
    """

    n: int = 0
    sum_x: float = 0.0
    sum_y: float = 0.0
    sum_xx: float = 0.0
    sum_yy: float = 0.0
    sum_xy: float = 0.0

    def update(self, x: float, y: float) -> "PearsonState":
        self.n += 1
        self.sum_x += x
        self.sum_y += y
        self.sum_xx += x * x
        self.sum_yy += y * y
        self.sum_xy += x * y
        return self

    def downdate(self, x: float, y: float) -> "PearsonState":
        if self.n <= 0:
            raise InputError("cannot remove an observation from an empty Pearson state")
        self.n -= 1
        self.sum_x -= x
        self.sum_y -= y
        self.sum_xx -= x * x
        self.sum_yy -= y * y
        self.sum_xy -= x * y
        return self

    def value(self) -> CorrelationEstimate:
        n = self.n
        if n < 2:
            return CorrelationEstimate(None, n)
        vx = n * self.sum_xx - self.sum_x * self.sum_x
        vy = n * self.sum_yy - self.sum_y * self.sum_y
        # cancellation leaves constant data with a tiny nonzero variance
        if vx <= 1e-13 * n * self.sum_xx or vy <= 1e-13 * n * self.sum_yy:
            return CorrelationEstimate(None, n)
        cov = n * self.sum_xy - self.sum_x * self.sum_y
        return CorrelationEstimate.from_ratio(cov, math.sqrt(vx * vy), n)


def pearson_update(state: PearsonState, x: float, y: float) -> PearsonState:
    """Functional form of :meth:`PearsonState.update`; returns a new state."""
    return PearsonState(
        state.n + 1,
        state.sum_x + x,
        state.sum_y + y,
        state.sum_xx + x * x,
        state.sum_yy + y * y,
        state.sum_xy + x * y,
    )


def pearson_value(state: PearsonState) -> CorrelationEstimate:
    return state.value()


_BATCH = {
    "spearman": exact_spearman,
    "kendall": batch_kendall_taub,
    "pearson": batch_pearson,
}


class _Growable:
    """Append-only float buffer with amortised O(1) appends and zero-copy views."""

    def __init__(self, capacity=1024):
        self._buf = np.empty(capacity)
        self.size = 0

    def append(self, value):
        if self.size == self._buf.size:
            self._buf = np.concatenate([self._buf, np.empty(self._buf.size)])
        self._buf[self.size] = value
        self.size += 1

    def view(self, lo, hi):
        return self._buf[lo:hi]


def run_batch(source, config=None):
    """Eager form of :func:`iter_batch`."""
    return list(iter_batch(source, config))


def iter_batch(source, config=None):
    """Batch comparator for :func:`streamcorr.stream.run_stream`.

    Keeps every accepted observation and, at each emission index, recomputes
    the exact correlations from scratch on the full prefix (or the trailing
    window). Same schedule, NaN policy and output records as the online
    driver; total cost grows super-linearly with stream length.
    """
    from .stream import EmissionRecord, StreamConfig

    config = config if config is not None else StreamConfig()
    xs, ys = _Growable(), _Growable()
    t = 0
    for index, pair in enumerate(source):
        try:
            x, y = pair
            x = float(x)
            y = float(y)
        except (TypeError, ValueError) as exc:
            raise InputError(f"not a numeric pair: {pair!r} ({exc})", index) from exc
        if x != x or y != y:
            continue
        xs.append(x)
        ys.append(y)
        t += 1
        if t % config.n_gap:
            continue
        lo = max(0, t - config.window) if config.sliding else 0
        wx, wy = xs.view(lo, t), ys.view(lo, t)
        estimates = {}
        for kind in config.kinds:
            if t - lo < 2:
                estimates[kind] = CorrelationEstimate(None, t)
            else:
                estimates[kind] = CorrelationEstimate(_BATCH[kind](wx, wy).value, t)
        yield EmissionRecord(t, estimates)
