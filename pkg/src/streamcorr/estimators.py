"""Spearman's rho and Kendall's tau-b read off a :class:`CountSketch`.

Both extractions touch each cell a constant number of times, so their cost
is ``O(m1 * m2)`` regardless of how many observations the sketch holds. The
results are the exact tie-aware correlations of the *discretised* data, in
which every observation is replaced by its cell coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .grid import CountSketch

__all__ = [
    "CorrelationEstimate",
    "KendallTally",
    "spearman_from_sketch",
    "kendall_from_sketch",
    "tally_from_sketch",
    "taub_from_tally",
]


@dataclass(frozen=True)
class CorrelationEstimate:
    """A correlation value, or ``None`` when it is undefined.

    Undefined means a zero denominator: fewer than two observations, or no
    variation along one of the axes. ``float(estimate)`` gives NaN then.
    """

    value: float | None
    at_index: int = 0

    @property
    def defined(self) -> bool:
        return self.value is not None

    def __float__(self):
        return math.nan if self.value is None else self.value

    @classmethod
    def from_ratio(cls, num: float, den: float, at_index: int = 0) -> "CorrelationEstimate":
        if den == 0 or not math.isfinite(den):
            return cls(None, at_index)
        return cls(min(1.0, max(-1.0, num / den)), at_index)


class KendallTally(NamedTuple):
    """Pair counts: concordant, discordant, x-only ties, y-only ties, ties in both."""

    P: int
    Q: int
    T: int
    U: int
    B: int

    @property
    def n_pairs(self) -> int:
        return self.P + self.Q + self.T + self.U + self.B


def _midranks(margin: np.ndarray) -> np.ndarray:
    # twice the average rank of each margin bucket; empty buckets get twice the
    # running count, matching the placeholder rank they would be assigned
    before = np.cumsum(margin) - margin
    return np.where(margin > 0, 2 * before + margin + 1, 2 * before)


def spearman_from_sketch(sketch: CountSketch) -> CorrelationEstimate:
    """Tie-aware Spearman correlation of the binned data.

    Each non-empty row gets the average rank its observations share, ranks
    are centred by ``(n + 1) / 2`` and normalised, and the correlation is the
    bilinear form ``r_row' M r_col``. Ranks are carried doubled so they stay
    integral until the final ratio.
    """
    n = sketch.total
    if n < 2:
        return CorrelationEstimate(None, n)
    r_row = (_midranks(sketch.row_sums) - (n + 1)).astype(float)
    r_col = (_midranks(sketch.col_sums) - (n + 1)).astype(float)
    ss_row = float(sketch.row_sums @ (r_row * r_row))
    ss_col = float(sketch.col_sums @ (r_col * r_col))
    if ss_row == 0 or ss_col == 0:
        return CorrelationEstimate(None, n)
    num = float(r_row @ (sketch.counts @ r_col))
    return CorrelationEstimate.from_ratio(num, math.sqrt(ss_row * ss_col), n)


def tally_from_sketch(sketch: CountSketch) -> KendallTally:
    """Exact integer pair tallies of the binned data.

    ``P`` sums ``M[i, j] * N[i, j]`` where ``N[i, j]`` is the mass strictly
    south-west of the cell. ``Q`` is whatever remains of the ``n(n-1)/2``
    pairs once concordant pairs and all ties are accounted for.
    """
    M = sketch.counts
    n = int(sketch.total)
    if n == 0:
        return KendallTally(0, 0, 0, 0, 0)
    # inclusive 2-D prefix sums, shifted one cell down and right
    cum = M.cumsum(axis=0).cumsum(axis=1)
    P = int(np.vdot(M[1:, 1:], cum[:-1, :-1]))
    sq = int(np.vdot(M, M))
    T = (int(sketch.row_sums @ sketch.row_sums) - sq) // 2
    U = (int(sketch.col_sums @ sketch.col_sums) - sq) // 2
    B = (sq - n) // 2
    Q = n * (n - 1) // 2 - P - T - U - B
    return KendallTally(P, Q, T, U, B)


def taub_from_tally(tally: KendallTally, at_index: int = 0) -> CorrelationEstimate:
    P, Q, T, U, _ = tally
    a, b = P + Q + T, P + Q + U
    if a == 0 or b == 0:
        return CorrelationEstimate(None, at_index)
    return CorrelationEstimate.from_ratio(float(P - Q), math.sqrt(a * b), at_index)


def kendall_from_sketch(sketch: CountSketch) -> CorrelationEstimate:
    """Kendall's tau-b of the binned data, ``(P - Q) / sqrt((P+Q+T)(P+Q+U))``."""
    n = sketch.total
    if n < 2:
        return CorrelationEstimate(None, n)
    return taub_from_tally(tally_from_sketch(sketch), n)


ESTIMATORS = {
    "spearman": spearman_from_sketch,
    "kendall": kendall_from_sketch,
}
