"""scikit-learn style front end for the streaming correlation driver."""

from __future__ import annotations

import copy

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .grid import CutpointGrid, grid_from_sample
from .stream import CorrelationStream, StreamConfig, default_n_cutpoints, normalize_kinds

__all__ = ["StreamingRankCorrelation"]


class StreamingRankCorrelation(BaseEstimator):
    """Online Spearman / Kendall tau-b / Pearson correlation of two columns.

    Parameters
    ----------
    kinds : tuple of str, default=("spearman", "kendall")
        Correlations to track. Aliases ``"SR"``, ``"KT"`` and ``"P"`` work too.
    cutpoints : {"normal", "empirical", "unique"} or (x_cuts, y_cuts), default="normal"
        How to discretise each column. ``"normal"`` uses standard normal
        quantiles and suits standardised data; ``"empirical"`` and
        ``"unique"`` are estimated from the first batch passed to
        :meth:`fit` or :meth:`partial_fit`. A pair of sequences fixes the
        cutpoints explicitly.
    n_cutpoints : int, optional
        Cutpoints per axis for the quantile methods. Defaults to 30, or 100
        when Kendall's tau is requested.
    window : int, optional
        Sliding-window length in observations. ``None`` uses all past data.
    n_gap : int, default=1
        Emission period used by :meth:`transform`.

    Attributes
    ----------
    grid_ : CutpointGrid
    stream_ : CorrelationStream
    correlation_ : dict of str to float
        Current estimates; NaN where undefined.
    n_samples_seen_ : int
    n_features_in_ : int

    Examples
    --------
    >>> import numpy as np
    >>> X = np.column_stack([np.arange(10.0), np.arange(10.0) ** 3])
    >>> est = StreamingRankCorrelation(cutpoints="unique").fit(X)
    >>> est.correlation_["spearman"], est.correlation_["kendall"]
    (1.0, 1.0)
    """

    def __init__(
        self,
        kinds=("spearman", "kendall"),
        cutpoints="normal",
        n_cutpoints=None,
        window=None,
        n_gap=1,
    ):
        self.kinds = kinds
        self.cutpoints = cutpoints
        self.n_cutpoints = n_cutpoints
        self.window = window
        self.n_gap = n_gap

    def _validate(self, X):
        X = check_array(X, dtype=np.float64, ensure_all_finite="allow-nan")
        if X.shape[1] != 2:
            raise ValueError(f"expected 2 columns (x, y), got {X.shape[1]}")
        return X

    def _config(self):
        return StreamConfig(
            mode="all" if self.window is None else "window",
            n_gap=self.n_gap,
            window=self.window,
            kinds=normalize_kinds(self.kinds),
        )

    def _make_grid(self, X) -> CutpointGrid:
        if isinstance(self.cutpoints, str):
            k = self.n_cutpoints
            if k is None:
                k = default_n_cutpoints(self.kinds)
            keep = ~np.isnan(X).any(axis=1)
            return grid_from_sample(X[keep, 0], X[keep, 1], self.cutpoints, k)
        x_cuts, y_cuts = self.cutpoints
        return CutpointGrid(x_cuts, y_cuts)

    def _reset(self, X):
        self.grid_ = self._make_grid(X)
        self.stream_ = CorrelationStream(self.grid_, self._config())
        self.n_features_in_ = 2

    def _ingest(self, X):
        step = self.stream_.step
        for x, y in X.tolist():
            step(x, y)
        self._publish()

    def _publish(self):
        stream = self.stream_
        self.n_samples_seen_ = stream.t
        self.n_skipped_ = stream.skipped
        self.correlation_ = {k: float(e) for k, e in stream.estimates().items()}

    def fit(self, X, y=None):
        """Reset, derive cutpoints from ``X`` if needed, and ingest ``X``."""
        X = self._validate(X)
        self._reset(X)
        self._ingest(X)
        return self

    def partial_fit(self, X, y=None):
        """Ingest another batch; the first call fixes the cutpoints."""
        X = self._validate(X)
        if not hasattr(self, "stream_"):
            self._reset(X)
        self._ingest(X)
        return self

    def transform(self, X):
        """Running estimates after each row of ``X``, continuing from the fitted state.

        Returns an ``(n_samples, n_kinds)`` array with NaN on rows that do not
        hit the emission schedule or whose estimate is undefined. The fitted
        state itself is left untouched.
        """
        check_is_fitted(self, "stream_")
        X = self._validate(X)
        stream = copy.deepcopy(self.stream_)
        kinds = stream.config.kinds
        out = np.full((X.shape[0], len(kinds)), np.nan)
        for row, (x, y) in enumerate(X.tolist()):
            record = stream.step(x, y)
            if record is not None:
                out[row] = [float(record.estimates[k]) for k in kinds]
        return out

    def fit_transform(self, X, y=None):
        X = self._validate(X)
        self._reset(X)
        out = self.transform(X)
        self._ingest(X)
        return out

    def get_feature_names_out(self, input_features=None):
        return np.asarray(normalize_kinds(self.kinds), dtype=object)

