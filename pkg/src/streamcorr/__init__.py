"""Online Spearman and Kendall tau-b correlation over unbounded streams.

Observations are binned into a fixed count matrix over cutpoint grids, and
rank correlations are read off the matrix in time proportional to its size,
independent of how many observations have been seen.
"""

from .estimator import StreamingRankCorrelation
from .estimators import (
    CorrelationEstimate,
    KendallTally,
    kendall_from_sketch,
    spearman_from_sketch,
    tally_from_sketch,
)
from .exceptions import InputError, SketchStateError
from .grid import (
    CountSketch,
    CutpointGrid,
    empirical_quantile_cuts,
    grid_from_sample,
    normal_quantile_cuts,
    unique_value_cuts,
)
from .oracles import (
    PearsonState,
    batch_kendall_taub,
    batch_pearson,
    run_batch,
    exact_kendall_taub,
    exact_spearman,
)
from .simgen import gen_sim1, gen_sim2
from .stream import CorrelationStream, EmissionRecord, ObservationWindow, StreamConfig, run_stream

__version__ = "0.1.0"

__all__ = [
    "StreamingRankCorrelation",
    "CorrelationEstimate",
    "KendallTally",
    "kendall_from_sketch",
    "spearman_from_sketch",
    "tally_from_sketch",
    "InputError",
    "SketchStateError",
    "CountSketch",
    "CutpointGrid",
    "empirical_quantile_cuts",
    "grid_from_sample",
    "normal_quantile_cuts",
    "unique_value_cuts",
    "PearsonState",
    "batch_kendall_taub",
    "batch_pearson",
    "run_batch",
    "exact_kendall_taub",
    "exact_spearman",
    "gen_sim1",
    "gen_sim2",
    "CorrelationStream",
    "EmissionRecord",
    "ObservationWindow",
    "StreamConfig",
    "run_stream",
]
