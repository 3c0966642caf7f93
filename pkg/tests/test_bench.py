import math

import numpy as np
import pytest

from streamcorr.bench import BENCH_COLUMNS, BenchSpec, final_error, simulate, sweep
from streamcorr.grid import CutpointGrid, normal_quantile_cuts


def test_rows_have_every_column():
    rows = list(sweep(BenchSpec(T=(200,), cutpoints=(5,), replications=1)))
    assert len(rows) == 1 and tuple(rows[0]) == BENCH_COLUMNS


def test_error_shrinks_with_cutpoints():
    rows = list(sweep(BenchSpec(T=(5000,), cutpoints=(10, 50), replications=5, batch=False)))
    assert rows[0]["l1_error"] > rows[1]["l1_error"]
    assert all(math.isnan(r["batch_seconds"]) for r in rows)


def test_online_time_grows_with_cutpoints():
    # extraction dominates at n_gap=1 once the grid is large
    rows = list(sweep(BenchSpec(kinds=("kendall",), T=(2000,), cutpoints=(5, 100), replications=1, batch=False)))
    assert rows[1]["online_seconds"] > rows[0]["online_seconds"]


def test_ngap_speedup_visible():
    rows = list(sweep(BenchSpec(T=(3000,), cutpoints=(30,), n_gap=(1, 100), replications=1, batch=False)))
    assert rows[0]["online_seconds"] > 3 * rows[1]["online_seconds"]


def test_windowed_final_error_uses_tail():
    x, y = simulate("sim2", 4000, seed=1)
    grid = CutpointGrid(normal_quantile_cuts(30), normal_quantile_cuts(30))
    assert final_error(x, y, grid, "spearman", window=500) < 0.05


def test_unknown_design():
    with pytest.raises(ValueError):
        simulate("sim3", 10, 0)
