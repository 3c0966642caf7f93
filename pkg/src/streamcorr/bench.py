"""Online-vs-batch timing and accuracy sweeps over the simulation designs."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

import numpy as np

from .estimators import kendall_from_sketch, spearman_from_sketch
from .grid import CountSketch, CutpointGrid, normal_quantile_cuts
from .oracles import batch_kendall_taub, exact_spearman, run_batch
from .simgen import gen_sim1, gen_sim2
from .stream import StreamConfig, run_stream

__all__ = ["BenchSpec", "simulate", "time_online", "time_batch", "final_error", "sweep", "BENCH_COLUMNS"]

BENCH_COLUMNS = (
    "design",
    "kind",
    "T",
    "cutpoints",
    "n_gap",
    "window",
    "replications",
    "seeds",
    "online_seconds",
    "batch_seconds",
    "speedup",
    "l1_error",
)

_SKETCH_ESTIMATORS = {"spearman": spearman_from_sketch, "kendall": kendall_from_sketch}
_EXACT = {"spearman": exact_spearman, "kendall": batch_kendall_taub}


@dataclass(frozen=True)
class BenchSpec:
    design: str = "sim1"
    kinds: tuple[str, ...] = ("spearman",)
    T: tuple[int, ...] = (1000, 10000)
    cutpoints: tuple[int, ...] = (10, 20, 50)
    n_gap: tuple[int, ...] = (1,)
    replications: int = 3
    seed: int = 1
    sigma: float = 1.0
    window: int | None = None
    batch: bool = True
    batch_max_T: int = 10_000


def simulate(design, T, seed, sigma=1.0, m=None):
    if design == "sim1":
        return gen_sim1(T, sigma, seed)
    if design == "sim2":
        return gen_sim2(T, m, seed)
    raise ValueError(f"unknown design {design!r}")


def _config(kind, n_gap, window):
    if window:
        return StreamConfig(mode="window", n_gap=n_gap, window=window, kinds=(kind,))
    return StreamConfig(n_gap=n_gap, kinds=(kind,))


def time_online(x, y, grid, config, repeat=1):
    """Best-of-``repeat`` wall time of the online driver, plus its emissions."""
    pairs = list(zip(x.tolist(), y.tolist()))
    best, records = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        records = run_stream(pairs, grid, config)
        best = min(best, time.perf_counter() - start)
    return best, records


def time_batch(x, y, config, repeat=1):
    pairs = list(zip(x.tolist(), y.tolist()))
    best, records = float("inf"), None
    for _ in range(repeat):
        start = time.perf_counter()
        records = run_batch(pairs, config)
        best = min(best, time.perf_counter() - start)
    return best, records


def final_error(x, y, grid, kind, window=None):
    """``|online - exact|`` at the last index, on the trailing window if given."""
    if window:
        x, y = x[-window:], y[-window:]
    online = _SKETCH_ESTIMATORS[kind](CountSketch.from_observations(grid, x, y))
    exact = _EXACT[kind](x, y)
    if online.value is None or exact.value is None:
        return float("nan")
    return abs(online.value - exact.value)


def sweep(spec: BenchSpec):
    """Yield one result row (a dict keyed by :data:`BENCH_COLUMNS`) per setting."""
    seeds = list(range(spec.seed, spec.seed + spec.replications))
    for kind, T, n_gap in itertools.product(spec.kinds, spec.T, spec.n_gap):
        data = {s: simulate(spec.design, T, s, spec.sigma) for s in seeds}
        config = _config(kind, n_gap, spec.window)
        batch_seconds = float("nan")
        if spec.batch and T <= spec.batch_max_T:
            batch_seconds = float(np.mean([time_batch(*data[s], config)[0] for s in seeds]))
        for k in spec.cutpoints:
            cuts = normal_quantile_cuts(k)
            grid = CutpointGrid(cuts, cuts)
            online, errors = [], []
            for s in seeds:
                x, y = data[s]
                online.append(time_online(x, y, grid, config)[0])
                errors.append(final_error(x, y, grid, kind, spec.window))
            online_seconds = float(np.mean(online))
            yield {
                "design": spec.design,
                "kind": kind,
                "T": T,
                "cutpoints": k,
                "n_gap": n_gap,
                "window": spec.window or "",
                "replications": len(seeds),
                "seeds": " ".join(map(str, seeds)),
                "online_seconds": online_seconds,
                "batch_seconds": batch_seconds,
                "speedup": batch_seconds / online_seconds,
                "l1_error": float(np.mean(errors)),
            }
