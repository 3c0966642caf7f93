"""``streamcorr`` command line: run, batch, simulate, bench.

Exit codes: 0 ok, 1 configuration error, 2 I/O error, 3 data error.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import math
import sys
import time
from contextlib import contextmanager
from dataclasses import dataclass, field

from . import __version__
from .bench import BENCH_COLUMNS, BenchSpec, simulate, sweep
from .exceptions import InputError
from .grid import (
    CutpointGrid,
    empirical_quantile_cuts,
    even_probs,
    levels_of,
    normal_quantile_cuts,
    unique_value_cuts,
)
from .oracles import iter_batch
from .stream import KINDS, CorrelationStream, StreamConfig, default_n_cutpoints, normalize_kinds

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_DATA = 0, 1, 2, 3

NA = "NA"


class ConfigError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; that code is reserved for I/O errors
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def format_value(value: float | None) -> str:
    return NA if value is None or math.isnan(value) else "%.17g" % value


def parse_value(text: str) -> float | None:
    return None if text == NA else float(text)


@dataclass
class RunManifest:
    """Everything one ``run`` / ``batch`` invocation needs."""

    source: str | None = None  # path, "-" for stdin, or None when simulating
    sim: str | None = None
    sigma: float = 1.0
    T: int = 1000
    m: int | None = None
    seed: int = 0
    x_col: int = 0
    y_col: int = 1
    header: bool = False
    delimiter: str = ","
    skip_bad_rows: bool = False
    x_cuts: list[float] | None = None
    y_cuts: list[float] | None = None
    cut_method: str = "normal"
    n_cuts: int | None = None
    warmup: int = 1000
    config: StreamConfig = field(default_factory=StreamConfig)
    output: str = "-"

    def validate(self):
        if (self.source is None) == (self.sim is None):
            raise ConfigError("give exactly one input: a CSV path ('-' for stdin), --sim1 or --sim2")
        if self.x_col < 0 or self.y_col < 0:
            raise ConfigError("column selectors must be >= 0")
        if self.n_cuts is not None and self.n_cuts < 0:
            raise ConfigError("number of cutpoints must be >= 0")
        if self.warmup < 1:
            raise ConfigError("--warmup must be >= 1")
        if self.T < 1:
            raise ConfigError("--T must be >= 1")
        try:
            CutpointGrid(self.x_cuts or (), self.y_cuts or ())
        except InputError as exc:
            raise ConfigError(f"bad explicit cutpoints: {exc}") from None


@dataclass
class RowStats:
    bad_rows: int = 0


def _csv_pairs(handle, manifest: RunManifest, stats: RowStats):
    reader = csv.reader(handle, delimiter=manifest.delimiter)
    need = max(manifest.x_col, manifest.y_col) + 1
    for rownum, row in enumerate(reader, start=1):
        if rownum == 1 and manifest.header:
            continue
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        try:
            if len(row) < need:
                raise ValueError(f"expected at least {need} columns, got {len(row)}")
            yield _cell(row[manifest.x_col]), _cell(row[manifest.y_col])
        except ValueError as exc:
            if manifest.skip_bad_rows:
                stats.bad_rows += 1
                continue
            raise DataError(f"row {rownum}: {exc}") from None


def _cell(text: str) -> float:
    text = text.strip()
    if text in ("", NA, "nan", "NaN"):
        return math.nan
    return float(text)


@contextmanager
def _open_pairs(manifest: RunManifest, stats: RowStats):
    if manifest.sim is not None:
        x, y = simulate(manifest.sim, manifest.T, manifest.seed, manifest.sigma, manifest.m)
        yield zip(x.tolist(), y.tolist())
    elif manifest.source == "-":
        yield _csv_pairs(sys.stdin, manifest, stats)
    else:
        try:
            handle = open(manifest.source, newline="")
        except OSError as exc:
            raise OSError(f"cannot read {manifest.source}: {exc.strerror}") from exc
        with handle:
            yield _csv_pairs(handle, manifest, stats)


@contextmanager
def _open_output(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", newline="") as handle:
            yield handle


def _complete(pairs):
    return [(x, y) for x, y in pairs if x == x and y == y]


def build_grid(manifest: RunManifest, pairs):
    """Resolve the per-axis cutpoints; returns ``(grid, pairs)``.

    Methods that look at the data consume part (``empirical``: the warm-up)
    or all (``unique``) of the stream; the consumed rows are chained back in
    front so nothing is lost.
    """
    k = manifest.n_cuts if manifest.n_cuts is not None else default_n_cutpoints(manifest.config.kinds)
    method = manifest.cut_method
    needs_data = method in ("empirical", "unique") and (manifest.x_cuts is None or manifest.y_cuts is None)
    sample = []
    if needs_data:
        if method == "unique":
            sample = list(pairs)
            pairs = iter(())
        else:
            pairs = iter(pairs)
            sample = list(itertools.islice(pairs, manifest.warmup))
        complete = _complete(sample)
        if not complete:
            raise DataError("no complete (x, y) rows available to estimate cutpoints")

    def axis(explicit, column):
        if explicit is not None:
            return explicit
        if method == "normal":
            return normal_quantile_cuts(k)
        values = [p[column] for p in complete]
        if method == "unique":
            return unique_value_cuts(levels_of(values))
        return empirical_quantile_cuts(values, even_probs(k))

    grid = CutpointGrid(axis(manifest.x_cuts, 0), axis(manifest.y_cuts, 1))
    return grid, itertools.chain(sample, pairs)


def _emit(writer, records):
    n = 0
    for record in records:
        for kind, est in record.estimates.items():
            writer.writerow((record.t, kind, format_value(est.value)))
        n += 1
    return n


def cmd_run(manifest: RunManifest) -> int:
    """Online pass: CSV of ``t,kind,value`` for every emission."""
    return _execute(manifest, online=True)


def cmd_batch(manifest: RunManifest) -> int:
    """Exact recomputation at every emission index, same output schema."""
    return _execute(manifest, online=False)


def _execute(manifest, online):
    manifest.validate()
    stats = RowStats()
    start = time.monotonic()
    with _open_pairs(manifest, stats) as pairs, _open_output(manifest.output) as out:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(("t", "kind", "value"))
        if online:
            grid, pairs = build_grid(manifest, pairs)
            stream = CorrelationStream(grid, manifest.config)
            emissions = _emit(writer, stream.extend(pairs))
            observations, skipped = stream.t, stream.skipped
        else:
            counted = _Counting(pairs)
            emissions = _emit(writer, iter_batch(counted, manifest.config))
            observations, skipped = counted.complete, counted.incomplete
    elapsed = time.monotonic() - start
    print(
        f"observations={observations} skipped_nan={skipped} bad_rows={stats.bad_rows} "
        f"emissions={emissions} wall_time={elapsed:.3f}s",
        file=sys.stderr,
    )
    return EXIT_OK


class _Counting:
    def __init__(self, pairs):
        self._pairs = pairs
        self.complete = 0
        self.incomplete = 0

    def __iter__(self):
        for x, y in self._pairs:
            if x == x and y == y:
                self.complete += 1
            else:
                self.incomplete += 1
            yield x, y


def cmd_simulate(manifest: RunManifest) -> int:
    """Dump a simulated stream as ``x,y`` CSV."""
    if manifest.sim is None:
        raise ConfigError("simulate needs --sim1 or --sim2")
    x, y = simulate(manifest.sim, manifest.T, manifest.seed, manifest.sigma, manifest.m)
    with _open_output(manifest.output) as out:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(("x", "y"))
        for a, b in zip(x.tolist(), y.tolist()):
            writer.writerow((format_value(a), format_value(b)))
    return EXIT_OK


def cmd_bench(spec: BenchSpec, output: str = "-") -> int:
    """Timing/accuracy sweep; one CSV row per (kind, T, cutpoints, n_gap)."""
    with _open_output(output) as out:
        writer = csv.DictWriter(out, fieldnames=BENCH_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in sweep(spec):
            writer.writerow({k: format_value(v) if isinstance(v, float) else v for k, v in row.items()})
            out.flush()
    return EXIT_OK


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _kinds(text: str) -> tuple[str, ...]:
    try:
        return normalize_kinds(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_sim_args(p):
    sim = p.add_mutually_exclusive_group()
    sim.add_argument("--sim1", dest="sim", action="store_const", const="sim1", help="constant-sigma simulation")
    sim.add_argument("--sim2", dest="sim", action="store_const", const="sim2", help="time-varying-sigma simulation")
    p.add_argument("--sigma", type=float, default=1.0, help="mixing weight for --sim1 (default 1)")
    p.add_argument("--T", type=int, default=1000, help="simulated stream length (default 1000)")
    p.add_argument("--m", type=int, default=None, help="--sim2 midpoint index (default T/2)")
    p.add_argument("--seed", type=int, default=0)


def _add_stream_args(p):
    p.add_argument("input", nargs="?", help="CSV file, or '-' for standard input")
    _add_sim_args(p)
    p.add_argument("-o", "--output", default="-", help="output CSV (default stdout)")
    p.add_argument("--x-col", type=int, default=0, help="0-based x column")
    p.add_argument("--y-col", type=int, default=1, help="0-based y column")
    p.add_argument("--header", action="store_true", help="skip the first input row")
    p.add_argument("--delimiter", default=",")
    p.add_argument("--skip-bad-rows", action="store_true", help="count and drop malformed rows instead of failing")
    p.add_argument("--mode", choices=("all", "window"), default="all")
    p.add_argument("--window", type=int, default=None, help="sliding window size in rows (implies --mode window)")
    p.add_argument("--ngap", type=int, default=1, help="emit every N accepted observations")
    p.add_argument("--kinds", type=_kinds, default=("spearman",), help=f"comma-separated subset of {','.join(KINDS)}")
    p.add_argument("--cuts-x", type=_float_list, help="explicit x cutpoints, comma-separated")
    p.add_argument("--cuts-y", type=_float_list, help="explicit y cutpoints, comma-separated")
    cuts = p.add_mutually_exclusive_group()
    cuts.add_argument("--cuts-normal", type=int, nargs="?", const=-1, metavar="K", help="K standard normal quantiles per axis")
    cuts.add_argument("--cuts-empirical", type=int, nargs="?", const=-1, metavar="K", help="K quantiles of the warm-up rows")
    cuts.add_argument("--cuts-unique", action="store_true", help="one cell per distinct value (reads all input first)")
    p.add_argument("--warmup", type=int, default=1000, help="rows buffered for --cuts-empirical (default 1000)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="streamcorr", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="online correlations over a stream")
    _add_stream_args(run)
    batch = sub.add_parser("batch", help="exact correlations recomputed at every emission")
    _add_stream_args(batch)

    simp = sub.add_parser("simulate", help="write a simulated stream as CSV")
    _add_sim_args(simp)
    simp.add_argument("-o", "--output", default="-")

    bench = sub.add_parser("bench", help="online-vs-batch timing and accuracy sweep")
    bench.add_argument("--design", choices=("sim1", "sim2"), default="sim1")
    bench.add_argument("--kinds", nargs="+", default=["spearman"], choices=("spearman", "kendall"))
    bench.add_argument("--T", type=int, nargs="+", default=[1000, 10000])
    bench.add_argument("--cutpoints", type=int, nargs="+", default=[10, 20, 50])
    bench.add_argument("--ngap", type=int, nargs="+", default=[1])
    bench.add_argument("--reps", type=int, default=3, help="replications (seeds seed..seed+reps-1)")
    bench.add_argument("--seed", type=int, default=1)
    bench.add_argument("--sigma", type=float, default=1.0)
    bench.add_argument("--window", type=int, default=None)
    bench.add_argument("--no-batch", action="store_true", help="skip the batch timings")
    bench.add_argument("--batch-max-T", type=int, default=10_000, help="skip batch timing above this T")
    bench.add_argument("-o", "--output", default="-")
    return parser


def manifest_from_args(args) -> RunManifest:
    mode = "window" if args.window is not None else args.mode
    if args.cuts_unique:
        method, k = "unique", None
    elif args.cuts_empirical is not None:
        method, k = "empirical", args.cuts_empirical
    else:
        method, k = "normal", args.cuts_normal
    if k == -1:
        k = None
    try:
        config = StreamConfig(mode=mode, n_gap=args.ngap, window=args.window, kinds=args.kinds)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return RunManifest(
        source=args.input,
        sim=args.sim,
        sigma=args.sigma,
        T=args.T,
        m=args.m,
        seed=args.seed,
        x_col=args.x_col,
        y_col=args.y_col,
        header=args.header,
        delimiter=args.delimiter,
        skip_bad_rows=args.skip_bad_rows,
        x_cuts=args.cuts_x,
        y_cuts=args.cuts_y,
        cut_method=method,
        n_cuts=k,
        warmup=args.warmup,
        config=config,
        output=args.output,
    )


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    try:
        if args.command == "bench":
            if min(args.T) < 1 or min(args.cutpoints) < 0 or min(args.ngap) < 1 or args.reps < 1:
                raise ConfigError("bench sizes must be positive")
            spec = BenchSpec(
                design=args.design,
                kinds=tuple(args.kinds),
                T=tuple(args.T),
                cutpoints=tuple(args.cutpoints),
                n_gap=tuple(args.ngap),
                replications=args.reps,
                seed=args.seed,
                sigma=args.sigma,
                window=args.window,
                batch=not args.no_batch,
                batch_max_T=args.batch_max_T,
            )
            return cmd_bench(spec, args.output)
        if args.command == "simulate":
            manifest = RunManifest(sim=args.sim, sigma=args.sigma, T=args.T, m=args.m, seed=args.seed, output=args.output)
            return cmd_simulate(manifest)
        manifest = manifest_from_args(args)
        return cmd_run(manifest) if args.command == "run" else cmd_batch(manifest)
    except ConfigError as exc:
        print(f"streamcorr: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, InputError) as exc:
        print(f"streamcorr: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        # grid construction rejects bad explicit cutpoints with InputError above;
        # anything else here is a configuration problem
        print(f"streamcorr: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"streamcorr: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
