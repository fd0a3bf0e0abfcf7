"""Benchmark harness: trial generation, method dispatch, metrics, CSV output.

Within a grid cell (n, s), every method of a given trial sees the same
signal and, where a single matrix suffices, the same first sensing matrix
and measurement vector, so accuracy comparisons are paired.  Only the
recovery call is timed; signal, matrix, and measurement generation are
excluded and reported separately in the ``gen_time_s`` column.
"""

from __future__ import annotations

import csv
import math
import time
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .baselines import biht, nbiht, omp, sign_quantize
from .numerics import GaussianSource, derive_seed, matvec, sample_gaussian_matrix
from .recovery import determine_support
from .sensing import (
    NOISE_MODES,
    SIGNAL_STREAM,
    RecoveryConfig,
    build_ensemble,
    generate_binary_signal,
    measure,
)

METHODS = ("rand", "omp", "biht", "nbiht")

FAILURE_RATE_LIMIT = 0.1

CSV_COLUMNS = (
    "method",
    "n",
    "s",
    "k",
    "r0",
    "trial",
    "seed",
    "R",
    "wall_time_s",
    "pred_size",
    "true_size",
    "inter_size",
    "gen_time_s",
)

SUMMARY_COLUMNS = ("method", "n", "s", "mean_R", "var_R", "mean_time_s", "speedup_vs_rand")


def jaccard(pred: Iterable[int], true: Iterable[int]) -> float:
    """Intersection over union of two index sets; 1.0 when both are empty."""
    p, t = frozenset(pred), frozenset(true)
    union = p | t
    if not union:
        return 1.0
    return len(p & t) / len(union)


@dataclass(frozen=True)
class ExperimentGrid:
    """The full benchmark specification: sizes, sparsities, methods, and knobs."""

    n_values: tuple[int, ...]
    sparsity_fractions: tuple[float, ...]
    trials: int = 50
    methods: tuple[str, ...] = METHODS
    sigma_w: float = 0.1
    noise_mode: str = "experiment"
    master_seed: int = 42
    k_override: int | None = None
    r0_override: int | None = None
    biht_max_iters: int = 100
    biht_step: float = 1.0
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.n_values:
            raise ValueError("at least one signal size is required")
        if not self.sparsity_fractions:
            raise ValueError("at least one sparsity fraction is required")
        if self.trials < 1:
            raise ValueError(f"need at least one trial, got {self.trials}")
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise ValueError(f"methods must be a nonempty subset of {METHODS}, got {self.methods}")
        if self.noise_mode not in NOISE_MODES:
            raise ValueError(f"noise_mode must be one of {NOISE_MODES}")
        if self.workers < 1:
            raise ValueError("worker count must be at least 1")
        for f in self.sparsity_fractions:
            if not 0 < f <= 1:
                raise ValueError(f"sparsity fractions must lie in (0, 1], got {f}")
            for n in self.n_values:
                if round(f * n) < 1:
                    raise ValueError(f"fraction {f} of n={n} rounds to zero nonzeros")

    def cells(self) -> list[tuple[int, int]]:
        """(n, s) pairs in grid order, with s = round(fraction * n)."""
        return [
            (n, int(round(f * n)))
            for n in self.n_values
            for f in self.sparsity_fractions
        ]


@dataclass(frozen=True)
class TrialResult:
    method: str
    n: int
    s: int
    k: int
    r0: int
    trial: int
    seed: int
    R: float
    wall_time_s: float
    pred_size: int
    true_size: int
    inter_size: int
    gen_time_s: float


@dataclass(frozen=True)
class TrialFailure:
    method: str
    n: int
    s: int
    trial: int
    error: str


@dataclass(frozen=True)
class SummaryRow:
    method: str
    n: int
    s: int
    mean_R: float
    var_R: float
    mean_time_s: float
    speedup_vs_rand: float | None


def trial_config(grid: ExperimentGrid, n: int, s: int, trial: int) -> RecoveryConfig:
    """The recovery configuration a given trial runs under (seed included)."""
    return RecoveryConfig(
        n=n,
        s=s,
        k=grid.k_override,
        r0=grid.r0_override,
        sigma_w=grid.sigma_w,
        noise_mode=grid.noise_mode,
        master_seed=derive_seed(grid.master_seed, n, s, trial),
    )


def run_trial(grid: ExperimentGrid, method: str, n: int, s: int, trial: int) -> TrialResult:
    """Generate one trial's data and time one method's recovery on it.

    The trial seed is derived from (master_seed, n, s, trial) only, so all
    methods of a cell/trial receive the identical signal, and single-matrix
    methods receive the identical first matrix and measurement vector that
    the ensemble method sees as round 0.
    """
    config = trial_config(grid, n, s, trial)
    seed = config.master_seed
    signal = generate_binary_signal(GaussianSource(seed).stream(SIGNAL_STREAM), n, s)

    t_gen = time.perf_counter()
    if method == "rand":
        ensemble = build_ensemble(config)
        measurements = measure(ensemble, signal, grid.sigma_w, grid.noise_mode, seed)
        gen_time = time.perf_counter() - t_gen

        t_run = time.perf_counter()
        predicted = determine_support(ensemble, measurements)
        wall = time.perf_counter() - t_run
    else:
        A1 = sample_gaussian_matrix(GaussianSource(seed).stream(1), config.k, n, 1.0 / config.k)
        if method == "omp":
            b1 = matvec(A1, signal.values)
            if grid.sigma_w > 0:
                noise_sd = (
                    grid.sigma_w
                    if grid.noise_mode == "theory"
                    else grid.sigma_w / math.sqrt(config.k)
                )
                noise_stream = GaussianSource(seed).stream(2 * config.r0 + 1)
                b1 = b1 + noise_sd * noise_stream.generator().standard_normal(config.k)
            gen_time = time.perf_counter() - t_gen
            t_run = time.perf_counter()
            predicted = omp(A1, b1, s).support
            wall = time.perf_counter() - t_run
        elif method in ("biht", "nbiht"):
            signs = sign_quantize(A1, signal)
            gen_time = time.perf_counter() - t_gen
            solver = biht if method == "biht" else nbiht
            t_run = time.perf_counter()
            predicted = solver(A1, signs, s, grid.biht_max_iters, grid.biht_step).support
            wall = time.perf_counter() - t_run
        else:
            raise ValueError(f"unknown method {method!r}")

    inter = len(predicted & signal.support)
    return TrialResult(
        method=method,
        n=n,
        s=s,
        k=config.k,
        r0=config.r0,
        trial=trial,
        seed=seed,
        R=jaccard(predicted, signal.support),
        wall_time_s=wall,
        pred_size=len(predicted),
        true_size=len(signal.support),
        inter_size=inter,
        gen_time_s=gen_time,
    )


@dataclass(frozen=True)
class GridOutcome:
    results: list[TrialResult]
    summaries: list[SummaryRow]
    failures: list[TrialFailure]

    def failure_rates(self) -> dict[tuple[str, int, int], float]:
        """Failed-trial fraction per (method, n, s) cell, counting failures only."""
        counts: dict[tuple[str, int, int], int] = {}
        for f in self.failures:
            counts[(f.method, f.n, f.s)] = counts.get((f.method, f.n, f.s), 0) + 1
        totals: dict[tuple[str, int, int], int] = {}
        for r in self.results:
            totals[(r.method, r.n, r.s)] = totals.get((r.method, r.n, r.s), 0) + 1
        return {
            key: cnt / (cnt + totals.get(key, 0))
            for key, cnt in counts.items()
        }

    def has_excess_failures(self, limit: float = FAILURE_RATE_LIMIT) -> bool:
        return any(rate > limit for rate in self.failure_rates().values())


def run_grid(grid: ExperimentGrid) -> GridOutcome:
    """Run every cell x method x trial, optionally across a worker pool.

    Results are ordered by (cell, method, trial) regardless of completion
    order, and trial seeds depend only on (master_seed, n, s, trial), so
    the outcome is identical for any worker count.  A failing trial is
    recorded and skipped rather than aborting the grid.
    """
    tasks = [
        (method, n, s, trial)
        for (n, s) in grid.cells()
        for method in grid.methods
        for trial in range(grid.trials)
    ]

    def attempt(task):
        method, n, s, trial = task
        try:
            return run_trial(grid, method, n, s, trial)
        except Exception as exc:  # noqa: BLE001 - per-trial record-and-continue policy
            return TrialFailure(method=method, n=n, s=s, trial=trial, error=str(exc))

    if grid.workers == 1:
        outcomes = [attempt(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=grid.workers) as pool:
            outcomes = list(pool.map(attempt, tasks))

    results = [o for o in outcomes if isinstance(o, TrialResult)]
    failures = [o for o in outcomes if isinstance(o, TrialFailure)]
    return GridOutcome(results=results, summaries=summarize(results), failures=failures)


def summarize(results: Sequence[TrialResult]) -> list[SummaryRow]:
    """Per-(method, n, s) means and variances, plus wall-time ratios against rand.

    The variance is the population variance over the cell's trials.  The
    speedup column is mean_time(method) / mean_time(rand) for the same
    (n, s); values above one mean the ensemble method was faster.
    """
    groups: dict[tuple[str, int, int], list[TrialResult]] = {}
    order: list[tuple[str, int, int]] = []
    for r in results:
        key = (r.method, r.n, r.s)
        if key not in groups:
            groups[key] = []
            order.append(key)
        groups[key].append(r)

    rand_time: dict[tuple[int, int], float] = {
        (n, s): float(np.mean([r.wall_time_s for r in rs]))
        for (method, n, s), rs in groups.items()
        if method == "rand"
    }

    rows = []
    for method, n, s in order:
        rs = groups[(method, n, s)]
        accs = np.array([r.R for r in rs])
        mean_time = float(np.mean([r.wall_time_s for r in rs]))
        base = rand_time.get((n, s))
        rows.append(
            SummaryRow(
                method=method,
                n=n,
                s=s,
                mean_R=float(np.mean(accs)),
                var_R=float(np.var(accs)),
                mean_time_s=mean_time,
                speedup_vs_rand=None if base is None else mean_time / base,
            )
        )
    return rows


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def emit_csv(results: Sequence[TrialResult], path) -> None:
    """Write one row per trial in the fixed column order, floats at 17 significant digits."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in results:
            writer.writerow([_fmt(getattr(r, col)) for col in CSV_COLUMNS])


def load_results(path) -> list[TrialResult]:
    """Read back a results CSV written by :func:`emit_csv`, types restored."""
    types = {f.name: f.type for f in fields(TrialResult)}
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            kwargs = {}
            for col in CSV_COLUMNS:
                caster = float if types[col] == "float" else (int if types[col] == "int" else str)
                kwargs[col] = caster(row[col])
            out.append(TrialResult(**kwargs))
    return out


def summary_csv_path(path) -> str:
    """Default CSV-twin location for a summary table path.

    Swaps the final suffix for ``.csv``; appends ``.csv`` when the path
    already ends in it.
    """
    text = str(path)
    if text.endswith(".csv") or "." not in text.rsplit("/", 1)[-1]:
        return text + ".csv"
    return text.rsplit(".", 1)[0] + ".csv"


def emit_summary(rows: Sequence[SummaryRow], path, csv_path=None) -> None:
    """Write an aligned text table plus a machine-readable CSV twin.

    The twin defaults to :func:`summary_csv_path` of the table path.
    """
    if csv_path is None:
        csv_path = summary_csv_path(path)

    def cell(row: SummaryRow, col: str) -> str:
        value = getattr(row, col)
        if value is None:
            return "-"
        if isinstance(value, float):
            return format(value, ".6g")
        return str(value)

    table = [list(SUMMARY_COLUMNS)] + [[cell(r, c) for c in SUMMARY_COLUMNS] for r in rows]
    widths = [max(len(line[i]) for line in table) for i in range(len(SUMMARY_COLUMNS))]
    with open(path, "w", encoding="utf-8") as fh:
        for line in table:
            fh.write("  ".join(val.rjust(w) for val, w in zip(line, widths)).rstrip() + "\n")

    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for r in rows:
            writer.writerow(
                ["" if getattr(r, c) is None else _fmt(getattr(r, c)) for c in SUMMARY_COLUMNS]
            )
