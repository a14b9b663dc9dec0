"""Typical-signal estimators and the seeded ensemble runner.

Single-sequence estimators return a float, or ``None`` when a scan is
censored (the finite-data stand-in for an infinite time).

Ensemble seeding: realization ``i`` of a run with base seed ``s`` uses
``numpy.random.SeedSequence(s, spawn_key=(i,))``; where a realization needs
two independent streams (the x and y sequences of a waiting-time run, or
the start position of a fixed-sequence window), child keys ``(i, 0)`` and
``(i, 1)`` are used.  Results never depend on scheduling or worker count.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import Involution, SymbolSequence
from .matching import (
    DataExhaustedError,
    match_length,
    recurrence_time,
    reversed_match_length,
    reversed_recurrence_time,
    waiting_time,
)
from .models import Model, sample

KINDS = ("ep-recurrence", "entropy-recurrence", "cross-waiting", "ep-match")
CSV_COLUMNS = ("grid", "kind", "count", "censored", "mean", "sem")
LOG2 = math.log(2.0)


def ep_estimate_recurrence(x: SymbolSequence, n: int, theta: Involution) -> Optional[float]:
    """``(1/n) log(R^_n / R_n)``."""
    r = recurrence_time(x, n)
    if r.censored:
        return None
    rh = reversed_recurrence_time(x, n, theta)
    if rh.censored:
        return None
    return (math.log(rh.value) - math.log(r.value)) / n


def entropy_estimate_recurrence(x: SymbolSequence, n: int) -> Optional[float]:
    """``(log R_n) / n``."""
    r = recurrence_time(x, n)
    return None if r.censored else math.log(r.value) / n


def cross_entropy_estimate_waiting(x: SymbolSequence, y: SymbolSequence, n: int) -> Optional[float]:
    """``(log W_n(x, y)) / n``."""
    w = waiting_time(x, y, n)
    return None if w.censored else math.log(w.value) / n


def ep_estimate_match_length(x: SymbolSequence, m: int, theta: Involution) -> Optional[float]:
    """``log m / L^_m - log m / L_m``; censored on a zero or uncertifiable match length."""
    if m < 2:
        raise ValueError(f"window size m must be >= 2, got {m}")
    try:
        L = match_length(x, m)
        Lh = reversed_match_length(x, m, theta)
    except DataExhaustedError:
        return None
    if L == 0 or Lh == 0:
        return None
    lm = math.log(m)
    return lm / Lh - lm / L


# ---------------------------------------------------------------------------
# Estimate series and ensemble statistics


@dataclass(frozen=True)
class EstimatePoint:
    grid: int
    value: Optional[float]

    @property
    def status(self) -> str:
        return "censored" if self.value is None else "ok"


@dataclass(frozen=True)
class EstimateSeries:
    kind: str
    points: tuple[EstimatePoint, ...]
    theta: Optional[Involution] = None

    def __post_init__(self):
        grid = [p.grid for p in self.points]
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("estimate series grid must be strictly increasing")

    def values(self) -> list[Optional[float]]:
        return [p.value for p in self.points]


@dataclass(frozen=True)
class GridStats:
    grid: int
    kind: str
    count: int
    censored: int
    mean: float
    sem: float

    @property
    def total(self) -> int:
        return self.count + self.censored

    @property
    def flagged(self) -> bool:
        """No usable realization at this grid point."""
        return self.count == 0

    @property
    def degenerate(self) -> bool:
        """Fewer than two usable realizations: SEM is reported as 0."""
        return self.count < 2


def summarize(grid: int, kind: str, values: Sequence[Optional[float]]) -> GridStats:
    ok = [v for v in values if v is not None]
    censored = len(values) - len(ok)
    if not ok:
        return GridStats(grid, kind, 0, censored, math.nan, math.nan)
    arr = np.array(ok, dtype=float)
    mean = math.fsum(ok) / len(ok)
    if len(ok) < 2:
        return GridStats(grid, kind, len(ok), censored, mean, 0.0)
    sd = math.sqrt(math.fsum((arr - mean) ** 2) / (len(ok) - 1))
    return GridStats(grid, kind, len(ok), censored, mean, sd / math.sqrt(len(ok)))


def fmt_num(v: float) -> str:
    if isinstance(v, float) and math.isnan(v):
        return "nan"
    return f"{v:.12g}"


@dataclass(frozen=True)
class EnsembleStats:
    kind: str
    rows: tuple[GridStats, ...]
    realizations: int
    extra: dict = field(default_factory=dict)

    def row(self, grid: int) -> GridStats:
        for r in self.rows:
            if r.grid == grid:
                return r
        raise KeyError(grid)

    def records(self, bits: bool = False) -> list[dict]:
        out = []
        for r in self.rows:
            rec = {
                "grid": r.grid,
                "kind": r.kind,
                "count": r.count,
                "censored": r.censored,
                "mean": fmt_num(r.mean),
                "sem": fmt_num(r.sem),
            }
            if bits:
                rec["mean_bits"] = fmt_num(r.mean / LOG2)
                rec["sem_bits"] = fmt_num(r.sem / LOG2)
            rec.update(self.extra)
            out.append(rec)
        return out


def write_csv(records: list[dict], fh: io.TextIOBase) -> None:
    if not records:
        return
    writer = csv.DictWriter(fh, fieldnames=list(records[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(records)


def write_json(records: list[dict], fh: io.TextIOBase) -> None:
    json.dump(records, fh, indent=1)
    fh.write("\n")


# ---------------------------------------------------------------------------
# Ensemble sources


@dataclass(frozen=True)
class EstimatorSpec:
    kind: str
    theta: Optional[Involution] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}; expected one of {KINDS}")
        if self.kind in ("ep-recurrence", "ep-match") and self.theta is None:
            raise ValueError(f"estimator {self.kind} needs an involution")


@dataclass(frozen=True)
class ModelSource:
    """Fresh samples of ``length`` symbols per realization.

    For ``cross-waiting``, x is drawn from ``model`` and y (``length``
    symbols) from ``other``.
    """

    model: Model
    length: int
    other: Optional[Model] = None


@dataclass(frozen=True)
class FixedSequenceSource:
    """Windows of one fixed sequence.

    ``policy="first-half"`` starts each realization's window at a uniform
    position in the first half of ``sequence``; ``policy="prefix"`` always
    starts at position 1.  For ``cross-waiting`` the searched sequence is
    ``other`` in full.
    """

    sequence: SymbolSequence
    policy: str = "first-half"
    other: Optional[SymbolSequence] = None

    def __post_init__(self):
        if self.policy not in ("first-half", "prefix"):
            raise ValueError(f"unknown window policy {self.policy!r}")


def realization_seed(seed: int, index: int, *sub: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(seed), spawn_key=(index, *sub))


def _evaluate(spec: EstimatorSpec, x: SymbolSequence, y: Optional[SymbolSequence], g: int):
    """One estimate; raises ValueError when the data cannot even host the scan."""
    kind = spec.kind
    if kind == "ep-recurrence":
        return ep_estimate_recurrence(x, g, spec.theta)
    if kind == "entropy-recurrence":
        return entropy_estimate_recurrence(x, g)
    if kind == "cross-waiting":
        return cross_entropy_estimate_waiting(x, y, g)
    return ep_estimate_match_length(x, g, spec.theta)


def _evaluate_safe(spec, x, y, g) -> Optional[float]:
    try:
        return _evaluate(spec, x, y, g)
    except ValueError:
        # word length beyond the available data: censored, not fatal
        return None


def _check_grid(spec: EstimatorSpec, grid: Sequence[int]) -> list[int]:
    grid = [int(g) for g in grid]
    if not grid:
        raise ValueError("grid must be nonempty")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly increasing")
    lo = 2 if spec.kind == "ep-match" else 1
    if grid[0] < lo:
        raise ValueError(f"grid values for {spec.kind} must be >= {lo}")
    return grid


INITIAL_CHUNK = 1 << 14


def _model_realization(source: ModelSource, spec: EstimatorSpec, grid, seed, i) -> list[Optional[float]]:
    # Samples are prefix-consistent in the seed, so a scan resolved on a
    # prefix has the same outcome as on the full-length sample.  Grow the
    # sample geometrically and rescan only the unresolved grid points.
    results: list[Optional[float]] = [None] * len(grid)
    pending = list(range(len(grid)))
    cross = spec.kind == "cross-waiting"
    if cross:
        x_full = sample(source.model, max(grid), realization_seed(seed, i, 0))
        y_seed = realization_seed(seed, i, 1)
        y_model = source.other if source.other is not None else source.model
    else:
        x_seed = realization_seed(seed, i)
    # match lengths can be capped by short data, so they always see the full sample
    size = source.length if spec.kind == "ep-match" else min(INITIAL_CHUNK, source.length)
    while True:
        if cross:
            x, y = x_full, sample(y_model, size, y_seed)
        else:
            x, y = sample(source.model, size, x_seed), None
        still = []
        for j in pending:
            v = _evaluate_safe(spec, x, y, grid[j])
            if v is None:
                still.append(j)
            else:
                results[j] = v
        pending = still
        if not pending or size >= source.length:
            return results
        size = min(size * 4, source.length)


def _fixed_realization(source: FixedSequenceSource, spec, grid, seed, i) -> list[Optional[float]]:
    seq = source.sequence
    if source.policy == "prefix":
        start = 0
    else:
        rng = np.random.Generator(np.random.PCG64(realization_seed(seed, i, 1)))
        start = int(rng.integers(0, max(1, (seq.length + 1) // 2)))
    x = seq.shift(start)
    y = source.other
    return [_evaluate_safe(spec, x, y, g) for g in grid]


def ensemble_run(
    source,
    estimator: EstimatorSpec,
    realizations: int,
    seed: int,
    grid: Sequence[int],
    workers: int = 1,
) -> EnsembleStats:
    """Mean and SEM of an estimator over seeded realizations, per grid point."""
    if realizations < 1:
        raise ValueError("realizations must be >= 1")
    grid = _check_grid(estimator, grid)
    if estimator.kind == "cross-waiting" and isinstance(source, FixedSequenceSource) and source.other is None:
        raise ValueError("cross-waiting on fixed data needs a second sequence")
    if isinstance(source, ModelSource):
        job: Callable = lambda i: _model_realization(source, estimator, grid, seed, i)
    elif isinstance(source, FixedSequenceSource):
        job = lambda i: _fixed_realization(source, estimator, grid, seed, i)
    else:
        raise TypeError(f"unsupported source {type(source).__name__}")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            per_real = list(pool.map(job, range(realizations)))
    else:
        per_real = [job(i) for i in range(realizations)]
    rows = tuple(
        summarize(g, estimator.kind, [per_real[i][j] for i in range(realizations)])
        for j, g in enumerate(grid)
    )
    return EnsembleStats(estimator.kind, rows, realizations)


def estimate_series(x: SymbolSequence, spec: EstimatorSpec, grid: Sequence[int],
                    y: Optional[SymbolSequence] = None) -> EstimateSeries:
    """Estimator values on one sequence across a grid."""
    grid = _check_grid(spec, grid)
    pts = tuple(EstimatePoint(g, _evaluate_safe(spec, x, y, g)) for g in grid)
    return EstimateSeries(spec.kind, pts, spec.theta)


def decade_grid(lo_exp: int, hi_exp: int) -> list[int]:
    return [10**e for e in range(lo_exp, hi_exp + 1)]
