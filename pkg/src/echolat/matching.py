"""Match unattributed reception times to the events that caused them.

Each sensor reports a bag of reception times with no labels saying which
emission produced which time.  For n+2 sensors in R^n, a tuple with one
time per sensor that comes from a single event makes the relation matrix
singular, so the sweep walks the Cartesian product of the per-sensor time
lists, keeps the tuples whose relation residual is below threshold,
multilaterates each survivor, and reports the deduplicated events.

Tuples from one event also satisfy ``|t_i - t_j| <= d_ij`` for every sensor
pair (reverse triangle inequality), which allows large parts of the product
to be pruned without ever discarding a genuine event: the sweep intersects
the admissible time windows sensor by sensor over the sorted lists, so the
cost scales with the number of plausible tuples rather than the full
product.  The full product size is still counted exactly and guarded by a
budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import BudgetExceeded, NumericError, ValidationError
from .lateration import SensorArray, SolveConfig, SolvePath, solve
from .relations import batched_relation_residuals

_DEDUP_RESOLUTION = 1e-12
_CHUNK_ROWS = 16384


@dataclass(frozen=True, eq=False)
class ReceptionTable:
    """Per-sensor reception times, one sorted array per sensor.

    Construction sorts each list and collapses entries closer than 1e-12,
    so every stored array is strictly increasing.
    """

    times: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        cleaned = []
        for i, entry in enumerate(self.times):
            arr = np.asarray(entry, dtype=float).reshape(-1)
            if arr.size and not np.isfinite(arr).all():
                raise ValidationError(f"reception times for sensor {i} contain NaN or Inf")
            arr = np.sort(arr)
            if arr.size:
                keep = np.empty(arr.size, dtype=bool)
                keep[0] = True
                np.greater_equal(np.diff(arr), _DEDUP_RESOLUTION, out=keep[1:])
                arr = arr[keep]
            arr.setflags(write=False)
            cleaned.append(arr)
        object.__setattr__(self, "times", tuple(cleaned))

    @classmethod
    def from_lists(cls, lists) -> "ReceptionTable":
        return cls(tuple(np.asarray(entry, dtype=float) for entry in lists))

    @property
    def count(self) -> int:
        return len(self.times)

    def sizes(self) -> tuple[int, ...]:
        return tuple(arr.size for arr in self.times)

    def product_size(self) -> int:
        return math.prod(self.sizes())

    def span(self) -> float:
        entries = [arr for arr in self.times if arr.size]
        if not entries:
            return 0.0
        return float(max(arr[-1] for arr in entries) - min(arr[0] for arr in entries))


@dataclass(frozen=True)
class MatchConfig:
    """Knobs for :func:`match_events`.

    ``residual_threshold`` is the relation-residual acceptance cutoff.
    ``dedup_pos_eps`` of None means 1e-6 times the sensor diameter.  With
    ``keep_ambiguous`` set, tuples whose solve yields two viable candidates
    contribute both (flagged); otherwise they are dropped and counted.
    ``prune_slack`` of None picks 1e-9 times the scene spread.
    """

    residual_threshold: float = 1e-6
    dedup_time_eps: float = 1e-6
    dedup_pos_eps: float | None = None
    keep_ambiguous: bool = True
    budget: int = 10_000_000
    prune: bool = True
    prune_slack: float | None = None
    rank_tol: float = 1e-8
    time_tol: float | None = None


@dataclass(frozen=True, eq=False)
class DetectedEvent:
    """An event recovered by the sweep, with its provenance tuple."""

    event_time: float
    position: np.ndarray
    source_times: tuple[float, ...]
    residual: float
    path: SolvePath
    ambiguous: bool

    def __post_init__(self) -> None:
        pos = np.array(self.position, dtype=float).reshape(-1)
        pos.setflags(write=False)
        object.__setattr__(self, "position", pos)


@dataclass(frozen=True, eq=False)
class MatchReport:
    """Outcome of a matching sweep.

    ``candidate_tuples`` is the full Cartesian-product size;
    ``rejected_tuples`` counts every tuple ruled out at any stage, i.e.
    ``candidate_tuples - accepted_tuples``.  ``skipped`` lists accepted
    tuples whose solve failed numerically, as (tuple, reason) pairs.
    Events are sorted by (time, lexicographic position).
    """

    events: tuple[DetectedEvent, ...]
    candidate_tuples: int
    pruned_tuples: int
    evaluated_tuples: int
    accepted_tuples: int
    rejected_tuples: int
    skipped: tuple[tuple[tuple[float, ...], str], ...]
    dropped_ambiguous: int


def _default_slack(sensors: SensorArray, table: ReceptionTable) -> float:
    return 1e-9 * (sensors.diameter() + table.span()) + 1e-12


def _survivor_blocks(
    arrays: tuple[np.ndarray, ...],
    dist: np.ndarray,
    slack: float,
    counters: dict,
) -> Iterator[tuple[np.ndarray, int, int]]:
    """Walk the pruned product, yielding (prefix_times, lo, hi) blocks.

    A block stands for all tuples sharing ``prefix_times`` over the first
    m-1 sensors, with the last entry ranging over ``arrays[-1][lo:hi]``.
    ``counters['pruned']`` accumulates the exact number of full-product
    tuples skipped by window pruning.
    """
    m = len(arrays)
    sizes = [arr.size for arr in arrays]
    suffix = [1] * (m + 1)
    for i in reversed(range(m)):
        suffix[i] = suffix[i + 1] * sizes[i]
    prefix = np.empty(max(m - 1, 1))

    def rec(level: int) -> Iterator[tuple[np.ndarray, int, int]]:
        arr = arrays[level]
        if level == 0:
            lo, hi = 0, arr.size
        else:
            chosen = prefix[:level]
            lo_t = float(np.max(chosen - dist[:level, level])) - slack
            hi_t = float(np.min(chosen + dist[:level, level])) + slack
            lo = int(np.searchsorted(arr, lo_t, side="left"))
            hi = int(np.searchsorted(arr, hi_t, side="right"))
            if hi < lo:
                hi = lo
        counters["pruned"] += (sizes[level] - (hi - lo)) * suffix[level + 1]
        if level == m - 1:
            if hi > lo:
                yield prefix[: m - 1].copy(), lo, hi
            return
        for i in range(lo, hi):
            prefix[level] = arr[i]
            yield from rec(level + 1)

    yield from rec(0)


def prune_tuples(
    sensors: SensorArray,
    table: ReceptionTable,
    slack: float | None = None,
) -> Iterator[tuple[float, ...]]:
    """Yield the time tuples surviving pairwise triangle-window pruning.

    A tuple survives exactly when ``|t_i - t_j| <= d_ij + slack`` for every
    sensor pair; every tuple originating from one common event survives,
    because its time gaps obey the reverse triangle inequality exactly.
    ``slack=math.inf`` yields the full product.
    """
    if table.count != sensors.count:
        raise ValidationError(
            f"table has {table.count} sensors, array has {sensors.count}"
        )
    if slack is None:
        slack = _default_slack(sensors, table)
    dist = sensors.pairwise_distances()
    counters = {"pruned": 0}
    last = table.times[-1] if table.count else np.empty(0)
    for prefix, lo, hi in _survivor_blocks(table.times, dist, slack, counters):
        head = tuple(float(x) for x in prefix)
        for value in last[lo:hi]:
            yield head + (float(value),)


def _dedup_events(
    found: list[DetectedEvent], time_eps: float, pos_eps: float
) -> list[DetectedEvent]:
    def key(ev: DetectedEvent):
        return (ev.event_time, tuple(ev.position))

    found.sort(key=key)
    reps: list[DetectedEvent] = []
    for ev in found:
        for i, rep in enumerate(reps):
            if (
                abs(ev.event_time - rep.event_time) <= time_eps
                and np.max(np.abs(ev.position - rep.position)) <= pos_eps
            ):
                if ev.residual < rep.residual:
                    reps[i] = ev
                break
        else:
            reps.append(ev)
    reps.sort(key=key)
    return reps


def match_events(
    sensors: SensorArray,
    table: ReceptionTable,
    config: MatchConfig = MatchConfig(),
) -> MatchReport:
    """Sweep a reception table and recover the emission events behind it.

    Requires one time list per sensor and m = n+2 sensors, so that accepted
    tuples determine events.  Tuples are screened by relation residual in
    vectorised chunks; each accepted tuple is multilaterated and its
    non-spurious candidates become detected events.  Ambiguous tuples (two
    viable candidates) contribute both events flagged ``ambiguous`` when
    ``config.keep_ambiguous`` is set, and are dropped otherwise.  Numeric
    failures on individual tuples are reported in ``skipped`` rather than
    aborting the sweep.

    Raises :class:`BudgetExceeded` if the full product size exceeds
    ``config.budget`` (checked before any work).
    """
    m, n = sensors.count, sensors.dim
    if table.count != m:
        raise ValidationError(f"table has {table.count} sensors, array has {m}")
    if m != n + 2:
        raise ValidationError(
            f"matching needs exactly n+2 = {n + 2} sensors in dimension {n}, got {m}"
        )
    product = table.product_size()
    if product > config.budget:
        raise BudgetExceeded(
            f"product of reception-list sizes is {product}, budget is {config.budget}"
        )

    dist = sensors.pairwise_distances()
    dist2 = dist * dist
    slack = math.inf
    if config.prune:
        slack = config.prune_slack if config.prune_slack is not None else _default_slack(sensors, table)
    solve_cfg = SolveConfig(rank_tol=config.rank_tol, time_tol=config.time_tol)
    pos_eps = config.dedup_pos_eps
    if pos_eps is None:
        pos_eps = 1e-6 * sensors.diameter()

    counters = {"pruned": 0}
    found: list[DetectedEvent] = []
    skipped: list[tuple[tuple[float, ...], str]] = []
    accepted = 0
    evaluated = 0
    dropped_ambiguous = 0

    pending: list[np.ndarray] = []
    pending_rows = 0

    def flush() -> None:
        nonlocal pending_rows, accepted, evaluated, dropped_ambiguous
        if not pending:
            return
        rows = np.vstack(pending)
        pending.clear()
        pending_rows = 0
        evaluated += rows.shape[0]
        residuals = batched_relation_residuals(rows, dist2)
        for row, residual in zip(rows[residuals <= config.residual_threshold],
                                 residuals[residuals <= config.residual_threshold]):
            accepted += 1
            source = tuple(float(x) for x in row)
            try:
                result = solve(sensors, row, solve_cfg)
            except NumericError as exc:
                skipped.append((source, f"{type(exc).__name__}: {exc}"))
                continue
            viable = [c for c in result.candidates if not c.spurious]
            ambiguous = len(viable) > 1
            if ambiguous and not config.keep_ambiguous:
                dropped_ambiguous += 1
                continue
            for cand in viable:
                found.append(
                    DetectedEvent(
                        event_time=cand.event.time,
                        position=cand.event.position,
                        source_times=source,
                        residual=float(residual),
                        path=result.path,
                        ambiguous=ambiguous,
                    )
                )

    last_arrays = table.times[-1] if m else np.empty(0)
    for prefix, lo, hi in _survivor_blocks(table.times, dist, slack, counters):
        width = hi - lo
        rows = np.empty((width, m))
        rows[:, : m - 1] = prefix
        rows[:, m - 1] = last_arrays[lo:hi]
        pending.append(rows)
        pending_rows += width
        if pending_rows >= _CHUNK_ROWS:
            flush()
    flush()

    events = _dedup_events(found, config.dedup_time_eps, pos_eps)
    return MatchReport(
        events=tuple(events),
        candidate_tuples=product,
        pruned_tuples=counters["pruned"],
        evaluated_tuples=evaluated,
        accepted_tuples=accepted,
        rejected_tuples=product - accepted,
        skipped=tuple(skipped),
        dropped_ambiguous=dropped_ambiguous,
    )
