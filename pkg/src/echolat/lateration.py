"""Closed-form pseudo-range multilateration in arbitrary dimension.

Sensors at known positions ``a_1, ..., a_m`` in R^n each record the time a
signal arrived.  With the propagation speed normalised to 1, an emission
event ``(t, x)`` satisfies ``||a_i - x|| = t_i - t`` for every sensor.
Squaring these equations makes them linear in the unknowns ``(t, x, w)``
with ``w = ||x||^2 - t^2``, giving an m x (n+2) linear system:

* If that system has full column rank, a single least-squares solve yields
  the unique event (``FULL_RANK`` path).
* Otherwise the system is reduced against the sensor-geometry part alone.
  The solution set is a line ``x = t*u + v`` in the unknown emission time
  ``t``, and substituting back yields one scalar quadratic in ``t``
  (``QUADRATIC`` path).  Both roots are reported; a root whose emission
  time lies after some recorded arrival cannot be a physical event for the
  one-sided model and is flagged as spurious.

For sensors that affinely span R^n the reduced quadratic never loses both
its ``t^2`` and ``t`` coefficients at once, so the quadratic path always
produces at least one candidate for consistent data.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import (
    DegenerateSystem,
    InconsistentTimes,
    LengthMismatch,
    NotSpanning,
    RankDeficient,
    ValidationError,
)


@dataclass(frozen=True, eq=False)
class SensorArray:
    """Known sensor positions, one per row, in R^n (n >= 2).

    Positions are stored as a read-only float array.  Sensors must be
    pairwise distinct; at least two are required.  Whether the array is
    rich enough for a particular solver (e.g. affinely spanning) is checked
    by the operation that needs it, not here.
    """

    positions: np.ndarray

    def __post_init__(self) -> None:
        arr = np.array(self.positions, dtype=float)
        if arr.ndim != 2:
            raise ValidationError(f"positions must be an (m, n) array, got shape {arr.shape}")
        m, n = arr.shape
        if n < 2:
            raise ValidationError(f"ambient dimension must be at least 2, got {n}")
        if m < 2:
            raise ValidationError(f"need at least two sensors, got {m}")
        if not np.isfinite(arr).all():
            raise ValidationError("sensor positions contain NaN or Inf")
        diff = arr[:, None, :] - arr[None, :, :]
        dist = np.sqrt((diff * diff).sum(axis=2))
        iu = np.triu_indices(m, k=1)
        if np.any(dist[iu] == 0.0):
            raise ValidationError("sensor positions must be pairwise distinct")
        arr.setflags(write=False)
        object.__setattr__(self, "positions", arr)

    @property
    def count(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    def pairwise_distances(self) -> np.ndarray:
        """Symmetric (m, m) matrix of Euclidean distances between sensors."""
        diff = self.positions[:, None, :] - self.positions[None, :, :]
        return np.sqrt((diff * diff).sum(axis=2))

    def diameter(self) -> float:
        return float(self.pairwise_distances().max())

    def spans_space(self, rank_tol: float = linalg.DEFAULT_RANK_TOL) -> bool:
        """True if the sensors affinely span R^n (numeric rank decision)."""
        rel = self.positions[1:] - self.positions[0]
        return linalg.numeric_rank(rel, rank_tol) == self.dim


@dataclass(frozen=True, eq=False)
class EmissionEvent:
    """An emission: time plus position in R^n, in speed-1 units."""

    time: float
    position: np.ndarray

    def __post_init__(self) -> None:
        pos = np.array(self.position, dtype=float).reshape(-1)
        if not (np.isfinite(pos).all() and np.isfinite(self.time)):
            raise ValidationError("event time/position must be finite")
        pos.setflags(write=False)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "time", float(self.time))

    @property
    def dim(self) -> int:
        return self.position.shape[0]


class SolvePath(enum.Enum):
    FULL_RANK = "full-rank"
    QUADRATIC = "quadratic"


@dataclass(frozen=True, eq=False)
class Candidate:
    """One candidate event plus its causality flag.

    ``spurious`` is True when some sensor would have received the signal
    before it was emitted (arrival time below the candidate emission time by
    more than the time tolerance).  Such candidates solve the squared
    equations but not the one-sided ranging model.
    """

    event: EmissionEvent
    spurious: bool


@dataclass(frozen=True)
class SolveConfig:
    """Tolerances for :func:`solve` and friends.

    ``time_tol`` is the slack used for the spurious flag; ``None`` picks
    1e-9 times the spread of the input (time span plus sensor diameter).
    ``degeneracy_tol`` decides when a reduced-quadratic coefficient counts
    as zero; the leading coefficient is dimensionless so an absolute
    threshold is meaningful.
    """

    rank_tol: float = linalg.DEFAULT_RANK_TOL
    time_tol: float | None = None
    degeneracy_tol: float = 1e-9


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Outcome of a multilateration solve.

    ``candidates`` holds one event on the full-rank path and one or two on
    the quadratic path, sorted by emission time.  ``rank`` is the numeric
    rank of the full linearised system; ``quadratic`` carries the reduced
    coefficients (a, b, c) when that path was taken.
    """

    path: SolvePath
    candidates: tuple[Candidate, ...]
    rank: int
    quadratic: tuple[float, float, float] | None = None

    def best(self) -> Candidate:
        """First non-spurious candidate, else the first candidate."""
        for cand in self.candidates:
            if not cand.spurious:
                return cand
        return self.candidates[0]


@dataclass(frozen=True)
class GeometryReport:
    """Result of :func:`check_geometry`.

    ``condition_ok`` reports the sign-pattern uniqueness condition and is
    None when the sensor count is not n+2 (the condition is specific to
    that count).  ``failing_sign_patterns`` lists the sign vectors whose
    bordered determinant vanished (first sign fixed to +1; the condition is
    invariant under global negation).  ``degenerate_subsets`` lists
    (n+1)-subsets of sensor indices that fail to affinely span R^n.
    """

    noncoplanar: bool
    condition_ok: bool | None
    failing_sign_patterns: tuple[tuple[int, ...], ...] = ()
    degenerate_subsets: tuple[tuple[int, ...], ...] = ()


def _as_times(times, count: int) -> np.ndarray:
    arr = np.asarray(times, dtype=float).reshape(-1)
    if arr.shape[0] != count:
        raise LengthMismatch(f"got {arr.shape[0]} reception times for {count} sensors")
    if not np.isfinite(arr).all():
        raise ValidationError("reception times contain NaN or Inf")
    return arr


def measurement_matrix(sensors: SensorArray, times) -> np.ndarray:
    """The m x (n+2) coefficient matrix of the squared ranging equations.

    Row i is ``(-2 t_i, 2 a_i, -1)`` acting on the unknown vector
    ``(t, x, ||x||^2 - t^2)``.
    """
    t = _as_times(times, sensors.count)
    m, n = sensors.positions.shape
    out = np.empty((m, n + 2))
    out[:, 0] = -2.0 * t
    out[:, 1 : n + 1] = 2.0 * sensors.positions
    out[:, n + 1] = -1.0
    return out


def geometry_matrix(sensors: SensorArray) -> np.ndarray:
    """The m x (n+1) sub-matrix ``(2 a_i, -1)`` that depends on geometry only.

    Full column rank here is equivalent to the sensors affinely spanning
    R^n.
    """
    m, n = sensors.positions.shape
    out = np.empty((m, n + 1))
    out[:, :n] = 2.0 * sensors.positions
    out[:, n] = -1.0
    return out


def _rhs(sensors: SensorArray, t: np.ndarray) -> np.ndarray:
    # ||a_i||^2 - t_i^2, the constant side of the squared equations.
    return (sensors.positions * sensors.positions).sum(axis=1) - t * t


def _default_time_tol(sensors: SensorArray, t: np.ndarray) -> float:
    spread = float(t.max() - t.min()) if t.size else 0.0
    return 1e-9 * (spread + sensors.diameter())


def _spurious(t_emit: float, t: np.ndarray, time_tol: float) -> bool:
    return bool(np.any(t < t_emit - time_tol))


def solve_full_rank(sensors: SensorArray, times, *, rank_tol: float = linalg.DEFAULT_RANK_TOL) -> EmissionEvent:
    """Solve the full-column-rank case by one least-squares solve.

    Raises :class:`RankDeficient` if the linearised system does not have
    numeric rank n+2, in which case :func:`solve_rank_deficient` applies.
    """
    t = _as_times(times, sensors.count)
    n = sensors.dim
    if sensors.count < n + 2:
        raise RankDeficient(
            f"{sensors.count} sensors cannot give rank {n + 2}; use the quadratic path"
        )
    amat = measurement_matrix(sensors, t)
    solution = linalg.least_squares_solve(amat, _rhs(sensors, t), rank_tol)
    return EmissionEvent(solution[0], solution[1 : n + 1])


def solve_rank_deficient(sensors: SensorArray, times, config: SolveConfig = SolveConfig()) -> SolveResult:
    """Solve via the sensor-geometry reduction and a scalar quadratic.

    Requires the sensors to affinely span R^n (:class:`NotSpanning`
    otherwise).  The pseudo-inverse of the geometry matrix turns the squared
    equations into the line ``x = t*u + v`` together with a matching scalar
    pair (alpha, beta) for the ``||x||^2 - t^2`` component; eliminating x
    leaves ``(||u||^2 - 1) t^2 + (2 u.v - alpha) t + (||v||^2 - beta) = 0``.

    Raises :class:`InconsistentTimes` when the quadratic has no real root
    and :class:`DegenerateSystem` when every coefficient vanishes (which
    cannot happen for spanning sensors with consistent times).
    """
    t = _as_times(times, sensors.count)
    n = sensors.dim
    gmat = geometry_matrix(sensors)
    if linalg.numeric_rank(gmat, config.rank_tol) < n + 1:
        raise NotSpanning("sensors do not affinely span the ambient space")
    pinv = np.linalg.pinv(gmat)
    t_part = 2.0 * (pinv @ t)
    const_part = pinv @ _rhs(sensors, t)
    u, alpha = t_part[:n], t_part[n]
    v, beta = const_part[:n], const_part[n]
    coeff_a = float(u @ u) - 1.0
    coeff_b = 2.0 * float(u @ v) - float(alpha)
    coeff_c = float(v @ v) - float(beta)
    roots = linalg.solve_quadratic(coeff_a, coeff_b, coeff_c, tol=config.degeneracy_tol)
    if roots.kind is linalg.RootKind.DEGENERATE_ALL:
        raise DegenerateSystem(
            "reduced quadratic vanished identically; reception times are inconsistent"
        )
    if roots.kind is linalg.RootKind.NO_REAL:
        raise InconsistentTimes("no real emission time fits the reception times")
    time_tol = config.time_tol if config.time_tol is not None else _default_time_tol(sensors, t)
    candidates = tuple(
        Candidate(EmissionEvent(root, root * u + v), _spurious(root, t, time_tol))
        for root in roots.roots
    )
    rank = linalg.numeric_rank(measurement_matrix(sensors, t), config.rank_tol)
    return SolveResult(
        path=SolvePath.QUADRATIC,
        candidates=candidates,
        rank=rank,
        quadratic=(coeff_a, coeff_b, coeff_c),
    )


def solve(sensors: SensorArray, times, config: SolveConfig = SolveConfig()) -> SolveResult:
    """Multilaterate one event from per-sensor reception times.

    Dispatches on the numeric rank of the linearised system: rank n+2 takes
    the direct least-squares path, anything lower the quadratic path.  At
    least n+1 sensors are required.
    """
    t = _as_times(times, sensors.count)
    m, n = sensors.positions.shape
    if m < n + 1:
        raise ValidationError(f"need at least {n + 1} sensors in dimension {n}, got {m}")
    if m >= n + 2:
        amat = measurement_matrix(sensors, t)
        rank = linalg.numeric_rank(amat, config.rank_tol)
        if rank == n + 2:
            event = solve_full_rank(sensors, t, rank_tol=config.rank_tol)
            time_tol = config.time_tol if config.time_tol is not None else _default_time_tol(sensors, t)
            cand = Candidate(event, _spurious(event.time, t, time_tol))
            return SolveResult(path=SolvePath.FULL_RANK, candidates=(cand,), rank=rank)
    return solve_rank_deficient(sensors, t, config)


def event_arrivals(sensors: SensorArray, event: EmissionEvent) -> np.ndarray:
    """Forward model: reception time of ``event`` at every sensor."""
    if event.dim != sensors.dim:
        raise ValidationError(
            f"event has dimension {event.dim}, sensors have {sensors.dim}"
        )
    gaps = sensors.positions - event.position
    return event.time + np.sqrt((gaps * gaps).sum(axis=1))


def _affine_rank(points: np.ndarray, rank_tol: float) -> int:
    return linalg.numeric_rank(points[1:] - points[0], rank_tol)


def check_geometry(
    sensors: SensorArray,
    *,
    rank_tol: float = linalg.DEFAULT_RANK_TOL,
    condition_tol: float = 1e-8,
) -> GeometryReport:
    """Diagnose whether the sensor geometry guarantees a unique event.

    Checks that the sensors affinely span R^n and, for exactly n+2 sensors,
    evaluates the sign-pattern condition: for every sign vector
    ``e in {+-1}^m`` the (n+2) x (n+2) determinant with rows
    ``(e_i ||a_i||, a_i, 1)`` must be nonzero.  When it holds, distinct
    sources cannot produce identical reception times, so the two quadratic
    candidates can never both be genuine.  Determinants are compared
    scale-free (normalised by row norms) against ``condition_tol``.
    """
    pos = sensors.positions
    m, n = pos.shape
    noncoplanar = _affine_rank(pos, rank_tol) == n

    degenerate: list[tuple[int, ...]] = []
    if m >= n + 1:
        for subset in itertools.combinations(range(m), n + 1):
            if _affine_rank(pos[list(subset)], rank_tol) < n:
                degenerate.append(subset)

    condition_ok: bool | None = None
    failing: list[tuple[int, ...]] = []
    if m == n + 2:
        norms = np.linalg.norm(pos, axis=1)
        base = np.empty((m, m))
        base[:, 1 : n + 1] = pos
        base[:, n + 1] = 1.0
        # The determinant flips sign under global sign negation, so fixing
        # the first sign to +1 halves the sweep without losing patterns.
        for tail in itertools.product((1, -1), repeat=m - 1):
            signs = (1,) + tail
            base[:, 0] = np.asarray(signs) * norms
            if linalg.hadamard_ratio(base) <= condition_tol:
                failing.append(signs)
        condition_ok = not failing

    return GeometryReport(
        noncoplanar=noncoplanar,
        condition_ok=condition_ok,
        failing_sign_patterns=tuple(failing),
        degenerate_subsets=tuple(degenerate),
    )
