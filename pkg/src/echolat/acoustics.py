"""Echo simulation and wall reconstruction from first-order reflections.

A first-order echo off a planar wall arrives as if it had been emitted by
the mirror image of the source across that wall.  Reconstructing a room
therefore splits into two steps: recover the virtual sources from the
unlabelled reception times (:func:`echolat.matching.match_events`), then
map every virtual source back to the wall that is the perpendicular
bisector between it and the true source.  Events recovered at the source
itself correspond to the direct sound, not to a wall.

A sensor position is *good* for a room when no combination of echoes from
different walls masquerades as a single consistent event — i.e. when the
detector finds every wall and nothing else.  :func:`goodness_check` probes
this empirically by perturbing the sensors and watching for ghost walls and
for collapsing relation residuals on mixed tuples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMirror, DimensionMismatch, ValidationError
from .lateration import SensorArray
from .matching import DetectedEvent, MatchConfig, MatchReport, ReceptionTable, match_events
from .relations import batched_relation_residuals

#: Components of a unit normal smaller than this are treated as zero when
#: choosing the canonical orientation, so that tiny numerical noise cannot
#: flip the stored sign of an axis-aligned wall.
_ORIENT_EPS = 1e-9

_MIRROR_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class Wall:
    """An (n-1)-dimensional plane ``{p : normal . p = offset}``.

    The normal is normalised to unit length and the pair (normal, offset)
    is brought to a canonical orientation — the first component of the
    normal that exceeds 1e-9 in magnitude is made positive — so that equal
    planes constructed from opposite normals compare equal.
    """

    normal: np.ndarray
    offset: float

    def __post_init__(self) -> None:
        vec = np.array(self.normal, dtype=float).reshape(-1)
        if vec.size < 2 or not np.isfinite(vec).all() or not np.isfinite(self.offset):
            raise ValidationError("wall needs a finite normal (dim >= 2) and offset")
        length = float(np.linalg.norm(vec))
        if length == 0.0:
            raise ValidationError("wall normal must be nonzero")
        vec = vec / length
        offset = float(self.offset) / length
        for component in vec:
            if abs(component) > _ORIENT_EPS:
                if component < 0.0:
                    vec = -vec
                    offset = -offset
                break
        vec = vec + 0.0  # scrub negative zeros left by the flip
        offset += 0.0
        vec.setflags(write=False)
        object.__setattr__(self, "normal", vec)
        object.__setattr__(self, "offset", offset)

    @property
    def dim(self) -> int:
        return self.normal.shape[0]

    def signed_distance(self, point) -> float:
        p = np.asarray(point, dtype=float).reshape(-1)
        if p.shape[0] != self.dim:
            raise DimensionMismatch(f"point has dimension {p.shape[0]}, wall has {self.dim}")
        return float(self.normal @ p) - self.offset


def mirror_point(wall: Wall, point) -> np.ndarray:
    """Reflect ``point`` across ``wall``: p - 2 (n.p - offset) n."""
    p = np.asarray(point, dtype=float).reshape(-1)
    return p - 2.0 * wall.signed_distance(p) * wall.normal


def wall_from_mirror(source, mirror) -> Wall:
    """The wall whose reflection maps ``source`` to ``mirror``.

    That is the perpendicular bisector plane of the segment between them.
    Raises :class:`DegenerateMirror` when the two points are closer than
    1e-9, since then no plane is determined.
    """
    src = np.asarray(source, dtype=float).reshape(-1)
    mir = np.asarray(mirror, dtype=float).reshape(-1)
    if src.shape != mir.shape:
        raise DimensionMismatch(f"source {src.shape} and mirror {mir.shape} differ")
    gap = mir - src
    length = float(np.linalg.norm(gap))
    if length <= _MIRROR_EPS:
        raise DegenerateMirror(f"mirror point is only {length:g} away from the source")
    normal = gap / length
    offset = float(normal @ ((src + mir) / 2.0))
    return Wall(normal, offset)


def same_plane(a: Wall, b: Wall, normal_tol: float, offset_tol: float) -> bool:
    """Whether two walls describe the same plane within tolerances.

    Compares up to overall sign, so the result does not depend on the
    canonical-orientation choice made near axis-aligned normals.
    """
    for sign in (1.0, -1.0):
        if (
            float(np.linalg.norm(a.normal - sign * b.normal)) <= normal_tol
            and abs(a.offset - sign * b.offset) <= offset_tol
        ):
            return True
    return False


@dataclass(frozen=True, eq=False)
class Room:
    """Planar walls plus a loudspeaker position strictly off every wall."""

    walls: tuple[Wall, ...]
    loudspeaker: np.ndarray

    def __post_init__(self) -> None:
        speaker = np.array(self.loudspeaker, dtype=float).reshape(-1)
        if speaker.size < 2 or not np.isfinite(speaker).all():
            raise ValidationError("loudspeaker must be a finite vector of dimension >= 2")
        walls = tuple(self.walls)
        for i, wall in enumerate(walls):
            if wall.dim != speaker.shape[0]:
                raise DimensionMismatch(
                    f"wall {i} has dimension {wall.dim}, loudspeaker {speaker.shape[0]}"
                )
            if abs(wall.signed_distance(speaker)) <= _MIRROR_EPS:
                raise ValidationError(f"loudspeaker lies on wall {i}")
        speaker.setflags(write=False)
        object.__setattr__(self, "walls", walls)
        object.__setattr__(self, "loudspeaker", speaker)

    @property
    def dim(self) -> int:
        return self.loudspeaker.shape[0]

    def mirror_points(self) -> np.ndarray:
        """Mirror images of the loudspeaker across each wall, one per row."""
        if not self.walls:
            return np.empty((0, self.dim))
        return np.vstack([mirror_point(w, self.loudspeaker) for w in self.walls])


@dataclass(frozen=True, eq=False)
class EchoScene:
    """Virtual sources of one emission: mirror points, pairwise distinct."""

    mirror_points: np.ndarray
    emission_time: float = 0.0

    def __post_init__(self) -> None:
        pts = np.array(self.mirror_points, dtype=float)
        if pts.ndim != 2:
            raise ValidationError(f"mirror points must form a 2-d array, got shape {pts.shape}")
        if not np.isfinite(pts).all() or not np.isfinite(self.emission_time):
            raise ValidationError("mirror points and emission time must be finite")
        if pts.shape[0] >= 2:
            diff = pts[:, None, :] - pts[None, :, :]
            dist = np.sqrt((diff * diff).sum(axis=2))
            iu = np.triu_indices(pts.shape[0], k=1)
            if np.any(dist[iu] <= _MIRROR_EPS):
                raise ValidationError("mirror points must be pairwise distinct (1e-9)")
        pts.setflags(write=False)
        object.__setattr__(self, "mirror_points", pts)
        object.__setattr__(self, "emission_time", float(self.emission_time))

    @classmethod
    def from_room(cls, room: Room, emission_time: float = 0.0) -> "EchoScene":
        return cls(room.mirror_points(), emission_time)


def simulate_echoes(
    room: Room,
    sensors: SensorArray,
    emission_time: float = 0.0,
    *,
    include_direct: bool = False,
    dropout=(),
    spurious=(),
) -> ReceptionTable:
    """Exact first-order reception table for a room and sensor layout.

    Each sensor receives one echo per wall at ``emission_time`` plus its
    distance to the wall's mirror point, plus the direct sound when
    ``include_direct`` is set.  ``dropout`` is an iterable of
    (wall_index, sensor_index) pairs whose echo is omitted; ``spurious`` an
    iterable of (sensor_index, time) entries injected verbatim.
    """
    if sensors.dim != room.dim:
        raise DimensionMismatch(f"sensors have dimension {sensors.dim}, room {room.dim}")
    scene = EchoScene.from_room(room, emission_time)
    sources = [scene.mirror_points[k] for k in range(len(room.walls))]
    dropped = set()
    for wall_index, sensor_index in dropout:
        if not (0 <= wall_index < len(room.walls) and 0 <= sensor_index < sensors.count):
            raise ValidationError(f"dropout entry ({wall_index}, {sensor_index}) out of range")
        dropped.add((int(wall_index), int(sensor_index)))

    lists: list[list[float]] = [[] for _ in range(sensors.count)]
    for w, src in enumerate(sources):
        gaps = sensors.positions - src
        arrivals = emission_time + np.sqrt((gaps * gaps).sum(axis=1))
        for i in range(sensors.count):
            if (w, i) not in dropped:
                lists[i].append(float(arrivals[i]))
    if include_direct:
        gaps = sensors.positions - room.loudspeaker
        arrivals = emission_time + np.sqrt((gaps * gaps).sum(axis=1))
        for i in range(sensors.count):
            lists[i].append(float(arrivals[i]))
    for sensor_index, time in spurious:
        if not 0 <= sensor_index < sensors.count:
            raise ValidationError(f"spurious entry names sensor {sensor_index}, have {sensors.count}")
        lists[int(sensor_index)].append(float(time))
    return ReceptionTable.from_lists(lists)


@dataclass(frozen=True, eq=False)
class WallDetection:
    """Walls recovered from a reception table, plus full provenance.

    ``direct_events`` are matched events at the source itself (the direct
    sound); ``mirror_events`` are the events that produced ``walls``, in
    the same order before deduplication.
    """

    walls: tuple[Wall, ...]
    direct_events: tuple[DetectedEvent, ...]
    mirror_events: tuple[DetectedEvent, ...]
    match: MatchReport


def detect_walls(
    sensors: SensorArray,
    table: ReceptionTable,
    source,
    config: MatchConfig = MatchConfig(),
    *,
    direct_eps: float = 1e-9,
) -> WallDetection:
    """Recover walls from unlabelled reception times and a known source.

    Matches the table to events, treats every event further than
    ``direct_eps`` from the source as a mirror point and converts it to a
    wall; events at the source are reported as the direct sound.  Walls
    closer than internal tolerances are merged.
    """
    src = np.asarray(source, dtype=float).reshape(-1)
    if src.shape[0] != sensors.dim:
        raise DimensionMismatch(f"source has dimension {src.shape[0]}, sensors {sensors.dim}")
    report = match_events(sensors, table, config)
    direct: list[DetectedEvent] = []
    mirrors: list[DetectedEvent] = []
    walls: list[Wall] = []
    scale = 1.0 + float(np.abs(src).max(initial=0.0)) + sensors.diameter()
    for ev in report.events:
        if float(np.linalg.norm(ev.position - src)) <= direct_eps:
            direct.append(ev)
            continue
        mirrors.append(ev)
        wall = wall_from_mirror(src, ev.position)
        if not any(same_plane(wall, kept, 1e-9, 1e-9 * scale) for kept in walls):
            walls.append(wall)
    return WallDetection(
        walls=tuple(walls),
        direct_events=tuple(direct),
        mirror_events=tuple(mirrors),
        match=report,
    )


@dataclass(frozen=True)
class GoodnessReport:
    """Empirical evidence that a sensor layout resolves a room cleanly.

    Aggregated over the base layout plus ``trials`` random perturbations:
    ``ghost_walls`` counts detected walls matching no true wall,
    ``missed_walls`` true walls never detected.  The margin is the smallest
    relation residual over all *mixed* tuples (reception times drawn from
    at least two different virtual sources); a healthy layout keeps it far
    above the acceptance threshold, while a degenerate one lets it collapse
    toward zero.  None when the scene has fewer than two virtual sources.
    """

    trials: int
    ghost_walls: int
    missed_walls: int
    mixed_residual_margin: float | None


def goodness_check(
    room: Room,
    sensors: SensorArray,
    *,
    trials: int = 20,
    rng_seed: int = 0,
    perturbation: float = 0.05,
    include_direct: bool = False,
    config: MatchConfig = MatchConfig(),
    normal_tol: float = 1e-6,
    offset_tol: float | None = None,
) -> GoodnessReport:
    """Probe a sensor layout for ghost walls and residual margin.

    Runs the full simulate-and-detect loop for the given sensors and for
    ``trials`` uniformly perturbed copies (amplitude ``perturbation`` times
    the sensor diameter), comparing detected walls against the room.  See
    :class:`GoodnessReport` for the aggregated fields.
    """
    if sensors.dim != room.dim:
        raise DimensionMismatch(f"sensors have dimension {sensors.dim}, room {room.dim}")
    if trials < 0:
        raise ValidationError(f"trials must be >= 0, got {trials}")
    if offset_tol is None:
        max_offset = max((abs(w.offset) for w in room.walls), default=0.0)
        offset_tol = 1e-6 * (1.0 + max_offset)
    rng = np.random.default_rng(rng_seed)
    amplitude = perturbation * sensors.diameter()

    layouts = [sensors]
    for _ in range(trials):
        jitter = rng.uniform(-amplitude, amplitude, size=sensors.positions.shape)
        layouts.append(SensorArray(sensors.positions + jitter))

    ghosts = 0
    missed = 0
    margin: float | None = None
    for layout in layouts:
        table = simulate_echoes(room, layout, include_direct=include_direct)
        detection = detect_walls(layout, table, room.loudspeaker, config)
        for wall in detection.walls:
            if not any(same_plane(wall, true, normal_tol, offset_tol) for true in room.walls):
                ghosts += 1
        for true in room.walls:
            if not any(same_plane(wall, true, normal_tol, offset_tol) for wall in detection.walls):
                missed += 1
        run_margin = _mixed_margin(room, layout, include_direct)
        if run_margin is not None:
            margin = run_margin if margin is None else min(margin, run_margin)
    return GoodnessReport(
        trials=trials,
        ghost_walls=ghosts,
        missed_walls=missed,
        mixed_residual_margin=margin,
    )


def _mixed_margin(room: Room, sensors: SensorArray, include_direct: bool) -> float | None:
    """Smallest relation residual over tuples mixing different sources."""
    sources = room.mirror_points()
    if include_direct:
        sources = np.vstack([sources, room.loudspeaker])
    k, m = sources.shape[0], sensors.count
    if k < 2:
        return None
    gaps = sources[:, None, :] - sensors.positions[None, :, :]
    arrivals = np.sqrt((gaps * gaps).sum(axis=2))  # (k, m): source x sensor
    idx = np.indices((k,) * m).reshape(m, -1).T  # every assignment of sources
    mixed = ~np.all(idx == idx[:, :1], axis=1)
    rows = arrivals[idx[mixed], np.arange(m)[None, :]]
    dist = sensors.pairwise_distances()
    residuals = batched_relation_residuals(rows, dist * dist)
    return float(residuals.min())
