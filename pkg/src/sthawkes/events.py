"""Event-sequence data model.

CSV ingestion, temporal rescaling, chronological splitting and one-hot type
encoding for multi-type spatio-temporal event data. Sequences are immutable;
all operations return new objects.

Type ids are 1-based in CSV files and reports (matching the usual tabular
convention) and 0-based everywhere inside the library; the conversion happens
exactly once, at parse/serialize time.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, DataError, ParseError

CSV_HEADER = ("u", "t", "x", "y")


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned spatial domain [x_min, x_max] x [y_min, y_max]."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ConfigError(f"degenerate rectangle {self}")

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    @property
    def sides(self) -> tuple[float, float]:
        return (self.x_max - self.x_min, self.y_max - self.y_min)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Boolean mask of (n, 2) points inside the closed rectangle."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return (
            (pts[:, 0] >= self.x_min)
            & (pts[:, 0] <= self.x_max)
            & (pts[:, 1] >= self.y_min)
            & (pts[:, 1] <= self.y_max)
        )

    def grid(self, resolution: int) -> np.ndarray:
        """resolution^2 uniform points covering the rectangle, row-major.

        Refining resolution r to 2r - 1 yields a superset of the coarser
        grid, which keeps grid maxima monotone under refinement.
        """
        if resolution < 2:
            raise ConfigError("grid resolution must be >= 2")
        xs = np.linspace(self.x_min, self.x_max, resolution)
        ys = np.linspace(self.y_min, self.y_max, resolution)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])


@dataclass(frozen=True)
class EventRecord:
    """One event as seen at the external boundary (1-based type id)."""

    type_id: int
    time: float
    location: tuple[float, float]


@dataclass(frozen=True)
class ScalingInfo:
    """Invertible affine rescaling applied to a sequence.

    Times map as t -> t * time_scale. Coordinates map as
    x -> (x - x_offset) * x_scale, and likewise for y.
    """

    time_scale: float = 1.0
    x_scale: float = 1.0
    y_scale: float = 1.0
    x_offset: float = 0.0
    y_offset: float = 0.0

    def invert_times(self, times: np.ndarray) -> np.ndarray:
        return np.asarray(times, dtype=float) / self.time_scale

    def invert_locations(self, locations: np.ndarray) -> np.ndarray:
        pts = np.asarray(locations, dtype=float)
        return np.column_stack(
            [pts[..., 0] / self.x_scale + self.x_offset,
             pts[..., 1] / self.y_scale + self.y_offset]
        )


@dataclass(frozen=True)
class SplitSpec:
    """Chronological split fractions; they must be positive and sum to 1."""

    fit_fraction: float = 0.72
    val_fraction: float = 0.08
    test_fraction: float = 0.20

    def __post_init__(self):
        fracs = (self.fit_fraction, self.val_fraction, self.test_fraction)
        if min(fracs) <= 0:
            raise ConfigError(f"split fractions must be positive, got {fracs}")
        if abs(sum(fracs) - 1.0) > 1e-9:
            raise ConfigError(f"split fractions must sum to 1, got {sum(fracs)!r}")


@dataclass(frozen=True)
class EventSequence:
    """Time-ordered typed, located events on a window (t_start, duration].

    Arrays are read-only. ``types`` is 0-based. ``duration`` is the end of
    the observation window; for split partitions ``t_start`` marks where the
    partition's own window begins (0 for a whole sequence).
    """

    times: np.ndarray
    locations: np.ndarray
    types: np.ndarray
    num_types: int
    duration: float
    domain: Rectangle
    t_start: float = 0.0

    def __post_init__(self):
        times = np.ascontiguousarray(np.asarray(self.times, dtype=float))
        locs = np.ascontiguousarray(np.asarray(self.locations, dtype=float).reshape(-1, 2))
        types = np.ascontiguousarray(np.asarray(self.types, dtype=np.int64))
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "locations", locs)
        object.__setattr__(self, "types", types)
        if not (len(times) == len(locs) == len(types)):
            raise DataError("times, locations and types must have equal length")
        if self.num_types < 1:
            raise ConfigError("num_types must be >= 1")
        if len(times):
            if np.any(np.diff(times) < 0):
                raise DataError("event times must be nondecreasing")
            if times[0] < 0:
                raise DataError("event times must be nonnegative")
            if times[0] < self.t_start:
                raise DataError("event times must not precede the window start")
            if times[-1] > self.duration:
                raise DataError("last event time exceeds the sequence duration")
            if types.min() < 0 or types.max() >= self.num_types:
                raise DataError("type ids out of range")
            if not self.domain.contains(locs).all():
                bad = int(np.flatnonzero(~self.domain.contains(locs))[0])
                raise DataError(
                    f"event {bad} at {tuple(locs[bad])} lies outside the domain {self.domain}"
                )
        if self.duration < self.t_start:
            raise DataError("duration must not precede the window start")
        for arr in (times, locs, types):
            arr.flags.writeable = False

    def __len__(self) -> int:
        return len(self.times)

    def __getitem__(self, i: int) -> EventRecord:
        return EventRecord(
            type_id=int(self.types[i]) + 1,
            time=float(self.times[i]),
            location=(float(self.locations[i, 0]), float(self.locations[i, 1])),
        )

    def records(self) -> list[EventRecord]:
        return [self[i] for i in range(len(self))]

    @property
    def window_length(self) -> float:
        return self.duration - self.t_start

    def slice_window(self, i0: int, i1: int) -> "EventSequence":
        """Contiguous sub-window holding events [i0, i1).

        The window covers (t_{i0-1}, t_{i1-1}] with t_{-1} taken as the
        parent's window start, so adjacent slices tile the parent window.
        """
        if not (0 <= i0 < i1 <= len(self)):
            raise ValueError(f"invalid slice [{i0}, {i1}) of {len(self)} events")
        start = self.t_start if i0 == 0 else float(self.times[i0 - 1])
        return replace(
            self,
            times=self.times[i0:i1],
            locations=self.locations[i0:i1],
            types=self.types[i0:i1],
            duration=float(self.times[i1 - 1]),
            t_start=start,
        )


def parse_events(
    csv_text,
    num_types: int,
    domain: Rectangle,
    duration: float | None = None,
) -> EventSequence:
    """Parse a ``u,t,x,y`` CSV into an EventSequence.

    Accepts a string or a text stream. Events are stably sorted by time.
    ``duration`` defaults to the maximum event time; when an override is
    given, events beyond it are dropped with a warning.
    """
    if num_types < 1:
        raise ConfigError("num_types must be >= 1")
    if isinstance(csv_text, str):
        csv_text = io.StringIO(csv_text)
    reader = csv.reader(csv_text)
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError("empty input, expected header 'u,t,x,y'") from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise ParseError(f"expected header 'u,t,x,y', got {','.join(header)!r}")

    us, ts, xs, ys = [], [], [], []
    for row_no, row in enumerate(reader, start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 4:
            raise ParseError(f"expected 4 fields, got {len(row)}", row=row_no)
        try:
            u = int(row[0])
            t, x, y = (float(v) for v in row[1:])
        except ValueError as exc:
            raise ParseError(str(exc), row=row_no) from None
        if not (1 <= u <= num_types):
            raise DataError(f"row {row_no}: type id {u} outside 1..{num_types}")
        if t < 0:
            raise DataError(f"row {row_no}: negative time {t!r}")
        if not domain.contains([[x, y]])[0]:
            raise DataError(
                f"row {row_no}: event (u={u}, t={t!r}) at ({x!r}, {y!r}) "
                f"lies outside the domain {domain}"
            )
        us.append(u - 1)
        ts.append(t)
        xs.append(x)
        ys.append(y)

    times = np.asarray(ts, dtype=float)
    locations = np.column_stack([xs, ys]) if ts else np.zeros((0, 2))
    types = np.asarray(us, dtype=np.int64)
    order = np.argsort(times, kind="stable")
    times, locations, types = times[order], locations[order], types[order]

    if duration is None:
        duration = float(times[-1]) if len(times) else 0.0
    else:
        keep = times <= duration
        if not keep.all():
            warnings.warn(
                f"dropping {int((~keep).sum())} events beyond duration {duration!r}",
                stacklevel=2,
            )
            times, locations, types = times[keep], locations[keep], types[keep]
    return EventSequence(
        times=times,
        locations=locations,
        types=types,
        num_types=num_types,
        duration=float(duration),
        domain=domain,
    )


def serialize_events(seq: EventSequence) -> str:
    """Write a sequence back to CSV at full round-trip precision."""
    lines = [",".join(CSV_HEADER)]
    for i in range(len(seq)):
        lines.append(
            f"{int(seq.types[i]) + 1},{float(seq.times[i])!r},"
            f"{float(seq.locations[i, 0])!r},{float(seq.locations[i, 1])!r}"
        )
    return "\n".join(lines) + "\n"


def rescale_time(seq: EventSequence) -> tuple[EventSequence, ScalingInfo]:
    """Rescale times so the mean inter-event gap becomes exactly 1.

    Sequences with fewer than two events (or zero time spread) are returned
    unchanged with scale 1.
    """
    n = len(seq)
    span = float(seq.times[-1] - seq.times[0]) if n >= 2 else 0.0
    if n < 2 or span <= 0.0:
        if n >= 2:
            warnings.warn("all events share one time; skipping rescale", stacklevel=2)
        return seq, ScalingInfo()
    scale = (n - 1) / span
    scaled = replace(
        seq,
        times=seq.times * scale,
        duration=seq.duration * scale,
        t_start=seq.t_start * scale,
    )
    return scaled, ScalingInfo(time_scale=scale)


def normalize_space(seq: EventSequence) -> tuple[EventSequence, ScalingInfo]:
    """Optionally map the spatial domain onto the unit square [0, 1]^2."""
    sx, sy = seq.domain.sides
    info = ScalingInfo(
        x_scale=1.0 / sx,
        y_scale=1.0 / sy,
        x_offset=seq.domain.x_min,
        y_offset=seq.domain.y_min,
    )
    locs = np.column_stack(
        [(seq.locations[:, 0] - info.x_offset) * info.x_scale,
         (seq.locations[:, 1] - info.y_offset) * info.y_scale]
    )
    scaled = replace(
        seq,
        locations=locs if len(seq) else np.zeros((0, 2)),
        domain=Rectangle(0.0, 1.0, 0.0, 1.0),
    )
    return scaled, info


def split_chronological(
    seq: EventSequence, spec: SplitSpec = SplitSpec()
) -> tuple[EventSequence, EventSequence, EventSequence]:
    """Split into contiguous fit/val/test partitions, in time order.

    Counts are floor(N * fraction); the remainder goes to the fit partition.
    Each partition's window tiles the parent window, with the test window
    extending to the parent duration.
    """
    n = len(seq)
    if n == 0:
        raise DataError("cannot split an empty sequence")
    n_fit = int(n * spec.fit_fraction)
    n_val = int(n * spec.val_fraction)
    n_test = int(n * spec.test_fraction)
    n_fit += n - (n_fit + n_val + n_test)
    if n_val == 0:
        warnings.warn("validation partition is empty", stacklevel=2)
    if n_test == 0:
        warnings.warn("test partition is empty", stacklevel=2)

    def _part(i0: int, i1: int, end: float) -> EventSequence:
        start = seq.t_start if i0 == 0 else float(seq.times[i0 - 1])
        return replace(
            seq,
            times=seq.times[i0:i1],
            locations=seq.locations[i0:i1],
            types=seq.types[i0:i1],
            duration=end,
            t_start=start,
        )

    fit_end = float(seq.times[n_fit - 1]) if n_fit else seq.t_start
    val_end = float(seq.times[n_fit + n_val - 1]) if n_val else fit_end
    fit = _part(0, n_fit, fit_end)
    val = _part(n_fit, n_fit + n_val, val_end)
    test = _part(n_fit + n_val, n, float(seq.duration))
    return fit, val, test


def concat(a: EventSequence, b: EventSequence) -> EventSequence:
    """Concatenate two chronologically adjacent partitions."""
    if len(b) and len(a) and b.times[0] < a.times[-1]:
        raise DataError("sequences are not chronologically ordered")
    return replace(
        a,
        times=np.concatenate([a.times, b.times]),
        locations=np.vstack([a.locations, b.locations]),
        types=np.concatenate([a.types, b.types]),
        duration=max(a.duration, b.duration),
        t_start=min(a.t_start, b.t_start),
    )


def one_hot(seq: EventSequence) -> np.ndarray:
    """(N, U) one-hot matrix of event types."""
    out = np.zeros((len(seq), seq.num_types))
    out[np.arange(len(seq)), seq.types] = 1.0
    return out
