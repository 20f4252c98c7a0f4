"""Trace and dataset containers.

A :class:`Trace` stores its points column-wise in read-only numpy arrays so
that large datasets (millions of points) stay cheap to hold and to pass to
worker processes. :class:`TracePoint` is the row view.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from ..geo import GeoPoint, wrap_lon_array


@dataclass(frozen=True, slots=True)
class TracePoint:
    user_id: str
    t: int
    pos: GeoPoint


def _frozen(a, dtype) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Trace:
    """Time-ordered positions of one user.

    ``t`` holds UTC unix seconds. ``occupancy`` is only present for sources
    that carry it (San Francisco cabs) and is used by preprocessing.
    """

    user_id: str
    t: np.ndarray
    lat: np.ndarray
    lon: np.ndarray
    occupancy: np.ndarray | None = None

    def __post_init__(self) -> None:
        t = _frozen(self.t, np.int64)
        lat = _frozen(self.lat, np.float64)
        lon = _frozen(wrap_lon_array(np.asarray(self.lon, dtype=np.float64)), np.float64)
        if not (len(t) == len(lat) == len(lon)):
            raise ValueError("t, lat and lon must have equal lengths")
        if len(t) and np.any(np.diff(t) < 0):
            raise ValueError(f"trace {self.user_id!r} is not time-sorted")
        if len(lat) and (not np.all(np.isfinite(lat)) or np.any(np.abs(lat) > 90.0)):
            raise ValueError(f"trace {self.user_id!r} has latitudes outside [-90, 90]")
        if len(lon) and not np.all(np.isfinite(lon)):
            raise ValueError(f"trace {self.user_id!r} has non-finite longitudes")
        object.__setattr__(self, "user_id", str(self.user_id))
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "lat", lat)
        object.__setattr__(self, "lon", lon)
        if self.occupancy is not None:
            occ = _frozen(self.occupancy, np.int64)
            if len(occ) != len(t):
                raise ValueError("occupancy must match the number of points")
            object.__setattr__(self, "occupancy", occ)

    @classmethod
    def from_points(cls, points: Sequence[TracePoint], user_id: str | None = None) -> "Trace":
        if user_id is None:
            if not points:
                raise ValueError("user_id is required for an empty trace")
            user_id = points[0].user_id
        if any(p.user_id != user_id for p in points):
            raise ValueError("all points of a trace must share the user_id")
        return cls(
            user_id,
            [p.t for p in points],
            [p.pos.lat for p in points],
            [p.pos.lon for p in points],
        )

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i: int) -> TracePoint:
        return TracePoint(self.user_id, int(self.t[i]), GeoPoint(self.lat[i], self.lon[i]))

    def __iter__(self) -> Iterator[TracePoint]:
        for i in range(len(self)):
            yield self[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Trace):
            return NotImplemented
        occ_equal = (self.occupancy is None and other.occupancy is None) or (
            self.occupancy is not None
            and other.occupancy is not None
            and np.array_equal(self.occupancy, other.occupancy)
        )
        return (
            self.user_id == other.user_id
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.lat, other.lat)
            and np.array_equal(self.lon, other.lon)
            and occ_equal
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def points(self) -> list[TracePoint]:
        return list(self)

    @property
    def positions(self) -> list[GeoPoint]:
        return [GeoPoint(a, b) for a, b in zip(self.lat.tolist(), self.lon.tolist())]

    def with_positions(self, lat, lon) -> "Trace":
        """Same user and timestamps, new coordinates."""
        return Trace(self.user_id, self.t, lat, lon, self.occupancy)

    def select(self, index) -> "Trace":
        """Subset of points by boolean mask or sorted integer indices."""
        occ = None if self.occupancy is None else self.occupancy[index]
        return Trace(self.user_id, self.t[index], self.lat[index], self.lon[index], occ)


@dataclass(frozen=True)
class Provenance:
    source_format: str
    steps: tuple[str, ...] = ()

    def plus(self, step: str) -> "Provenance":
        return Provenance(self.source_format, self.steps + (step,))


@dataclass(frozen=True)
class Dataset:
    """A named, immutable collection of per-user traces."""

    name: str
    traces: tuple[Trace, ...]
    provenance: Provenance = field(default_factory=lambda: Provenance("memory"))

    def __post_init__(self) -> None:
        traces = tuple(self.traces)
        seen: set[str] = set()
        for tr in traces:
            if tr.user_id in seen:
                raise ValueError(f"duplicate user_id {tr.user_id!r} in dataset {self.name!r}")
            seen.add(tr.user_id)
        object.__setattr__(self, "traces", traces)

    def __len__(self) -> int:
        return len(self.traces)

    def __iter__(self) -> Iterator[Trace]:
        return iter(self.traces)

    @property
    def user_ids(self) -> list[str]:
        return [tr.user_id for tr in self.traces]

    @property
    def n_points(self) -> int:
        return sum(len(tr) for tr in self.traces)

    @property
    def has_occupancy(self) -> bool:
        return all(tr.occupancy is not None for tr in self.traces)

    def replace_traces(self, traces: Iterable[Trace], step: str, name: str | None = None) -> "Dataset":
        return Dataset(name or self.name, tuple(traces), self.provenance.plus(step))
