"""Per-dataset attribute profile: medians over users of simple mobility statistics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ..geo import EARTH_RADIUS_M, haversine, wrap_lon_array
from .model import Dataset, Trace

SECONDS_PER_DAY = 86400.0


@dataclass(frozen=True)
class DatasetProfile:
    n_users: int
    points_per_user: float
    consecutive_distance: float  # m
    frequency: float  # Hz
    velocity: float  # m/s
    time_window: float  # days
    density: float  # points / km^2
    area: float  # km^2
    degenerate_traces: int = 0
    zero_area_traces: int = 0

    def as_dict(self) -> dict[str, float]:
        return {
            "n_users": self.n_users,
            "points_per_user": self.points_per_user,
            "consecutive_distance_m": self.consecutive_distance,
            "frequency_hz": self.frequency,
            "velocity_m_s": self.velocity,
            "time_window_days": self.time_window,
            "density_points_km2": self.density,
            "area_km2": self.area,
            "degenerate_traces": self.degenerate_traces,
            "zero_area_traces": self.zero_area_traces,
        }


def hull_area_km2(lat: np.ndarray, lon: np.ndarray) -> float:
    """Convex-hull area of the points in an equal-area (sinusoidal) projection."""
    if len(lat) < 3:
        return 0.0
    center = float(np.median(lon))
    phi = np.radians(lat)
    x = EARTH_RADIUS_M * np.radians(wrap_lon_array(lon - center)) * np.cos(phi)
    y = EARTH_RADIUS_M * phi
    pts = np.unique(np.column_stack([x, y]), axis=0)
    if len(pts) < 3:
        return 0.0
    try:
        # in 2-D, ConvexHull.volume is the enclosed area
        return float(ConvexHull(pts).volume) / 1e6
    except QhullError:
        return 0.0


@dataclass(frozen=True)
class TraceStats:
    n_points: int
    consecutive_distance: float
    frequency: float
    velocity: float
    time_window: float
    area: float

    @property
    def density(self) -> float:
        return self.n_points / self.area if self.area > 0 else float("nan")


def trace_stats(tr: Trace) -> TraceStats | None:
    """Statistics of one trace, or None if it has <2 points or zero duration."""
    n = len(tr)
    if n < 2:
        return None
    duration = float(tr.t[-1] - tr.t[0])
    if duration <= 0:
        return None
    steps = haversine(tr.lat[:-1], tr.lon[:-1], tr.lat[1:], tr.lon[1:])
    return TraceStats(
        n_points=n,
        consecutive_distance=float(np.median(steps)),
        frequency=(n - 1) / duration,
        velocity=float(steps.sum()) / duration,
        time_window=duration / SECONDS_PER_DAY,
        area=hull_area_km2(tr.lat, tr.lon),
    )


def _median(values: list[float]) -> float:
    return float(np.median(values)) if values else float("nan")


def profile(ds: Dataset) -> DatasetProfile:
    """Median attributes over users.

    Traces with fewer than two points or zero duration only contribute to
    ``points_per_user`` and are counted in ``degenerate_traces``; traces with
    a zero hull area are left out of the area and density medians.
    """
    counts = [len(tr) for tr in ds.traces]
    stats = []
    degenerate = 0
    for tr in ds.traces:
        s = trace_stats(tr)
        if s is None:
            degenerate += 1
        else:
            stats.append(s)
    with_area = [s for s in stats if s.area > 0]
    return DatasetProfile(
        n_users=len(ds.traces),
        points_per_user=_median(counts),
        consecutive_distance=_median([s.consecutive_distance for s in stats]),
        frequency=_median([s.frequency for s in stats]),
        velocity=_median([s.velocity for s in stats]),
        time_window=_median([s.time_window for s in stats]),
        density=_median([s.density for s in with_area]),
        area=_median([s.area for s in with_area]),
        degenerate_traces=degenerate,
        zero_area_traces=len(stats) - len(with_area),
    )
