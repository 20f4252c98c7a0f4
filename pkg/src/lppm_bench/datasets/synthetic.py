"""Small synthetic traces used by tests, the acceptance suite and demo configs."""

from __future__ import annotations

import numpy as np

from ..geo import GeoPoint, offset_points
from .model import Dataset, Provenance, Trace

# Market Street, San Francisco; any city-latitude point works.
DEFAULT_HOME = GeoPoint(37.7749, -122.4194)


def point_at(origin: GeoPoint, east_m: float, north_m: float) -> GeoPoint:
    lat, lon = offset_points(origin.lat, origin.lon, east_m, north_m)
    return GeoPoint(float(lat), float(lon))


def commute_trace(
    user_id: str = "commuter",
    home: GeoPoint = DEFAULT_HOME,
    work: GeoPoint | None = None,
    round_trips: int = 20,
    dwell_s: int = 5400,
    step_s: int = 300,
    travel_s: int = 900,
    jitter_m: float = 20.0,
    seed: int = 0,
    t0: int = 1_212_000_000,
) -> Trace:
    """Alternating stays at ``home`` and ``work`` with no points in between.

    Each stay spans exactly ``dwell_s`` seconds, sampled every ``step_s``,
    with uniform jitter of at most ``jitter_m`` meters per axis.
    """
    if work is None:
        work = point_at(home, 2000.0, 0.0)
    rng = np.random.default_rng(seed)
    per_stay = dwell_s // step_s + 1
    ts, lats, lons = [], [], []
    t = t0
    for visit in range(2 * round_trips):
        place = home if visit % 2 == 0 else work
        times = t + step_s * np.arange(per_stay)
        jitter = rng.uniform(-jitter_m, jitter_m, size=(per_stay, 2))
        lat, lon = offset_points(
            np.full(per_stay, place.lat), np.full(per_stay, place.lon), jitter[:, 0], jitter[:, 1]
        )
        ts.append(times)
        lats.append(lat)
        lons.append(lon)
        t = int(times[-1]) + travel_s
    return Trace(user_id, np.concatenate(ts), np.concatenate(lats), np.concatenate(lons))


def line_trace(
    user_id: str = "mover",
    start: GeoPoint = DEFAULT_HOME,
    n: int = 10,
    step_m: float = 100.0,
    step_s: int = 10,
    bearing_deg: float = 90.0,
    t0: int = 1_212_000_000,
) -> Trace:
    """``n`` points on a straight line, ``step_m`` meters and ``step_s`` seconds apart."""
    k = np.arange(n, dtype=float)
    b = np.radians(bearing_deg)
    lat, lon = offset_points(
        np.full(n, start.lat), np.full(n, start.lon), k * step_m * np.sin(b), k * step_m * np.cos(b)
    )
    return Trace(user_id, t0 + step_s * np.arange(n), lat, lon)


def random_walk_trace(
    rng: np.random.Generator,
    n: int,
    user_id: str = "walker",
    origin: GeoPoint = DEFAULT_HOME,
    step_m: float = 200.0,
    max_dt: int = 600,
    stay_prob: float = 0.3,
) -> Trace:
    """Random walk in a local frame with occasional stays and duplicate timestamps."""
    moves = rng.normal(0.0, step_m, size=(n, 2))
    moves[rng.random(n) < stay_prob] *= 0.02
    moves[0] = 0.0
    xy = np.cumsum(moves, axis=0)
    xy = np.clip(xy, -40_000.0, 40_000.0)
    lat, lon = offset_points(np.full(n, origin.lat), np.full(n, origin.lon), xy[:, 0], xy[:, 1])
    dt = rng.integers(0, max_dt + 1, size=n)
    dt[0] = 0
    return Trace(user_id, 1_212_000_000 + np.cumsum(dt), lat, lon)


def commute_dataset(n_users: int = 3, seed: int = 0, **kwargs) -> Dataset:
    traces = []
    for u in range(n_users):
        home = point_at(DEFAULT_HOME, 3000.0 * u, -1500.0 * u)
        traces.append(commute_trace(f"u{u:03d}", home=home, seed=seed + u, **kwargs))
    return Dataset("synthetic_commute", tuple(traces), Provenance("synthetic"))
