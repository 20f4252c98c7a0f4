"""Greedy temporal and spatial sub-sampling of traces."""

from __future__ import annotations

import math

from ..geo import haversine
from .model import Dataset, Trace

TEMPORAL_THRESHOLDS_S = (60, 600, 1800, 3600)
SPATIAL_THRESHOLDS_M = (500.0, 1000.0, 5000.0, 10000.0)


def temporal_subsample(tr: Trace, min_dt: float) -> Trace:
    """Keep the first point, then every point at least ``min_dt`` seconds after the last kept one."""
    if not min_dt > 0:
        raise ValueError("min_dt must be positive")
    if len(tr) < 2:
        return tr
    keep = [0]
    last = int(tr.t[0])
    for i, t in enumerate(tr.t.tolist()):
        if i and t - last >= min_dt:
            keep.append(i)
            last = t
    return tr.select(keep)


def spatial_subsample(tr: Trace, min_d: float) -> Trace:
    """Same greedy scan as :func:`temporal_subsample`, on distance from the last kept point."""
    if not min_d > 0:
        raise ValueError("min_d must be positive")
    n = len(tr)
    if n < 2:
        return tr
    keep = [0]
    lat = tr.lat
    lon = tr.lon
    i = 0
    while True:
        # distances from the last kept point to everything after it, in chunks
        found = None
        start = i + 1
        chunk = 256
        while start < n:
            stop = min(n, start + chunk)
            d = haversine(lat[i], lon[i], lat[start:stop], lon[start:stop])
            hits = (d >= min_d).nonzero()[0]
            if len(hits):
                found = start + int(hits[0])
                break
            start = stop
            chunk *= 2
        if found is None:
            break
        keep.append(found)
        i = found
    return tr.select(keep)


def describe(axis: str, threshold: float) -> str:
    if axis == "temporal":
        return f"temporal>={threshold:g}s"
    if axis == "spatial":
        return f"spatial>={threshold:g}m"
    raise ValueError(f"unknown sub-sampling axis {axis!r}")


def subsample_dataset(ds: Dataset, axis: str, threshold: float) -> Dataset:
    fn = {"temporal": temporal_subsample, "spatial": spatial_subsample}.get(axis)
    if fn is None:
        raise ValueError(f"unknown sub-sampling axis {axis!r}")
    return ds.replace_traces((fn(tr, threshold) for tr in ds.traces), describe(axis, threshold))


def subsample_axis(ds: Dataset, axis: str, thresholds) -> list[Dataset]:
    """One sub-sampled variant of ``ds`` per threshold, in the given (ascending) order."""
    thresholds = list(thresholds)
    if any(b < a for a, b in zip(thresholds, thresholds[1:])):
        raise ValueError("thresholds must be ascending")
    if any(not (math.isfinite(x) and x > 0) for x in thresholds):
        raise ValueError("thresholds must be positive")
    return [subsample_dataset(ds, axis, th) for th in thresholds]
