"""De-obfuscation attacks: sliding average, POI extraction and nearest-node map matching."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .datasets.model import Trace
from .errors import EmptyGraph, ParseError
from .geo import GeoPoint, haversine, wrap_lon_array

DEFAULT_WINDOW = 2
POI_MAX_DIAMETER_M = 250.0
POI_MIN_DWELL_S = 3600


def _centroid(lat: np.ndarray, lon: np.ndarray) -> tuple[float, float]:
    """Mean of local-frame coordinates, referenced on the first point.

    For the equirectangular frame this reduces to the mean latitude and the
    mean wrapped longitude offset.
    """
    ref_lon = lon[0]
    mean_lon = ref_lon + wrap_lon_array(lon - ref_lon).mean()
    return float(lat.mean()), float(wrap_lon_array(mean_lon))


def sliding_average(tr: Trace, k: int = DEFAULT_WINDOW) -> Trace:
    """Replace point i by the centroid of points i-k..i+k (clipped to the trace)."""
    if k < 1:
        raise ValueError("window radius k must be >= 1")
    n = len(tr)
    if n == 0:
        return tr
    sum_lat = np.zeros(n)
    sum_dlon = np.zeros(n)
    count = np.zeros(n)
    for off in range(-k, k + 1):
        lo = max(0, -off)
        hi = min(n, n - off)
        if lo >= hi:
            continue
        idx = np.arange(lo, hi)
        sum_lat[idx] += tr.lat[idx + off]
        sum_dlon[idx] += wrap_lon_array(tr.lon[idx + off] - tr.lon[idx])
        count[idx] += 1
    lat = sum_lat / count
    lon = tr.lon + sum_dlon / count
    return tr.with_positions(lat, lon)


@dataclass(frozen=True)
class Poi:
    centroid: GeoPoint
    t_start: int
    t_end: int
    n_points: int

    @property
    def dwell(self) -> int:
        return self.t_end - self.t_start


def _make_poi(tr: Trace, start: int, stop: int) -> Poi:
    lat, lon = _centroid(tr.lat[start:stop], tr.lon[start:stop])
    return Poi(GeoPoint(lat, lon), int(tr.t[start]), int(tr.t[stop - 1]), stop - start)


def extract_pois(
    tr: Trace, max_diameter: float = POI_MAX_DIAMETER_M, min_dwell: float = POI_MIN_DWELL_S
) -> list[Poi]:
    """Greedy grouping of consecutive points whose diameter stays within ``max_diameter``.

    A group grows while the largest pairwise distance among its members
    (including the candidate point) is at most ``max_diameter``. Closed
    groups spanning at least ``min_dwell`` seconds become POIs.
    """
    if not max_diameter > 0 or not min_dwell > 0:
        raise ValueError("max_diameter and min_dwell must be positive")
    n = len(tr)
    pois: list[Poi] = []
    if n == 0:
        return pois
    lat = tr.lat
    lon = tr.lon
    t = tr.t
    start = 0
    for j in range(1, n + 1):
        if j < n:
            # every member is already within max_diameter of every other
            d = haversine(lat[j], lon[j], lat[start:j], lon[start:j])
            if d.max() <= max_diameter:
                continue
        if t[j - 1] - t[start] >= min_dwell:
            pois.append(_make_poi(tr, start, j))
        start = j
    return pois


def match_pois(orig: list[Poi], attacked: list[Poi]) -> list[tuple[int, int, float]]:
    """Map each attacked POI to its nearest original POI by centroid distance.

    Returns ``(attacked_index, orig_index, distance_m)`` triples; several
    attacked POIs may share an original. Ties go to the lowest original index.
    An empty ``orig`` yields an empty mapping.
    """
    if not orig or not attacked:
        return []
    o_lat = np.array([p.centroid.lat for p in orig])
    o_lon = np.array([p.centroid.lon for p in orig])
    out = []
    for i, p in enumerate(attacked):
        d = haversine(p.centroid.lat, p.centroid.lon, o_lat, o_lon)
        j = int(np.argmin(d))
        out.append((i, j, float(d[j])))
    return out


def _unit_vectors(lat, lon) -> np.ndarray:
    phi = np.radians(lat)
    lam = np.radians(lon)
    return np.column_stack([np.cos(phi) * np.cos(lam), np.cos(phi) * np.sin(lam), np.sin(phi)])


class RoadGraph:
    """Road-network nodes used for nearest-node map matching.

    Nodes are kept sorted by id so that ties resolve to the lowest id.
    Chord distance on the unit sphere orders points the same way as
    great-circle distance, so a k-d tree over unit vectors finds candidates
    and the final choice is made on haversine distance.
    """

    TIE_TOLERANCE_M = 1e-9
    CANDIDATES = 8

    def __init__(self, nodes):
        pairs = sorted((int(nid), pos) for nid, pos in nodes)
        if not pairs:
            raise EmptyGraph("road graph has no nodes")
        ids = [nid for nid, _ in pairs]
        if len(set(ids)) != len(ids):
            raise ValueError("road graph node ids must be unique")
        self.node_ids = np.array(ids, dtype=np.int64)
        self.lat = np.array([pos.lat for _, pos in pairs])
        self.lon = np.array([pos.lon for _, pos in pairs])
        self._tree = cKDTree(_unit_vectors(self.lat, self.lon))

    def __len__(self) -> int:
        return len(self.node_ids)

    @property
    def nodes(self) -> list[tuple[int, GeoPoint]]:
        return [(int(i), GeoPoint(a, b)) for i, a, b in zip(self.node_ids, self.lat, self.lon)]

    @classmethod
    def from_csv(cls, path) -> "RoadGraph":
        """Read ``node_id,lat,lon`` rows after a one-line header."""
        path = Path(path)
        nodes = []
        with path.open("r", newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            next(reader, None)
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    nodes.append((int(row[0]), GeoPoint(float(row[1]), float(row[2]))))
                except (ValueError, IndexError) as exc:
                    raise ParseError(str(exc), path, lineno) from None
        return cls(nodes)

    def nearest_index(self, lat, lon) -> np.ndarray:
        """Row index of the nearest node for each query point."""
        lat = np.atleast_1d(np.asarray(lat, dtype=float))
        lon = np.atleast_1d(np.asarray(lon, dtype=float))
        if lat.size == 0:
            return np.empty(0, dtype=np.int64)
        k = min(self.CANDIDATES, len(self))
        _, cand = self._tree.query(_unit_vectors(lat, lon), k=k)
        cand = np.asarray(cand).reshape(len(lat), k)
        d = haversine(lat[:, None], lon[:, None], self.lat[cand], self.lon[cand])
        best = d.min(axis=1, keepdims=True)
        tied = d <= best + self.TIE_TOLERANCE_M
        # candidate rows index the id-sorted arrays, so the smallest row is the lowest id
        return np.where(tied, cand, np.iinfo(np.int64).max).min(axis=1)


def map_match(tr: Trace, g: RoadGraph) -> Trace:
    """Snap every position to the nearest road-graph node."""
    if g is None or len(g) == 0:
        raise EmptyGraph("map matching needs a non-empty road graph")
    idx = g.nearest_index(tr.lat, tr.lon)
    return tr.with_positions(g.lat[idx], g.lon[idx])
