"""Geodetic primitives: great-circle distance and a local tangent plane.

All distances are on a sphere of radius :data:`EARTH_RADIUS_M`. The local
frame is equirectangular around a reference point (x east, y north, meters),
scaling longitude by the cosine of the mean of the point and reference
latitudes. That keeps the error second order in the offset (well under 0.1%
within 100 km away from the poles) while staying exactly invertible, since
latitude is recovered from y alone. Traces crossing the antimeridian are not
special-cased.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import OutOfProjectionRange

EARTH_RADIUS_M = 6_371_000.0
PROJECTION_LIMIT_M = 100_000.0


def wrap_lon(lon: float) -> float:
    """Normalize a longitude in degrees to (-180, 180]."""
    if -180.0 < lon <= 180.0:
        return lon
    lon = math.fmod(lon, 360.0)
    if lon <= -180.0:
        lon += 360.0
    elif lon > 180.0:
        lon -= 360.0
    return lon


def wrap_lon_array(lon: np.ndarray) -> np.ndarray:
    lon = np.asarray(lon, dtype=float)
    out = np.fmod(lon, 360.0)
    out = np.where(out <= -180.0, out + 360.0, out)
    out = np.where(out > 180.0, out - 360.0, out)
    return out


@dataclass(frozen=True, slots=True)
class GeoPoint:
    """A latitude/longitude pair in degrees. Longitude is normalized."""

    lat: float
    lon: float

    def __post_init__(self) -> None:
        lat = float(self.lat)
        lon = float(self.lon)
        if not (math.isfinite(lat) and math.isfinite(lon)):
            raise ValueError(f"non-finite coordinate ({lat}, {lon})")
        if not -90.0 <= lat <= 90.0:
            raise ValueError(f"latitude {lat} outside [-90, 90]")
        object.__setattr__(self, "lat", lat)
        object.__setattr__(self, "lon", wrap_lon(lon))


@dataclass(frozen=True, slots=True)
class LocalXY:
    """Meters east (x) and north (y) of ``reference``."""

    x: float
    y: float
    reference: GeoPoint


def distance(a: GeoPoint, b: GeoPoint) -> float:
    """Haversine distance in meters."""
    phi1 = math.radians(a.lat)
    phi2 = math.radians(b.lat)
    d_phi = phi2 - phi1
    d_lambda = math.radians(b.lon - a.lon)
    h = math.sin(d_phi / 2.0) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(d_lambda / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(h)))


def haversine(lat1, lon1, lat2, lon2) -> np.ndarray:
    """Vectorized :func:`distance` over broadcastable degree arrays."""
    phi1 = np.radians(lat1)
    phi2 = np.radians(lat2)
    d_phi = phi2 - phi1
    d_lambda = np.radians(np.subtract(lon2, lon1))
    h = np.sin(d_phi / 2.0) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(d_lambda / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.minimum(1.0, np.sqrt(h)))


def to_local(p: GeoPoint, ref: GeoPoint) -> LocalXY:
    """Project ``p`` into the tangent plane at ``ref``.

    Raises:
        OutOfProjectionRange: if ``p`` is 100 km or more from ``ref``.
    """
    d = distance(p, ref)
    if d >= PROJECTION_LIMIT_M:
        raise OutOfProjectionRange(f"point is {d:.0f} m from the reference (limit {PROJECTION_LIMIT_M:.0f} m)")
    x, y = project(p.lat, p.lon, ref.lat, ref.lon)
    return LocalXY(float(x), float(y), ref)


def from_local(v: LocalXY) -> GeoPoint:
    """Inverse of :func:`to_local`."""
    if math.hypot(v.x, v.y) >= PROJECTION_LIMIT_M:
        raise OutOfProjectionRange(f"offset ({v.x:.0f}, {v.y:.0f}) m exceeds the projection limit")
    lat, lon = unproject(v.x, v.y, v.reference.lat, v.reference.lon)
    return GeoPoint(float(lat), float(lon))


def project(lat, lon, ref_lat, ref_lon):
    """Equirectangular projection without range checks; works on arrays."""
    mid = np.radians(np.add(lat, ref_lat) / 2.0)
    x = EARTH_RADIUS_M * np.radians(wrap_lon_array(np.subtract(lon, ref_lon))) * np.cos(mid)
    y = EARTH_RADIUS_M * np.radians(np.subtract(lat, ref_lat))
    return x, y


def unproject(x, y, ref_lat, ref_lon):
    """Inverse of :func:`project`; no range checks."""
    lat = np.add(ref_lat, np.degrees(np.divide(y, EARTH_RADIUS_M)))
    mid = np.radians(np.add(lat, ref_lat) / 2.0)
    lon = np.add(ref_lon, np.degrees(np.divide(x, EARTH_RADIUS_M * np.cos(mid))))
    return lat, wrap_lon_array(lon)


def destination(lat, lon, bearing, dist):
    """Great-circle destination from a start point, bearing (radians from north) and distance (m)."""
    phi1 = np.radians(lat)
    lam1 = np.radians(lon)
    delta = np.divide(dist, EARTH_RADIUS_M)
    sin_phi2 = np.sin(phi1) * np.cos(delta) + np.cos(phi1) * np.sin(delta) * np.cos(bearing)
    phi2 = np.arcsin(np.clip(sin_phi2, -1.0, 1.0))
    lam2 = lam1 + np.arctan2(
        np.sin(bearing) * np.sin(delta) * np.cos(phi1),
        np.cos(delta) - np.sin(phi1) * sin_phi2,
    )
    return np.degrees(phi2), wrap_lon_array(np.degrees(lam2))


def offset_points(lat, lon, dx, dy):
    """Displace points by (dx, dy) meters in each point's own tangent plane.

    Offsets under the projection limit go through :func:`unproject`; larger
    ones (only reachable at tiny epsilons) follow the great circle instead so
    the result stays a valid coordinate.
    """
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    dx = np.asarray(dx, dtype=float)
    dy = np.asarray(dy, dtype=float)
    near_lat, near_lon = unproject(dx, dy, lat, lon)
    near_lat = np.clip(near_lat, -90.0, 90.0)
    r = np.hypot(dx, dy)
    far = r >= PROJECTION_LIMIT_M
    if not np.any(far):
        return near_lat, near_lon
    far_lat, far_lon = destination(lat, lon, np.arctan2(dx, dy), r)
    return np.where(far, far_lat, near_lat), np.where(far, far_lon, near_lon)
