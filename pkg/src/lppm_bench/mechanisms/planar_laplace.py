"""Planar Laplace noise and the plain per-point geo-indistinguishable mechanism."""

from __future__ import annotations

import math

import numpy as np

from ..datasets.model import Trace
from ..errors import DomainError
from ..geo import GeoPoint, offset_points
from .lambertw import wm1_near_branch


def check_epsilon(eps: float) -> float:
    eps = float(eps)
    if not (math.isfinite(eps) and eps > 0):
        raise DomainError(f"epsilon must be a positive finite number, got {eps}")
    return eps


def epsilon_from_level(level: float, radius_m: float) -> float:
    """Epsilon giving privacy level ``level`` within ``radius_m`` meters (eps = level / radius)."""
    if radius_m <= 0:
        raise DomainError("radius must be positive")
    return check_epsilon(level / radius_m)


def radial_cdf(r, eps: float):
    """P(noise radius <= r) = 1 - (1 + eps*r) * exp(-eps*r)."""
    er = eps * np.asarray(r, dtype=float)
    out = -np.expm1(-er) - er * np.exp(-er)
    return float(out) if np.ndim(r) == 0 else out


def inverse_cdf_radius(p, eps: float):
    """Noise radius (m) at cumulative probability ``p`` in [0, 1).

    Uses W_{-1}((p - 1)/e); the radius grows without bound as p -> 1.
    """
    eps = check_epsilon(eps)
    p_arr = np.asarray(p, dtype=float)
    if np.any(~(p_arr >= 0.0)) or np.any(p_arr >= 1.0):
        raise DomainError("p must lie in [0, 1)")
    w = wm1_near_branch((p_arr - 1.0) / np.e, p_arr)
    r = np.maximum(-(w + 1.0) / eps, 0.0)
    return float(r) if np.ndim(p) == 0 else r


def _draw(rng: np.random.Generator, n: int, eps) -> tuple[np.ndarray, np.ndarray]:
    """(dx, dy) offsets in meters; per point the angle is drawn before the radius."""
    u = rng.random((n, 2))
    theta = 2.0 * np.pi * u[:, 0]
    r = -(wm1_near_branch((u[:, 1] - 1.0) / np.e, u[:, 1]) + 1.0) / eps
    return r * np.cos(theta), r * np.sin(theta)


def planar_laplace_many(lat, lon, eps, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Obfuscate every (lat, lon) independently; ``eps`` may be scalar or per point.

    Consumes the generator in the same order as successive :func:`planar_laplace_point` calls.
    """
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    dx, dy = _draw(rng, lat.size, np.asarray(eps, dtype=float))
    return offset_points(lat, lon, dx, dy)


def planar_laplace_point(x: GeoPoint, eps: float, rng: np.random.Generator) -> GeoPoint:
    eps = check_epsilon(eps)
    lat, lon = planar_laplace_many(np.array([x.lat]), np.array([x.lon]), eps, rng)
    return GeoPoint(float(lat[0]), float(lon[0]))


def obfuscate_pl(tr: Trace, eps: float, seed: int) -> Trace:
    """Replace every position by an independent planar Laplace draw."""
    eps = check_epsilon(eps)
    rng = np.random.default_rng(seed)
    lat, lon = planar_laplace_many(tr.lat, tr.lon, eps, rng)
    return tr.with_positions(lat, lon)
