"""Adaptive geo-indistinguishability.

Before obfuscating a point, the mechanism guesses where an adversary would
place it by extrapolating the last ``ws`` reported points linearly in time.
If that guess is too close to the real location the privacy budget is cut
(more noise); if it is already far off, the budget is raised (less noise).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..datasets.model import Trace
from ..geo import GeoPoint, haversine, project, unproject
from .planar_laplace import check_epsilon, planar_laplace_many

CLAMP_FACTOR = 1000.0


@dataclass(frozen=True)
class AdaptiveParams:
    base_epsilon: float
    delta1: float = 693.0
    delta2: float = 1948.0
    ws: int = 5
    alpha: float = 0.1
    beta: float = 5.0

    def __post_init__(self) -> None:
        check_epsilon(self.base_epsilon)
        if not 0 < self.delta1 < self.delta2:
            raise ValueError("need 0 < delta1 < delta2")
        if not 0 < self.alpha < 1 < self.beta:
            raise ValueError("need 0 < alpha < 1 < beta")
        if self.ws < 2:
            raise ValueError("ws must be at least 2")


def adapt_epsilon(eps: float, estimation_error: float, params: AdaptiveParams) -> float:
    """One budget update from the adversary's estimation error (m), without clamping."""
    if estimation_error < params.delta1:
        return params.alpha * eps
    if estimation_error >= params.delta2:
        return params.beta * eps
    return eps


def clamp_epsilon(eps: float, params: AdaptiveParams) -> float:
    lo = params.base_epsilon / CLAMP_FACTOR
    hi = params.base_epsilon * CLAMP_FACTOR
    return min(max(eps, lo), hi)


def _predict(t: np.ndarray, lat: np.ndarray, lon: np.ndarray, t_query: float) -> tuple[float, float]:
    ref_lat = float(lat[-1])
    ref_lon = float(lon[-1])
    tc = (t - t[-1]).astype(float)
    tq = float(t_query - t[-1])
    t_mean = tc.mean()
    spread = tc - t_mean
    ss = float(spread @ spread)
    if ss == 0.0:
        return ref_lat, ref_lon
    x, y = project(lat, lon, ref_lat, ref_lon)
    px = x.mean() + float(spread @ (x - x.mean())) / ss * (tq - t_mean)
    py = y.mean() + float(spread @ (y - y.mean())) / ss * (tq - t_mean)
    plat, plon = unproject(px, py, ref_lat, ref_lon)
    return float(np.clip(plat, -90.0, 90.0)), float(plon)


def linreg_predict(pts: Sequence[tuple[int, GeoPoint]], t_query: float) -> GeoPoint:
    """Least-squares linear extrapolation of positions to ``t_query``.

    x(t) and y(t) are fitted independently in the tangent plane of the last
    point. If all timestamps are equal there is no slope to fit and the last
    point is returned.
    """
    if len(pts) < 2:
        raise ValueError("linreg_predict needs at least two points")
    t = np.array([p[0] for p in pts], dtype=np.int64)
    lat = np.array([p[1].lat for p in pts])
    lon = np.array([p[1].lon for p in pts])
    return GeoPoint(*_predict(t, lat, lon, t_query))


def obfuscate_adaptive_detailed(tr: Trace, params: AdaptiveParams, seed: int) -> tuple[Trace, np.ndarray]:
    """Like :func:`obfuscate_adaptive`, also returning the epsilon used at each point."""
    rng = np.random.default_rng(seed)
    n = len(tr)
    out_lat = np.empty(n)
    out_lon = np.empty(n)
    eps_used = np.empty(n)
    eps = params.base_epsilon
    head = min(n, params.ws)
    if head:
        out_lat[:head], out_lon[:head] = planar_laplace_many(tr.lat[:head], tr.lon[:head], eps, rng)
        eps_used[:head] = eps
    for i in range(head, n):
        lo = i - params.ws
        guess_lat, guess_lon = _predict(tr.t[lo:i], out_lat[lo:i], out_lon[lo:i], float(tr.t[i]))
        err = float(haversine(tr.lat[i], tr.lon[i], guess_lat, guess_lon))
        eps = clamp_epsilon(adapt_epsilon(eps, err, params), params)
        lat, lon = planar_laplace_many(tr.lat[i : i + 1], tr.lon[i : i + 1], eps, rng)
        out_lat[i] = lat[0]
        out_lon[i] = lon[0]
        eps_used[i] = eps
    return tr.with_positions(out_lat, out_lon), eps_used


def obfuscate_adaptive(tr: Trace, params: AdaptiveParams, seed: int) -> Trace:
    """Planar Laplace with a budget that compounds up or down from point to point.

    The first ``ws`` points use ``base_epsilon``. The budget is clamped to
    ``[base/1000, base*1000]``.
    """
    return obfuscate_adaptive_detailed(tr, params, seed)[0]
