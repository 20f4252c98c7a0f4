"""Clustering geo-indistinguishability, with and without a memory of past clusters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..datasets.model import Trace
from ..geo import GeoPoint, haversine
from .planar_laplace import check_epsilon, planar_laplace_many


@dataclass(frozen=True)
class ClusterParams:
    epsilon: float
    radius: float = 200.0

    def __post_init__(self) -> None:
        check_epsilon(self.epsilon)
        if not self.radius > 0:
            raise ValueError("cluster radius must be positive")


@dataclass
class ClusterMemory:
    """Real cluster centers and the point reported for each, index-aligned."""

    real_mem: list[GeoPoint] = field(default_factory=list)
    obf_mem: list[GeoPoint] = field(default_factory=list)

    def __post_init__(self) -> None:
        if len(self.real_mem) != len(self.obf_mem):
            raise ValueError("real_mem and obf_mem must have equal lengths")
        self._lat = np.array([p.lat for p in self.real_mem], dtype=float)
        self._lon = np.array([p.lon for p in self.real_mem], dtype=float)
        self._size = len(self.real_mem)

    def __len__(self) -> int:
        return self._size

    def add(self, x: GeoPoint, z: GeoPoint) -> None:
        if self._size == len(self._lat):
            cap = max(16, 2 * len(self._lat))
            self._lat = np.resize(self._lat, cap)
            self._lon = np.resize(self._lon, cap)
        self._lat[self._size] = x.lat
        self._lon[self._size] = x.lon
        self._size += 1
        self.real_mem.append(x)
        self.obf_mem.append(z)

    def nearest(self, x: GeoPoint) -> tuple[int, float]:
        """Index of and distance to the closest stored real point (lowest index on ties)."""
        d = haversine(x.lat, x.lon, self._lat[: self._size], self._lon[: self._size])
        idx = int(np.argmin(d))
        return idx, float(d[idx])


def _pl(x: GeoPoint, eps: float, rng: np.random.Generator) -> GeoPoint:
    lat, lon = planar_laplace_many(np.array([x.lat]), np.array([x.lon]), eps, rng)
    return GeoPoint(float(lat[0]), float(lon[0]))


def memory_clustering_step(
    memory: ClusterMemory, x: GeoPoint, eps: float, radius: float, rng: np.random.Generator
) -> GeoPoint:
    """Report for ``x`` given the clusters created so far; updates ``memory`` in place.

    A new planar Laplace point is drawn (and remembered) only when ``x`` is
    farther than ``radius`` from every stored real location; otherwise the
    nearest cluster's report is reused and memory is left untouched.
    """
    if len(memory) == 0:
        z = _pl(x, eps, rng)
        memory.add(x, z)
        return z
    idx, d = memory.nearest(x)
    if d <= radius:
        return memory.obf_mem[idx]
    z = _pl(x, eps, rng)
    memory.add(x, z)
    return z


def obfuscate_memory_clustering(tr: Trace, params: ClusterParams, seed: int) -> Trace:
    rng = np.random.default_rng(seed)
    memory = ClusterMemory()
    reports = [memory_clustering_step(memory, x, params.epsilon, params.radius, rng) for x in tr.positions]
    return tr.with_positions([z.lat for z in reports], [z.lon for z in reports])


def obfuscate_clustering(tr: Trace, params: ClusterParams, seed: int) -> Trace:
    """Keep one active cluster; leaving it spawns a new one and forgets the old."""
    rng = np.random.default_rng(seed)
    n = len(tr)
    out_lat = np.empty(n)
    out_lon = np.empty(n)
    center: tuple[float, float] | None = None
    report: tuple[float, float] = (0.0, 0.0)
    for i in range(n):
        lat = tr.lat[i]
        lon = tr.lon[i]
        if center is None or haversine(lat, lon, center[0], center[1]) > params.radius:
            zl, zo = planar_laplace_many(tr.lat[i : i + 1], tr.lon[i : i + 1], params.epsilon, rng)
            center = (float(lat), float(lon))
            report = (float(zl[0]), float(zo[0]))
        out_lat[i], out_lon[i] = report
    return tr.with_positions(out_lat, out_lon)
