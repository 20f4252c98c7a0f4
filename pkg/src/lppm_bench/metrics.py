"""Privacy and utility metrics comparing an original trace with an evaluated one."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .attacks import Poi, match_pois
from .datasets.model import Trace
from .errors import LengthMismatch, TimestampMismatch
from .geo import haversine

USE_CASE_ALPHAS_M = (500.0, 1000.0, 10000.0)
DEFAULT_ALPHAS_M = tuple(float(a) for a in range(0, 10001, 100))


def displacements(orig: Trace, other: Trace) -> np.ndarray:
    """Per-point distance (m) between two traces with matching timestamps."""
    if len(orig) != len(other):
        raise LengthMismatch(f"traces have {len(orig)} and {len(other)} points")
    if not np.array_equal(orig.t, other.t):
        raise TimestampMismatch("traces do not share timestamps point by point")
    return haversine(orig.lat, orig.lon, other.lat, other.lon)


def average_error(orig: Trace, other: Trace) -> float:
    """Mean distance between each original point and its counterpart (NaN for empty traces)."""
    d = displacements(orig, other)
    return float(d.mean()) if len(d) else float("nan")


@dataclass(frozen=True)
class UsefulnessCurve:
    alphas: tuple[float, ...]
    deltas: tuple[float, ...]

    def delta_at(self, alpha: float) -> float:
        return self.deltas[self.alphas.index(alpha)]


def usefulness_from_displacements(d: np.ndarray, alphas: Sequence[float]) -> UsefulnessCurve:
    alphas = tuple(float(a) for a in alphas)
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alphas must be strictly ascending")
    if any(a < 0 for a in alphas):
        raise ValueError("alphas must be nonnegative")
    if len(d) == 0:
        return UsefulnessCurve(alphas, tuple(float("nan") for _ in alphas))
    ds = np.sort(d)
    hits = np.searchsorted(ds, alphas, side="right")
    return UsefulnessCurve(alphas, tuple(float(h) / len(ds) for h in hits))


def usefulness_curve(orig: Trace, other: Trace, alphas: Sequence[float] = DEFAULT_ALPHAS_M) -> UsefulnessCurve:
    """Fraction of points displaced by at most alpha, for each alpha."""
    return usefulness_from_displacements(displacements(orig, other), alphas)


@dataclass(frozen=True)
class PoiReport:
    recall: float | None
    mean_matched_distance: float | None
    n_orig: int
    n_attacked: int

    @property
    def recall_defined(self) -> bool:
        return self.recall is not None


def poi_report(orig_pois: list[Poi], attacked_pois: list[Poi]) -> PoiReport:
    """Recall of original POIs and mean distance of the attacked-to-original mapping.

    Recall is None when there are no original POIs; the distance is None
    when nothing was mapped.
    """
    mapping = match_pois(orig_pois, attacked_pois)
    recall = None
    if orig_pois:
        recall = len({j for _, j, _ in mapping}) / len(orig_pois)
    dist = float(np.mean([d for _, _, d in mapping])) if mapping else None
    return PoiReport(recall, dist, len(orig_pois), len(attacked_pois))
