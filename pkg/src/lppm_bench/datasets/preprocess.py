"""Dataset filters applied before any mechanism runs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import RuleMismatch
from .model import Dataset, Trace

# Geolife is recorded around Beijing; days are counted in local time.
GEOLIFE_UTC_OFFSET_S = 8 * 3600


@dataclass(frozen=True)
class GeolifeDays:
    """Drop user-days (UTC+8 calendar days) with fewer than ``min_points`` points."""

    min_points: int = 480
    utc_offset_s: int = GEOLIFE_UTC_OFFSET_S

    def describe(self) -> str:
        return f"geolife_days(min_points={self.min_points})"


@dataclass(frozen=True)
class SfDropEmpty:
    """Drop points recorded while the cab had no passenger (occupancy 0)."""

    def describe(self) -> str:
        return "sf_drop_empty"


@dataclass(frozen=True)
class MinPointsPerUser:
    min_points: int

    def describe(self) -> str:
        return f"min_points_per_user({self.min_points})"


PreprocessRule = GeolifeDays | SfDropEmpty | MinPointsPerUser


def _keep_dense_days(tr: Trace, rule: GeolifeDays) -> Trace:
    if len(tr) == 0:
        return tr
    day = (tr.t + rule.utc_offset_s) // 86400
    _, inverse, counts = np.unique(day, return_inverse=True, return_counts=True)
    return tr.select(counts[inverse] >= rule.min_points)


def preprocess(ds: Dataset, rule: PreprocessRule) -> Dataset:
    """Apply ``rule`` and return a new dataset; point values are never altered.

    Users left without any point are removed.
    """
    if isinstance(rule, MinPointsPerUser):
        traces = [tr for tr in ds.traces if len(tr) >= rule.min_points]
    elif isinstance(rule, SfDropEmpty):
        if not ds.has_occupancy:
            raise RuleMismatch(f"{rule.describe()} needs occupancy, which dataset {ds.name!r} does not carry")
        traces = [tr.select(tr.occupancy != 0) for tr in ds.traces]
    elif isinstance(rule, GeolifeDays):
        traces = [_keep_dense_days(tr, rule) for tr in ds.traces]
    else:
        raise TypeError(f"unsupported preprocessing rule {rule!r}")
    return ds.replace_traces((tr for tr in traces if len(tr)), rule.describe())


def parse_rule(text: str) -> PreprocessRule:
    """Parse a rule name as used in configs and on the command line.

    Accepted forms: ``geolife_days``, ``geolife_days:480``, ``sf_drop_empty``,
    ``min_points:25``.
    """
    name, _, arg = text.strip().partition(":")
    name = name.strip().lower()
    if name == "geolife_days":
        return GeolifeDays(int(arg)) if arg else GeolifeDays()
    if name == "sf_drop_empty":
        return SfDropEmpty()
    if name in ("min_points", "min_points_per_user"):
        if not arg:
            raise ValueError("min_points needs a threshold, e.g. min_points:25")
        return MinPointsPerUser(int(arg))
    raise ValueError(f"unknown preprocessing rule {text!r}")
