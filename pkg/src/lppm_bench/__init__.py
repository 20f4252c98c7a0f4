"""Composable evaluation of location-privacy preserving mechanisms.

Layers: :mod:`lppm_bench.datasets` (load, filter, sub-sample),
:mod:`lppm_bench.mechanisms` (obfuscation), :mod:`lppm_bench.attacks`
(de-obfuscation), :mod:`lppm_bench.metrics`, and :mod:`lppm_bench.harness`
which runs every combination from a TOML config.
"""

from .geo import GeoPoint, LocalXY, distance, from_local, to_local

__version__ = "0.1.0"

__all__ = ["GeoPoint", "LocalXY", "distance", "from_local", "to_local"]
