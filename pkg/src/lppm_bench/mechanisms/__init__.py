"""Obfuscation mechanisms and their calibration helpers."""

from __future__ import annotations

from .adaptive import (
    AdaptiveParams,
    adapt_epsilon,
    linreg_predict,
    obfuscate_adaptive,
    obfuscate_adaptive_detailed,
)
from .calibration import PRIVACY_LEVELS, SWEEP_EPSILONS, NoiseRow, epsilon_noise_table
from .clustering import (
    ClusterMemory,
    ClusterParams,
    memory_clustering_step,
    obfuscate_clustering,
    obfuscate_memory_clustering,
)
from .lambertw import lambertw_m1
from .planar_laplace import (
    check_epsilon,
    epsilon_from_level,
    inverse_cdf_radius,
    obfuscate_pl,
    planar_laplace_many,
    planar_laplace_point,
    radial_cdf,
)
from .seeding import derive_seed, mix64

MECHANISM_KINDS = ("identity", "planar_laplace", "adaptive", "clustering", "memory_clustering")

_ADAPTIVE_OPTIONS = {"delta1", "delta2", "ws", "alpha", "beta"}
_CLUSTER_OPTIONS = {"radius"}


def allowed_options(kind: str) -> set[str]:
    if kind == "adaptive":
        return set(_ADAPTIVE_OPTIONS)
    if kind in ("clustering", "memory_clustering"):
        return set(_CLUSTER_OPTIONS)
    if kind in MECHANISM_KINDS:
        return set()
    raise ValueError(f"unknown mechanism {kind!r}; expected one of {MECHANISM_KINDS}")


def obfuscate(kind: str, tr, epsilon: float, seed: int, **options):
    """Dispatch to a mechanism by name; ``options`` are its extra parameters."""
    unknown = set(options) - allowed_options(kind)
    if unknown:
        raise ValueError(f"unknown option(s) {sorted(unknown)} for mechanism {kind!r}")
    if kind == "identity":
        return tr
    if kind == "planar_laplace":
        return obfuscate_pl(tr, epsilon, seed)
    if kind == "adaptive":
        return obfuscate_adaptive(tr, AdaptiveParams(base_epsilon=epsilon, **options), seed)
    if kind == "clustering":
        return obfuscate_clustering(tr, ClusterParams(epsilon=epsilon, **options), seed)
    return obfuscate_memory_clustering(tr, ClusterParams(epsilon=epsilon, **options), seed)


__all__ = [
    "AdaptiveParams",
    "ClusterMemory",
    "ClusterParams",
    "MECHANISM_KINDS",
    "NoiseRow",
    "PRIVACY_LEVELS",
    "SWEEP_EPSILONS",
    "adapt_epsilon",
    "allowed_options",
    "check_epsilon",
    "derive_seed",
    "epsilon_from_level",
    "epsilon_noise_table",
    "inverse_cdf_radius",
    "lambertw_m1",
    "linreg_predict",
    "memory_clustering_step",
    "mix64",
    "obfuscate",
    "obfuscate_adaptive",
    "obfuscate_adaptive_detailed",
    "obfuscate_clustering",
    "obfuscate_memory_clustering",
    "obfuscate_pl",
    "planar_laplace_many",
    "planar_laplace_point",
    "radial_cdf",
]
