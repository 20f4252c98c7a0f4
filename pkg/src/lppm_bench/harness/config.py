"""Experiment configuration, read from TOML.

Example::

    master_seed = 7
    jobs = 4
    output_dir = "results"
    metrics = ["average_error", "usefulness", "poi_recall"]

    [[datasets]]
    name = "sf"
    format = "sf_cabs"
    path = "data/cabspottingdata"
    preprocess = ["sf_drop_empty"]
    subsample = { axis = "temporal", thresholds = [60, 600, 1800, 3600] }

    [[mechanisms]]
    kind = "clustering"
    radius = 200

    [[attacks]]
    kind = "sliding_average"
    k = 2

Relative paths are resolved against the config file's directory. Unknown
keys are rejected. The ``LPPM_BENCH_OUT`` environment variable overrides
``output_dir``.
"""

from __future__ import annotations

import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..datasets.loaders import LOADERS
from ..datasets.preprocess import PreprocessRule, parse_rule
from ..datasets.subsample import SPATIAL_THRESHOLDS_M, TEMPORAL_THRESHOLDS_S
from ..errors import ConfigError
from ..mechanisms import MECHANISM_KINDS, PRIVACY_LEVELS, SWEEP_EPSILONS, allowed_options
from ..metrics import DEFAULT_ALPHAS_M

OUTPUT_ENV_VAR = "LPPM_BENCH_OUT"

ATTACK_KINDS = ("none", "sliding_average", "poi_extraction", "map_matching")
ATTACK_OPTIONS = {
    "none": set(),
    "sliding_average": {"k"},
    "poi_extraction": set(),
    "map_matching": {"graph"},
}
METRIC_KINDS = ("average_error", "usefulness", "poi_recall", "poi_distance")
POI_METRICS = {"poi_recall", "poi_distance"}
POINTWISE_METRICS = {"average_error", "usefulness"}


@dataclass(frozen=True)
class SubsampleSpec:
    axis: str
    thresholds: tuple[float, ...]
    include_original: bool = False


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    format: str
    path: Path
    preprocess: tuple[PreprocessRule, ...] = ()
    subsample: SubsampleSpec | None = None


@dataclass(frozen=True)
class MechanismSpec:
    kind: str
    name: str
    epsilons: tuple[float | None, ...]
    options: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class AttackSpec:
    kind: str
    name: str
    options: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentConfig:
    datasets: tuple[DatasetSpec, ...]
    mechanisms: tuple[MechanismSpec, ...]
    attacks: tuple[AttackSpec, ...]
    metrics: tuple[str, ...]
    master_seed: int = 0
    output_dir: Path = Path("results")
    alphas: tuple[float, ...] = DEFAULT_ALPHAS_M
    jobs: int = 1
    poi_max_diameter: float = 250.0
    poi_min_dwell: float = 3600.0
    poi_on_spatial: bool = False

    def with_overrides(self, **changes) -> "ExperimentConfig":
        data = {f: getattr(self, f) for f in self.__dataclass_fields__}
        data.update({k: v for k, v in changes.items() if v is not None})
        return ExperimentConfig(**data)


def _check_keys(table: dict, allowed: set[str], where: str) -> None:
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def _positive_floats(values, where: str) -> tuple[float, ...]:
    try:
        out = tuple(float(v) for v in values)
    except (TypeError, ValueError):
        raise ConfigError(f"{where} must be a list of numbers") from None
    if not out or any(not (math.isfinite(v) and v > 0) for v in out):
        raise ConfigError(f"{where} must be a non-empty list of positive numbers")
    return out


def _parse_subsample(raw, where: str) -> SubsampleSpec:
    if not isinstance(raw, dict):
        raise ConfigError(f"{where}.subsample must be a table")
    _check_keys(raw, {"axis", "thresholds", "include_original"}, f"{where}.subsample")
    axis = raw.get("axis")
    defaults = {"temporal": TEMPORAL_THRESHOLDS_S, "spatial": SPATIAL_THRESHOLDS_M}
    if axis not in defaults:
        raise ConfigError(f"{where}.subsample.axis must be 'temporal' or 'spatial'")
    thresholds = _positive_floats(raw.get("thresholds", defaults[axis]), f"{where}.subsample.thresholds")
    if list(thresholds) != sorted(thresholds):
        raise ConfigError(f"{where}.subsample.thresholds must be ascending")
    return SubsampleSpec(axis, thresholds, bool(raw.get("include_original", False)))


def _parse_dataset(raw, base: Path, i: int) -> DatasetSpec:
    where = f"datasets[{i}]"
    if not isinstance(raw, dict):
        raise ConfigError(f"{where} must be a table")
    _check_keys(raw, {"name", "format", "path", "preprocess", "subsample"}, where)
    for key in ("name", "format", "path"):
        if key not in raw:
            raise ConfigError(f"{where} is missing {key!r}")
    if raw["format"] not in LOADERS:
        raise ConfigError(f"{where}.format must be one of {sorted(LOADERS)}")
    try:
        rules = tuple(parse_rule(r) for r in raw.get("preprocess", []))
    except ValueError as exc:
        raise ConfigError(f"{where}.preprocess: {exc}") from None
    sub = _parse_subsample(raw["subsample"], where) if "subsample" in raw else None
    path = Path(raw["path"])
    if not path.is_absolute():
        path = base / path
    return DatasetSpec(str(raw["name"]), raw["format"], path, rules, sub)


def _parse_mechanism(raw, default_eps: tuple[float, ...], i: int) -> MechanismSpec:
    where = f"mechanisms[{i}]"
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ConfigError(f"{where} must be a table with a 'kind'")
    kind = raw["kind"]
    if kind not in MECHANISM_KINDS:
        raise ConfigError(f"{where}.kind must be one of {MECHANISM_KINDS}")
    options = {k: v for k, v in raw.items() if k not in ("kind", "name", "epsilons")}
    _check_keys(options, allowed_options(kind), where)
    if kind == "identity" and "epsilons" not in raw:
        epsilons: tuple[float | None, ...] = (None,)
    else:
        epsilons = _positive_floats(raw.get("epsilons", default_eps), f"{where}.epsilons")
    return MechanismSpec(kind, str(raw.get("name", kind)), epsilons, options)


def _parse_attack(raw, base: Path, i: int) -> AttackSpec:
    where = f"attacks[{i}]"
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ConfigError(f"{where} must be a table with a 'kind'")
    kind = raw["kind"]
    if kind not in ATTACK_KINDS:
        raise ConfigError(f"{where}.kind must be one of {ATTACK_KINDS}")
    options = {k: v for k, v in raw.items() if k not in ("kind", "name")}
    _check_keys(options, ATTACK_OPTIONS[kind], where)
    if kind == "map_matching":
        if "graph" not in options:
            raise ConfigError(f"{where} needs a 'graph' CSV path")
        graph = Path(options["graph"])
        options["graph"] = graph if graph.is_absolute() else base / graph
    if kind == "sliding_average":
        k = options.get("k", 2)
        if not isinstance(k, int) or k < 1:
            raise ConfigError(f"{where}.k must be a positive integer")
        options["k"] = k
    return AttackSpec(kind, str(raw.get("name", kind)), options)


def _unique(names, what: str) -> None:
    seen = set()
    for n in names:
        if n in seen:
            raise ConfigError(f"duplicate {what} name {n!r}")
        seen.add(n)


def _alphas(doc: dict) -> tuple[float, ...]:
    if "alphas" in doc and "alpha_grid" in doc:
        raise ConfigError("give either 'alphas' or 'alpha_grid', not both")
    if "alpha_grid" in doc:
        grid = doc["alpha_grid"]
        _check_keys(grid, {"start", "stop", "step"}, "alpha_grid")
        start = float(grid.get("start", 0.0))
        stop = float(grid.get("stop", 10000.0))
        step = float(grid.get("step", 100.0))
        if step <= 0 or stop < start or start < 0:
            raise ConfigError("alpha_grid needs 0 <= start <= stop and step > 0")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(start + i * step for i in range(n))
    if "alphas" in doc:
        try:
            alphas = tuple(float(a) for a in doc["alphas"])
        except (TypeError, ValueError):
            raise ConfigError("alphas must be a list of numbers") from None
        if not alphas or any(a < 0 for a in alphas) or any(b <= a for a, b in zip(alphas, alphas[1:])):
            raise ConfigError("alphas must be non-empty, nonnegative and strictly ascending")
        return alphas
    return DEFAULT_ALPHAS_M


TOP_LEVEL_KEYS = {
    "master_seed",
    "jobs",
    "output_dir",
    "epsilons",
    "alphas",
    "alpha_grid",
    "metrics",
    "datasets",
    "mechanisms",
    "attacks",
    "poi",
}


def config_from_dict(doc: dict, base: Path | None = None) -> ExperimentConfig:
    base = Path(base) if base is not None else Path.cwd()
    _check_keys(doc, TOP_LEVEL_KEYS, "config")
    for key in ("datasets", "mechanisms", "attacks", "metrics"):
        if not doc.get(key):
            raise ConfigError(f"config needs at least one entry in {key!r}")

    datasets = tuple(_parse_dataset(raw, base, i) for i, raw in enumerate(doc["datasets"]))
    has_subsample = any(d.subsample is not None for d in datasets)
    if "epsilons" in doc:
        default_eps = _positive_floats(doc["epsilons"], "epsilons")
    elif has_subsample:
        default_eps = tuple(PRIVACY_LEVELS.values())
    else:
        default_eps = SWEEP_EPSILONS
    mechanisms = tuple(_parse_mechanism(raw, default_eps, i) for i, raw in enumerate(doc["mechanisms"]))
    attacks = tuple(_parse_attack(raw, base, i) for i, raw in enumerate(doc["attacks"]))
    metrics = tuple(doc["metrics"])
    for m in metrics:
        if m not in METRIC_KINDS:
            raise ConfigError(f"unknown metric {m!r}; expected one of {METRIC_KINDS}")
    _unique([d.name for d in datasets], "dataset")
    _unique([m.name for m in mechanisms], "mechanism")
    _unique([a.name for a in attacks], "attack")
    _unique(metrics, "metric")

    poi = doc.get("poi", {})
    _check_keys(poi, {"max_diameter", "min_dwell", "on_spatial"}, "poi")
    seed = doc.get("master_seed", 0)
    jobs = doc.get("jobs", 1)
    if not isinstance(seed, int) or seed < 0:
        raise ConfigError("master_seed must be a nonnegative integer")
    if not isinstance(jobs, int) or jobs < 1:
        raise ConfigError("jobs must be a positive integer")
    out = Path(os.environ.get(OUTPUT_ENV_VAR) or doc.get("output_dir", "results"))
    if not out.is_absolute():
        out = base / out
    return ExperimentConfig(
        datasets=datasets,
        mechanisms=mechanisms,
        attacks=attacks,
        metrics=metrics,
        master_seed=seed,
        output_dir=out,
        alphas=_alphas(doc),
        jobs=jobs,
        poi_max_diameter=float(poi.get("max_diameter", 250.0)),
        poi_min_dwell=float(poi.get("min_dwell", 3600.0)),
        poi_on_spatial=bool(poi.get("on_spatial", False)),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(doc, path.parent)
