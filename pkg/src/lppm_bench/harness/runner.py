"""Run every (dataset variant, mechanism, epsilon, attack, metric) combination.

Work is split per (variant, mechanism, epsilon, user). All randomness comes
from a seed derived from the master seed and the cell coordinates, and rows
are sorted into a canonical order, so output does not depend on ``jobs``.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .. import attacks as atk
from ..datasets.loaders import load
from ..datasets.model import Dataset
from ..datasets.preprocess import preprocess
from ..datasets.subsample import describe, subsample_dataset
from ..errors import ConfigError, LppmError
from ..mechanisms import derive_seed, obfuscate
from ..metrics import displacements, poi_report, usefulness_from_displacements
from .config import POI_METRICS, POINTWISE_METRICS, AttackSpec, ExperimentConfig

log = logging.getLogger(__name__)

AGGREGATE = "AGGREGATE"

UNITS = {
    "average_error": "m",
    "usefulness": "fraction",
    "poi_recall": "fraction",
    "poi_distance": "m",
}


@dataclass(frozen=True)
class ResultRow:
    dataset: str
    subsample: str
    user: str
    mechanism: str
    epsilon: float | None
    attack: str
    metric: str
    alpha: float | None
    value: float | None
    unit: str
    seed: int


@dataclass(frozen=True)
class Variant:
    dataset: str
    subsample: str
    axis: str | None
    data: Dataset


def build_variants(config: ExperimentConfig) -> list[Variant]:
    variants = []
    for spec in config.datasets:
        try:
            ds = load(spec.format, spec.path, spec.name)
        except (OSError, LppmError) as exc:
            raise ConfigError(f"cannot load dataset {spec.name!r}: {exc}") from exc
        for rule in spec.preprocess:
            ds = preprocess(ds, rule)
        sub = spec.subsample
        if sub is None:
            variants.append(Variant(spec.name, "", None, ds))
            continue
        if sub.include_original:
            variants.append(Variant(spec.name, "", None, ds))
        for th in sub.thresholds:
            variants.append(Variant(spec.name, describe(sub.axis, th), sub.axis, subsample_dataset(ds, sub.axis, th)))
    return variants


def load_graphs(config: ExperimentConfig) -> dict[str, atk.RoadGraph]:
    graphs = {}
    for a in config.attacks:
        if a.kind == "map_matching":
            try:
                graphs[a.name] = atk.RoadGraph.from_csv(a.options["graph"])
            except (OSError, LppmError) as exc:
                raise ConfigError(f"cannot load road graph for attack {a.name!r}: {exc}") from exc
    return graphs


# Worker state: set once per process, read by _evaluate_user.
_STATE: dict = {}


def _init_worker(config: ExperimentConfig, variants: list[Variant], graphs: dict) -> None:
    _STATE.clear()
    _STATE.update(config=config, variants=variants, graphs=graphs)
    _orig_pois.cache_clear()


@lru_cache(maxsize=4096)
def _orig_pois(vi: int, ui: int) -> list[atk.Poi]:
    cfg: ExperimentConfig = _STATE["config"]
    tr = _STATE["variants"][vi].data.traces[ui]
    return atk.extract_pois(tr, cfg.poi_max_diameter, cfg.poi_min_dwell)


def _apply_attack(spec: AttackSpec, tr, graphs):
    if spec.kind == "none":
        return tr
    if spec.kind == "sliding_average":
        return atk.sliding_average(tr, spec.options.get("k", atk.DEFAULT_WINDOW))
    if spec.kind == "map_matching":
        return atk.map_match(tr, graphs[spec.name])
    raise ValueError(f"attack {spec.kind!r} does not produce a trace")


def metric_applies(metric: str, axis: str | None, config: ExperimentConfig) -> bool:
    if metric in POI_METRICS and axis == "spatial" and not config.poi_on_spatial:
        return False
    return True


def _evaluate_user(task: tuple[int, int, int, int]) -> list[tuple]:
    """Rows for one user in one (variant, mechanism, epsilon) cell.

    Each returned tuple is (ai, metric_index, alpha, value, unit).
    """
    vi, mi, ei, ui = task
    cfg: ExperimentConfig = _STATE["config"]
    variant: Variant = _STATE["variants"][vi]
    graphs = _STATE["graphs"]
    mech = cfg.mechanisms[mi]
    eps = mech.epsilons[ei]
    orig = variant.data.traces[ui]
    seed = derive_seed(cfg.master_seed, orig.user_id, mech.name, ei)

    out: list[tuple] = []

    def error_rows(ai: int, metric_idx: list[int], exc: Exception) -> None:
        for k in metric_idx:
            out.append((ai, k, None, None, f"error:{type(exc).__name__}"))

    active = [k for k, m in enumerate(cfg.metrics) if metric_applies(m, variant.axis, cfg)]
    try:
        obf = obfuscate(mech.kind, orig, eps, seed, **mech.options)
    except Exception as exc:  # recorded as error rows; the run continues
        log.warning("mechanism %s failed for user %s: %s", mech.name, orig.user_id, exc)
        for ai in range(len(cfg.attacks)):
            error_rows(ai, active, exc)
        return out

    for ai, spec in enumerate(cfg.attacks):
        pointwise = [k for k in active if cfg.metrics[k] in POINTWISE_METRICS]
        poi_based = [k for k in active if cfg.metrics[k] in POI_METRICS]
        evaluated = None
        try:
            if spec.kind == "poi_extraction":
                attacked_pois = atk.extract_pois(obf, cfg.poi_max_diameter, cfg.poi_min_dwell)
            else:
                evaluated = _apply_attack(spec, obf, graphs)
                attacked_pois = None
        except Exception as exc:
            log.warning("attack %s failed for user %s: %s", spec.name, orig.user_id, exc)
            error_rows(ai, active, exc)
            continue

        if pointwise:
            if evaluated is None:
                # POI extraction breaks the point-to-point correspondence
                out.extend((ai, k, None, None, "error:NotApplicable") for k in pointwise)
            else:
                try:
                    d = displacements(orig, evaluated)
                except Exception as exc:
                    error_rows(ai, pointwise, exc)
                else:
                    for k in pointwise:
                        if cfg.metrics[k] == "average_error":
                            value = float(d.mean()) if len(d) else None
                            out.append((ai, k, None, value, UNITS["average_error"]))
                        else:
                            curve = usefulness_from_displacements(d, cfg.alphas)
                            for a, delta in zip(curve.alphas, curve.deltas):
                                v = None if math.isnan(delta) else delta
                                out.append((ai, k, a, v, UNITS["usefulness"]))

        if poi_based:
            try:
                if attacked_pois is None:
                    attacked_pois = atk.extract_pois(evaluated, cfg.poi_max_diameter, cfg.poi_min_dwell)
                rep = poi_report(_orig_pois(vi, ui), attacked_pois)
            except Exception as exc:
                error_rows(ai, poi_based, exc)
            else:
                for k in poi_based:
                    if cfg.metrics[k] == "poi_recall":
                        out.append((ai, k, None, rep.recall, UNITS["poi_recall"]))
                    else:
                        out.append((ai, k, None, rep.mean_matched_distance, UNITS["poi_distance"]))
    return out


def _tasks(config: ExperimentConfig, variants: list[Variant]) -> list[tuple[int, int, int, int]]:
    return [
        (vi, mi, ei, ui)
        for vi, v in enumerate(variants)
        for mi, m in enumerate(config.mechanisms)
        for ei in range(len(m.epsilons))
        for ui in range(len(v.data.traces))
    ]


def _aggregate(values: list[float | None]) -> float | None:
    nums = [v for v in values if v is not None and not math.isnan(v)]
    if not nums:
        return None
    return float(np.mean(nums))


def run(config: ExperimentConfig, jobs: int | None = None) -> list[ResultRow]:
    """Evaluate every cell and return per-user and AGGREGATE rows in canonical order.

    AGGREGATE values are unweighted means over users with a defined value;
    usefulness curves are averaged point by point.
    """
    jobs = jobs or config.jobs
    variants = build_variants(config)
    graphs = load_graphs(config)
    tasks = _tasks(config, variants)

    if jobs <= 1 or len(tasks) <= 1:
        _init_worker(config, variants, graphs)
        results = [_evaluate_user(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (jobs * 8))
        with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(config, variants, graphs)) as ex:
            results = list(ex.map(_evaluate_user, tasks, chunksize=chunk))

    keyed: list[tuple[tuple, ResultRow]] = []
    groups: dict[tuple, list] = {}
    for (vi, mi, ei, ui), rows in zip(tasks, results):
        v = variants[vi]
        mech = config.mechanisms[mi]
        uid = v.data.traces[ui].user_id
        seed = derive_seed(config.master_seed, uid, mech.name, ei)
        for ai, k, alpha, value, unit in rows:
            row = ResultRow(
                v.dataset, v.subsample, uid, mech.name, mech.epsilons[ei],
                config.attacks[ai].name, config.metrics[k], alpha, value, unit, seed,
            )
            cell = (vi, mi, ei, ai, k, -1.0 if alpha is None else alpha)
            keyed.append(((*cell, 1, ui), row))
            groups.setdefault(cell, []).append(row)

    for cell, rows in groups.items():
        first = rows[0]
        value = _aggregate([r.value for r in rows])
        units = [r.unit for r in rows if not r.unit.startswith("error:")]
        unit = units[0] if units else rows[0].unit
        agg = ResultRow(
            first.dataset, first.subsample, AGGREGATE, first.mechanism, first.epsilon,
            first.attack, first.metric, first.alpha, value, unit, config.master_seed,
        )
        keyed.append(((*cell, 0, -1), agg))

    keyed.sort(key=lambda kr: kr[0])
    return [row for _, row in keyed]
