"""Command-line entry point: ``lppm-bench <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import attacks as atk
from .datasets import load, parse_rule, preprocess, profile, save_csv
from .datasets.model import Dataset
from .errors import LppmError
from .harness import emit_csv, emit_plots, load_config, run
from .harness.config import OUTPUT_ENV_VAR
from .mechanisms import MECHANISM_KINDS, PRIVACY_LEVELS, SWEEP_EPSILONS, derive_seed, epsilon_noise_table, obfuscate
from .metrics import USE_CASE_ALPHAS_M, average_error, poi_report, usefulness_curve

REFERENCE_EPSILONS = (0.0005, 0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 5.0)


def _common(default=None) -> argparse.ArgumentParser:
    # subcommands use SUPPRESS so flags given before the subcommand are not reset
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=default, help="master seed (default 0, or the config's)")
    p.add_argument("--jobs", type=int, default=default, help="worker processes")
    p.add_argument("--out", default=default, help=f"output file or directory (env {OUTPUT_ENV_VAR} for run)")
    return p


def _dataset_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("path", help="dataset file or directory")
    p.add_argument("--format", default="csv", choices=["geolife", "sf_cabs", "checkins", "csv"])
    p.add_argument("--preprocess", action="append", default=[], metavar="RULE",
                   help="geolife_days[:N], sf_drop_empty, min_points:N (repeatable)")


def _load_dataset(args) -> Dataset:
    ds = load(args.format, args.path)
    for rule in args.preprocess:
        ds = preprocess(ds, parse_rule(rule))
    return ds


def _write_text(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_profile(args) -> int:
    prof = profile(_load_dataset(args))
    _write_text(json.dumps(prof.as_dict(), indent=2) + "\n", args.out)
    return 0


def cmd_epsilon_table(args) -> int:
    eps = args.epsilon or list(REFERENCE_EPSILONS + SWEEP_EPSILONS)
    rows = epsilon_noise_table(eps, args.samples, args.seed or 0)
    lines = ["epsilon,avg_noise_m,max_noise_m"]
    lines += [f"{r.epsilon:.5f},{r.avg_noise:.1f},{r.max_noise:.1f}" for r in rows]
    _write_text("\n".join(lines) + "\n", args.out)
    return 0


def _mechanism_options(args) -> dict:
    opts = {}
    if args.mechanism in ("clustering", "memory_clustering"):
        opts["radius"] = args.radius
    if args.mechanism == "adaptive":
        opts.update(delta1=args.delta1, delta2=args.delta2, ws=args.ws, alpha=args.alpha, beta=args.beta)
    return opts


def cmd_obfuscate(args) -> int:
    ds = _load_dataset(args)
    seed = args.seed or 0
    opts = _mechanism_options(args)
    traces = [
        obfuscate(args.mechanism, tr, args.epsilon, derive_seed(seed, tr.user_id, args.mechanism, 0), **opts)
        for tr in ds.traces
    ]
    out = ds.replace_traces(traces, f"{args.mechanism}(eps={args.epsilon:g})")
    save_csv(out, args.out or "/dev/stdout")
    return 0


def cmd_attack(args) -> int:
    ds = _load_dataset(args)
    if args.attack == "poi_extraction":
        target = open(args.out, "w", newline="") if args.out else sys.stdout
        try:
            w = csv.writer(target, lineterminator="\n")
            w.writerow(("user_id", "lat", "lon", "t_start", "t_end", "n_points"))
            for tr in ds.traces:
                for p in atk.extract_pois(tr, args.max_diameter, args.min_dwell):
                    w.writerow((tr.user_id, f"{p.centroid.lat:.7f}", f"{p.centroid.lon:.7f}", p.t_start, p.t_end, p.n_points))
        finally:
            if args.out:
                target.close()
        return 0
    if args.attack == "sliding_average":
        traces = [atk.sliding_average(tr, args.k) for tr in ds.traces]
    else:
        if not args.graph:
            raise SystemExit("map_matching needs --graph nodes.csv")
        graph = atk.RoadGraph.from_csv(args.graph)
        traces = [atk.map_match(tr, graph) for tr in ds.traces]
    save_csv(ds.replace_traces(traces, args.attack), args.out or "/dev/stdout")
    return 0


def cmd_evaluate(args) -> int:
    orig = {tr.user_id: tr for tr in load(args.orig_format, args.orig)}
    other = {tr.user_id: tr for tr in load(args.other_format, args.other)}
    report = {}
    for uid in sorted(orig.keys() & other.keys()):
        a, b = orig[uid], other[uid]
        entry: dict = {}
        if len(a) == len(b):
            entry["average_error_m"] = average_error(a, b)
            curve = usefulness_curve(a, b, USE_CASE_ALPHAS_M)
            entry["usefulness"] = {f"{al:g}": d for al, d in zip(curve.alphas, curve.deltas)}
        rep = poi_report(atk.extract_pois(a), atk.extract_pois(b))
        entry["poi_recall"] = rep.recall
        entry["poi_distance_m"] = rep.mean_matched_distance
        report[uid] = entry
    _write_text(json.dumps(report, indent=2) + "\n", args.out)
    return 0


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    cfg = cfg.with_overrides(
        master_seed=args.seed,
        jobs=args.jobs,
        output_dir=Path(args.out) if args.out else None,
    )
    rows = run(cfg)
    out_dir = Path(cfg.output_dir)
    path = emit_csv(rows, out_dir / "results.csv")
    n_plots = len(emit_plots(rows, out_dir / "plots")) if rows else 0
    print(f"{len(rows)} rows -> {path}; {n_plots} plots -> {out_dir / 'plots'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lppm-bench", description=__doc__, parents=[_common()])
    common = _common(argparse.SUPPRESS)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", parents=[common], help="median attributes of a dataset")
    _dataset_args(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("epsilon-table", parents=[common], help="average/max noise per epsilon")
    p.add_argument("--epsilon", type=float, action="append", help="epsilon value (repeatable)")
    p.add_argument("--samples", type=int, default=200_000)
    p.set_defaults(func=cmd_epsilon_table)

    p = sub.add_parser("obfuscate", parents=[common], help="obfuscate a dataset, write canonical CSV")
    _dataset_args(p)
    p.add_argument("--mechanism", required=True, choices=MECHANISM_KINDS)
    p.add_argument("--epsilon", type=float, default=PRIVACY_LEVELS["medium"])
    p.add_argument("--radius", type=float, default=200.0)
    p.add_argument("--delta1", type=float, default=693.0)
    p.add_argument("--delta2", type=float, default=1948.0)
    p.add_argument("--ws", type=int, default=5)
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--beta", type=float, default=5.0)
    p.set_defaults(func=cmd_obfuscate)

    p = sub.add_parser("attack", parents=[common], help="run a de-obfuscation attack")
    _dataset_args(p)
    p.add_argument("--attack", required=True, choices=["sliding_average", "poi_extraction", "map_matching"])
    p.add_argument("--k", type=int, default=atk.DEFAULT_WINDOW)
    p.add_argument("--graph", help="road graph CSV (node_id,lat,lon)")
    p.add_argument("--max-diameter", type=float, default=atk.POI_MAX_DIAMETER_M)
    p.add_argument("--min-dwell", type=float, default=atk.POI_MIN_DWELL_S)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("evaluate", parents=[common], help="metrics between two datasets")
    p.add_argument("orig")
    p.add_argument("other")
    p.add_argument("--orig-format", default="csv")
    p.add_argument("--other-format", default="csv")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("run", parents=[common], help="run an experiment config (TOML)")
    p.add_argument("config")
    p.set_defaults(func=cmd_run)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except LppmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
