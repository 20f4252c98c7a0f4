"""CSV and SVG emission for result rows."""

from __future__ import annotations

import csv
import re
from pathlib import Path
from typing import Iterable
from xml.sax.saxutils import escape

from ..metrics import USE_CASE_ALPHAS_M
from .runner import AGGREGATE, ResultRow

CSV_HEADER = ("dataset", "subsample", "user", "mechanism", "epsilon", "attack", "metric", "alpha", "value", "unit", "seed")


def _num(x: float | None) -> str:
    if x is None:
        return ""
    return repr(float(x))


def _alpha(x: float | None) -> str:
    return "" if x is None else f"{x:g}"


def row_fields(r: ResultRow) -> tuple[str, ...]:
    return (
        r.dataset,
        r.subsample,
        r.user,
        r.mechanism,
        _num(r.epsilon),
        r.attack,
        r.metric,
        _alpha(r.alpha),
        _num(r.value),
        r.unit,
        str(r.seed),
    )


def emit_csv(rows: Iterable[ResultRow], path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow(row_fields(r))
    return path


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", text).strip("_") or "x"


def plot_series(rows: Iterable[ResultRow]) -> dict[tuple[str, str, str, str], dict[str, list[tuple[float, float]]]]:
    """Group AGGREGATE rows into {(dataset, subsample, attack, metric): {mechanism: [(eps, value)]}}.

    Usefulness is plotted at the use-case alphas only, as ``usefulness@<alpha>``.
    """
    plots: dict = {}
    for r in rows:
        if r.user != AGGREGATE or r.value is None or r.epsilon is None:
            continue
        metric = r.metric
        if r.alpha is not None:
            if r.alpha not in USE_CASE_ALPHAS_M:
                continue
            metric = f"{r.metric}@{r.alpha:g}m"
        key = (r.dataset, r.subsample, r.attack, metric)
        plots.setdefault(key, {}).setdefault(r.mechanism, []).append((r.epsilon, r.value))
    for series in plots.values():
        for pts in series.values():
            pts.sort()
    return plots


PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def render_svg(title: str, series: dict[str, list[tuple[float, float]]], x_label: str = "epsilon (1/m)") -> str:
    width, height = 640, 400
    left, right, top, bottom = 70, 150, 40, 50
    pw = width - left - right
    ph = height - top - bottom
    xs = [x for pts in series.values() for x, _ in pts]
    ys = [y for pts in series.values() for _, y in pts]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(0.0, min(ys)), max(ys)
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(x: float) -> float:
        return left + (x - x0) / (x1 - x0) * pw

    def sy(y: float) -> float:
        return top + ph - (y - y0) / (y1 - y0) * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="22" text-anchor="middle" font-family="sans-serif" font-size="14">{escape(title)}</text>',
        f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
        f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle" font-family="sans-serif" font-size="12">{escape(x_label)}</text>',
    ]
    for frac in (0.0, 0.5, 1.0):
        xv = x0 + frac * (x1 - x0)
        yv = y0 + frac * (y1 - y0)
        parts.append(
            f'<text x="{sx(xv):.1f}" y="{top + ph + 16}" text-anchor="middle" font-family="sans-serif" font-size="10">{xv:.4g}</text>'
        )
        parts.append(
            f'<text x="{left - 6}" y="{sy(yv) + 4:.1f}" text-anchor="end" font-family="sans-serif" font-size="10">{yv:.4g}</text>'
        )
    for i, (name, pts) in enumerate(series.items()):
        color = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"><title>{escape(name)}</title></polyline>')
        ly = top + 14 + 18 * i
        parts.append(f'<rect x="{left + pw + 12}" y="{ly - 8}" width="12" height="4" fill="{color}"/>')
        parts.append(f'<text x="{left + pw + 30}" y="{ly}" font-family="sans-serif" font-size="11">{escape(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plots(rows: Iterable[ResultRow], directory) -> list[Path]:
    """One SVG per (dataset variant, attack, metric) with one polyline per mechanism."""
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to plot")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for (dataset, subsample, attack, metric), series in sorted(plot_series(rows).items()):
        title = f"{dataset}{' [' + subsample + ']' if subsample else ''} / {attack} / {metric}"
        name = "_".join(_slug(p) for p in (dataset, subsample, attack, metric) if p) + ".svg"
        path = directory / name
        path.write_text(render_svg(title, series), encoding="utf-8")
        written.append(path)
    return written
