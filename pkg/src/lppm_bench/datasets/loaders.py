"""Readers for the public mobility datasets and the canonical CSV format.

Supported sources:

* Geolife ``.plt`` files (6 header lines, then
  ``lat,lon,0,altitude_feet,days_since_1899,YYYY-MM-DD,HH:MM:SS`` in GMT).
  Files are grouped by the user directory that contains ``Trajectory/``.
* San Francisco cabs, one ``lat lon occupancy unix_time`` file per cab in
  reverse-chronological order. Files starting with ``_`` are ignored.
* SNAP check-ins (Brightkite, Gowalla):
  ``user<TAB>ISO8601<TAB>lat<TAB>lon<TAB>location_id``.
* Canonical CSV ``user_id,unix_time,lat,lon`` written by :func:`save_csv`.
"""

from __future__ import annotations

import csv
import logging
import math
from collections import defaultdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from ..errors import MissingDirectory, ParseError
from .model import Dataset, Provenance, Trace

log = logging.getLogger(__name__)

GEOLIFE_HEADER_LINES = 6
CSV_HEADER = ("user_id", "unix_time", "lat", "lon")


def _parse_latlon(lat_s: str, lon_s: str, path, line: int) -> tuple[float, float]:
    try:
        lat = float(lat_s)
        lon = float(lon_s)
    except ValueError:
        raise ParseError(f"invalid coordinate {lat_s!r}, {lon_s!r}", path, line) from None
    if not (math.isfinite(lat) and math.isfinite(lon)):
        raise ParseError(f"non-finite coordinate {lat_s!r}, {lon_s!r}", path, line)
    if not -90.0 <= lat <= 90.0:
        raise ParseError(f"latitude {lat} out of range", path, line)
    if not -180.0 <= lon <= 180.0:
        raise ParseError(f"longitude {lon} out of range", path, line)
    return lat, lon


def _parse_iso(text: str, path, line: int) -> int:
    s = text.strip()
    if s.endswith("Z"):
        s = s[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(s)
    except ValueError:
        raise ParseError(f"invalid timestamp {text!r}", path, line) from None
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def _build_trace(user_id: str, t, lat, lon, occupancy=None) -> Trace:
    t = np.asarray(t, dtype=np.int64)
    order = np.argsort(t, kind="stable")
    occ = None if occupancy is None else np.asarray(occupancy, dtype=np.int64)[order]
    return Trace(user_id, t[order], np.asarray(lat)[order], np.asarray(lon)[order], occ)


def _require_dir(root) -> Path:
    root = Path(root)
    if not root.is_dir():
        raise MissingDirectory(f"no such directory: {root}")
    return root


def _geolife_user(plt: Path, root: Path) -> str:
    parent = plt.parent
    if parent.name.lower() == "trajectory" and parent.parent != root.parent:
        return parent.parent.name
    return parent.name if parent != root else plt.stem


def read_plt(path) -> tuple[list[int], list[float], list[float]]:
    """Parse one Geolife ``.plt`` file into (t, lat, lon) columns."""
    path = Path(path)
    ts: list[int] = []
    lats: list[float] = []
    lons: list[float] = []
    with path.open("r", encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if lineno <= GEOLIFE_HEADER_LINES:
                continue
            row = raw.strip()
            if not row:
                continue
            fields = row.split(",")
            if len(fields) < 7:
                raise ParseError(f"expected 7 fields, got {len(fields)}", path, lineno)
            lat, lon = _parse_latlon(fields[0], fields[1], path, lineno)
            try:
                dt = datetime.fromisoformat(f"{fields[5].strip()}T{fields[6].strip()}")
            except ValueError:
                raise ParseError(f"invalid date/time {fields[5]!r} {fields[6]!r}", path, lineno) from None
            ts.append(int(dt.replace(tzinfo=timezone.utc).timestamp()))
            lats.append(lat)
            lons.append(lon)
    return ts, lats, lons


def load_geolife(root_path, name: str = "geolife") -> Dataset:
    root = _require_dir(root_path)
    columns: dict[str, tuple[list, list, list]] = defaultdict(lambda: ([], [], []))
    for plt in sorted(root.rglob("*.plt")):
        t, lat, lon = read_plt(plt)
        cols = columns[_geolife_user(plt, root)]
        cols[0].extend(t)
        cols[1].extend(lat)
        cols[2].extend(lon)
    traces = [_build_trace(uid, *columns[uid]) for uid in sorted(columns)]
    return Dataset(name, tuple(traces), Provenance("geolife"))


def _cab_id(path: Path) -> str:
    stem = path.stem
    return stem[4:] if stem.startswith("new_") else stem


def read_cab_file(path) -> tuple[list[int], list[float], list[float], list[int]]:
    path = Path(path)
    ts, lats, lons, occ = [], [], [], []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            fields = raw.split()
            if not fields:
                continue
            if len(fields) != 4:
                raise ParseError(f"expected 4 fields, got {len(fields)}", path, lineno)
            lat, lon = _parse_latlon(fields[0], fields[1], path, lineno)
            try:
                o = int(fields[2])
                t = int(fields[3])
            except ValueError:
                raise ParseError(f"non-integer occupancy/time {fields[2]!r} {fields[3]!r}", path, lineno) from None
            ts.append(t)
            lats.append(lat)
            lons.append(lon)
            occ.append(o)
    return ts, lats, lons, occ


def load_sf_cabs(root_path, name: str = "sf_cabs") -> Dataset:
    root = _require_dir(root_path)
    traces = []
    for path in sorted(root.glob("*.txt")):
        if path.name.startswith("_"):
            continue
        t, lat, lon, occ = read_cab_file(path)
        traces.append(_build_trace(_cab_id(path), t, lat, lon, occ))
    return Dataset(name, tuple(traces), Provenance("sf_cabs"))


def load_checkins(path, name: str | None = None) -> Dataset:
    """Load a SNAP check-in file. Rows with empty fields are skipped and counted."""
    path = Path(path)
    columns: dict[str, tuple[list, list, list]] = {}
    skipped = 0
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) < 4 or any(not f.strip() for f in fields[:4]):
                skipped += 1
                continue
            user = fields[0].strip()
            t = _parse_iso(fields[1], path, lineno)
            lat, lon = _parse_latlon(fields[2], fields[3], path, lineno)
            cols = columns.setdefault(user, ([], [], []))
            cols[0].append(t)
            cols[1].append(lat)
            cols[2].append(lon)
    if skipped:
        log.warning("%s: skipped %d rows with missing fields", path, skipped)
    traces = [_build_trace(uid, *cols) for uid, cols in columns.items()]
    prov = Provenance("checkins", (f"skipped_rows={skipped}",) if skipped else ())
    return Dataset(name or path.stem, tuple(traces), prov)


def save_csv(ds: Dataset, path) -> None:
    """Write ``ds`` in the canonical interchange format (7-decimal degrees)."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for tr in ds.traces:
            for t, lat, lon in zip(tr.t.tolist(), tr.lat.tolist(), tr.lon.tolist()):
                w.writerow((tr.user_id, t, f"{lat:.7f}", f"{lon:.7f}"))


def load_csv(path, name: str | None = None) -> Dataset:
    path = Path(path)
    columns: dict[str, tuple[list, list, list]] = {}
    with path.open("r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return Dataset(name or path.stem, (), Provenance("csv"))
        if tuple(h.strip() for h in header) != CSV_HEADER:
            raise ParseError(f"expected header {','.join(CSV_HEADER)}", path, 1)
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(f"expected 4 fields, got {len(row)}", path, lineno)
            try:
                t = int(row[1])
            except ValueError:
                raise ParseError(f"invalid unix_time {row[1]!r}", path, lineno) from None
            lat, lon = _parse_latlon(row[2], row[3], path, lineno)
            cols = columns.setdefault(row[0], ([], [], []))
            cols[0].append(t)
            cols[1].append(lat)
            cols[2].append(lon)
    traces = [_build_trace(uid, *cols) for uid, cols in columns.items()]
    return Dataset(name or path.stem, tuple(traces), Provenance("csv"))


LOADERS = {
    "geolife": load_geolife,
    "sf_cabs": load_sf_cabs,
    "checkins": load_checkins,
    "csv": load_csv,
}


def load(fmt: str, path, name: str | None = None) -> Dataset:
    try:
        loader = LOADERS[fmt]
    except KeyError:
        raise ValueError(f"unknown dataset format {fmt!r}; expected one of {sorted(LOADERS)}") from None
    return loader(path, name) if name else loader(path)
