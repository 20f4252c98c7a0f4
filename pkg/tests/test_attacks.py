import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from lppm_bench.attacks import Poi, RoadGraph, extract_pois, map_match, match_pois, sliding_average
from lppm_bench.datasets import Trace
from lppm_bench.datasets.synthetic import DEFAULT_HOME, line_trace, point_at, random_walk_trace
from lppm_bench.errors import EmptyGraph
from lppm_bench.geo import GeoPoint


def trace(points, dt=60):
    return Trace("u", np.arange(len(points)) * dt, [p.lat for p in points], [p.lon for p in points])


def stays(episodes, dt=600):
    """Concatenate (center, n_points, jitter_m) episodes sampled every ``dt`` seconds."""
    rng = np.random.default_rng(0)
    pts = []
    for center, n, jitter in episodes:
        pts += [point_at(center, *rng.uniform(-jitter, jitter, 2)) for _ in range(n)]
    return trace(pts, dt)


# --- sliding average ----------------------------------------------------------


def test_sliding_average_constant_and_collinear():
    still = trace([DEFAULT_HOME] * 6)
    assert sliding_average(still, 2) == still
    line = line_trace(n=11, step_m=50.0)
    out = sliding_average(line, 2)
    interior = slice(2, 9)
    assert np.allclose(out.lat[interior], line.lat[interior], atol=1e-9)
    assert np.allclose(out.lon[interior], line.lon[interior], atol=1e-9)
    assert np.array_equal(out.t, line.t)
    with pytest.raises(ValueError):
        sliding_average(line, 0)


def test_sliding_average_zigzag_hand_table():
    # zigzag in degrees at the equator: the centroid is the plain mean of the window
    lat = [0.0, 0.001, 0.0, 0.001, 0.0]
    lon = [0.0, 0.001, 0.002, 0.003, 0.004]
    out = sliding_average(Trace("z", range(5), lat, lon), 1)
    expected = [(0.0005, 0.0005), (1 / 3000, 0.001), (2 / 3000, 0.002), (1 / 3000, 0.003), (0.0005, 0.0035)]
    for got, want in zip(zip(out.lat, out.lon), expected):
        assert got == pytest.approx(want, abs=1e-12)


def test_sliding_average_contracts_bounding_box():
    tr = random_walk_trace(np.random.default_rng(8), 200)
    out = sliding_average(tr, 3)
    assert out.lat.min() >= tr.lat.min() - 1e-12 and out.lat.max() <= tr.lat.max() + 1e-12
    assert out.lon.min() >= tr.lon.min() - 1e-12 and out.lon.max() <= tr.lon.max() + 1e-12


# --- POI extraction -----------------------------------------------------------


def test_single_stay_is_one_poi():
    tr = stays([(DEFAULT_HOME, 13, 17.0)])  # 13 points * 600 s = 2 h, within 50 m
    (poi,) = extract_pois(tr)
    assert poi.n_points == 13
    assert poi.dwell == 7200
    assert poi.centroid.lat == pytest.approx(tr.lat.mean(), abs=1e-12)
    assert poi.centroid.lon == pytest.approx(tr.lon.mean(), abs=1e-12)


def test_constant_speed_has_no_poi():
    assert extract_pois(line_trace(n=2000, step_m=10.0, step_s=1)) == []


def test_two_stays_separated_by_hop():
    far = point_at(DEFAULT_HOME, 5000.0, 0.0)
    tr = stays([(DEFAULT_HOME, 10, 20.0), (far, 10, 20.0)])  # 90 min each
    pois = extract_pois(tr)
    assert [p.n_points for p in pois] == [10, 10]
    assert pois[0].t_end < pois[1].t_start


def test_dwell_is_inclusive():
    tr = stays([(DEFAULT_HOME, 7, 5.0)])  # exactly 3600 s
    assert len(extract_pois(tr)) == 1
    assert extract_pois(tr, min_dwell=3601) == []


def _as_tuple(p: Poi):
    return (p.centroid.lat, p.centroid.lon, p.t_start, p.t_end, p.n_points)


def _poi_instance(rng):
    n = int(rng.integers(1, 201))
    tr = random_walk_trace(rng, n, step_m=float(rng.choice([30.0, 80.0, 200.0])), stay_prob=0.6, max_dt=900)
    return tr


@pytest.mark.parametrize("seed", range(100))
def test_extract_pois_matches_reference(seed):
    tr = _poi_instance(np.random.default_rng(seed))
    got = [_as_tuple(p) for p in extract_pois(tr)]
    want = oracles.extract_pois_ref(tr.t.tolist(), tr.lat.tolist(), tr.lon.tolist())
    assert len(got) == len(want)
    for g, w in zip(got, want):
        assert g[2:] == w[2:]
        assert g[:2] == pytest.approx(w[:2], abs=1e-9)
    for a, b in zip(got, got[1:]):
        assert a[3] <= b[2]


# --- POI matching -------------------------------------------------------------


def _poi(p: GeoPoint, t=0):
    return Poi(p, t, t + 3600, 5)


def test_match_pois_examples():
    pois = [_poi(point_at(DEFAULT_HOME, 1000.0 * i, 0.0)) for i in range(3)]
    assert match_pois(pois, pois) == [(i, i, 0.0) for i in range(3)]
    a, b = _poi(DEFAULT_HOME), _poi(point_at(DEFAULT_HOME, 1000.0, 0.0))
    (m,) = match_pois([a, b], [_poi(point_at(DEFAULT_HOME, 700.0, 0.0))])
    assert m[:2] == (0, 1)
    assert m[2] == pytest.approx(300.0, rel=1e-3)
    assert match_pois([], [a]) == []
    assert match_pois([a], []) == []


@pytest.mark.parametrize("seed", range(100))
def test_match_pois_matches_reference(seed):
    rng = np.random.default_rng(seed)
    orig = [point_at(DEFAULT_HOME, *rng.uniform(-5000, 5000, 2)) for _ in range(rng.integers(1, 12))]
    att = [point_at(DEFAULT_HOME, *rng.uniform(-5000, 5000, 2)) for _ in range(rng.integers(1, 12))]
    got = match_pois([_poi(p) for p in orig], [_poi(p) for p in att])
    want = oracles.match_pois_ref([(p.lat, p.lon) for p in orig], [(p.lat, p.lon) for p in att])
    assert [g[:2] for g in got] == [w[:2] for w in want]
    assert [g[2] for g in got] == pytest.approx([w[2] for w in want], abs=1e-6)


# --- map matching -------------------------------------------------------------


def test_map_match_on_node_and_ties():
    a = GeoPoint(0.0, 0.001)
    b = GeoPoint(0.0, -0.001)
    g = RoadGraph([(7, a), (3, b), (11, GeoPoint(1.0, 1.0))])
    out = map_match(trace([a, GeoPoint(0.0, 0.0)]), g)
    assert (out.lat[0], out.lon[0]) == (a.lat, a.lon)
    # the origin is equidistant from nodes 7 and 3
    assert (out.lat[1], out.lon[1]) == (b.lat, b.lon)


def test_road_graph_validation(tmp_path):
    with pytest.raises(EmptyGraph):
        RoadGraph([])
    with pytest.raises(ValueError):
        RoadGraph([(1, DEFAULT_HOME), (1, DEFAULT_HOME)])
    path = tmp_path / "nodes.csv"
    path.write_text("node_id,lat,lon\n5,37.0,-122.0\n2,37.1,-122.1\n")
    g = RoadGraph.from_csv(path)
    assert [nid for nid, _ in g.nodes] == [2, 5]


@pytest.mark.parametrize("seed", range(100))
def test_map_match_matches_reference(seed):
    rng = np.random.default_rng(seed)
    nodes = [(int(i), point_at(DEFAULT_HOME, *rng.uniform(-3000, 3000, 2))) for i in rng.permutation(100)]
    g = RoadGraph(nodes)
    tr = random_walk_trace(rng, int(rng.integers(1, 201)), step_m=300.0)
    out = map_match(tr, g)
    by_id = {nid: p for nid, p in nodes}
    flat = [(nid, p.lat, p.lon) for nid, p in nodes]
    for lat, lon, olat, olon in zip(tr.lat, tr.lon, out.lat, out.lon):
        want = by_id[oracles.nearest_node_ref(lat, lon, flat)]
        assert (olat, olon) == (want.lat, want.lon)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_map_match_outputs_are_nodes(seed):
    rng = np.random.default_rng(seed)
    nodes = [(i, GeoPoint(rng.uniform(-80, 80), rng.uniform(-180, 180))) for i in range(20)]
    g = RoadGraph(nodes)
    tr = Trace("q", range(30), rng.uniform(-80, 80, 30), rng.uniform(-180, 180, 30))
    out = map_match(tr, g)
    node_set = {(p.lat, p.lon) for _, p in nodes}
    assert set(zip(out.lat.tolist(), out.lon.tolist())) <= node_set
    assert np.array_equal(out.t, tr.t)


@pytest.mark.parametrize("seed", range(100))
def test_sliding_average_matches_reference(seed):
    rng = np.random.default_rng(seed)
    tr = random_walk_trace(rng, int(rng.integers(1, 201)))
    k = int(rng.integers(1, 5))
    out = sliding_average(tr, k)
    want = oracles.sliding_average_ref(tr.lat.tolist(), tr.lon.tolist(), k)
    assert np.allclose(out.lat, [w[0] for w in want], atol=1e-9, rtol=0)
    assert np.allclose(out.lon, [w[1] for w in want], atol=1e-9, rtol=0)
