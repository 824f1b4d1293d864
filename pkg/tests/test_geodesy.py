import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from geomod import (DecayKernel, DegenerateCentroidError, DomainError, GeoCoord, GeoGraph, centroid,
                    decay, distance_matrix, haversine_km)
from geomod.geodesy import haversine_matrix

lats = st.floats(-90, 90, allow_nan=False)
lons = st.floats(-180, 180, allow_nan=False)
coords = st.builds(GeoCoord, lats, lons)


def test_haversine_identity():
    p = GeoCoord(37.7, -122.4)
    assert haversine_km(p, p) == 0.0


def test_haversine_quarter_circle():
    assert haversine_km(GeoCoord(0, 0), GeoCoord(0, 90)) == pytest.approx(10007.543, abs=0.01)
    assert math.pi / 2 * 6371 == pytest.approx(10007.543, abs=0.01)


def test_haversine_half_circle_is_additive():
    q = haversine_km(GeoCoord(0, 0), GeoCoord(0, 90))
    assert haversine_km(GeoCoord(0, 0), GeoCoord(0, 180)) == pytest.approx(2 * q, abs=0.01)


def test_decay_values():
    k = DecayKernel.exponential(100)
    assert decay(k, 0) == 1.0
    assert decay(k, 100) == pytest.approx(1 / math.e)
    assert decay(DecayKernel.constant(), 5000) == 1.0


def test_decay_domain():
    with pytest.raises(DomainError):
        decay(DecayKernel.exponential(100), -1.0)
    with pytest.raises(DomainError):
        DecayKernel.exponential(0)
    with pytest.raises(DomainError):
        DecayKernel.exponential(float("inf"))


def test_decay_array():
    out = decay(DecayKernel.exponential(10), np.array([0.0, 10.0, 20.0]))
    assert np.allclose(out, [1, math.exp(-1), math.exp(-4)])


@given(st.floats(0, 1e4), st.floats(0, 1e4), st.floats(1e-3, 1e4), st.floats(1e-3, 1e4))
def test_decay_monotone(x1, x2, s1, s2):
    lo, hi = sorted((x1, x2))
    k = DecayKernel.exponential(s1)
    assert decay(k, lo) >= decay(k, hi)
    assert 0.0 <= decay(k, hi) <= 1.0
    slo, shi = sorted((s1, s2))
    assert decay(DecayKernel.exponential(slo), x1) <= decay(DecayKernel.exponential(shi), x1)


@given(st.floats(0, 20000))
def test_decay_large_sigma_tends_to_constant(x):
    assert decay(DecayKernel.exponential(1e9), x) == pytest.approx(1.0, abs=1e-6)


@given(coords, coords, coords)
def test_triangle_inequality(a, b, c):
    assert haversine_km(a, c) <= haversine_km(a, b) + haversine_km(b, c) + 1e-6


@given(coords, coords)
def test_haversine_symmetric_and_bounded(a, b):
    d = haversine_km(a, b)
    assert d == haversine_km(b, a)
    assert 0 <= d <= math.pi * 6371 + 1e-6


def test_centroid_examples():
    p = GeoCoord(12.5, -40.25)
    c = centroid([p])
    assert c.lat == pytest.approx(p.lat, abs=1e-12) and c.lon == pytest.approx(p.lon, abs=1e-12)
    mid = centroid([GeoCoord(0, 10), GeoCoord(0, 20)])
    assert mid.lat == pytest.approx(0, abs=1e-6) and mid.lon == pytest.approx(15, abs=1e-6)
    w = centroid([GeoCoord(0, 0), GeoCoord(0, 90)], [3, 1])
    assert w.lat == pytest.approx(0, abs=1e-12)
    assert 0 < w.lon < 45
    assert w.lon == pytest.approx(math.degrees(math.atan(1 / 3)), abs=1e-9)


def test_centroid_degenerate():
    with pytest.raises(DegenerateCentroidError):
        centroid([GeoCoord(0, 0), GeoCoord(0, 180)])
    with pytest.raises(DomainError):
        centroid([])
    with pytest.raises(DomainError):
        centroid([GeoCoord(0, 0)], [0])


@given(st.lists(st.tuples(coords, st.integers(1, 5)), min_size=1, max_size=8), st.randoms())
def test_centroid_permutation_invariant(items, rnd):
    pts, mult = zip(*items)
    try:
        a = centroid(pts, mult)
    except DegenerateCentroidError:
        return
    shuffled = list(items)
    rnd.shuffle(shuffled)
    b = centroid([p for p, _ in shuffled], [k for _, k in shuffled])
    assert a == b


@given(st.lists(coords, min_size=1, max_size=6), st.integers(1, 4))
def test_centroid_multiplicity_equals_repetition(pts, k):
    try:
        a = centroid(pts, [k] * len(pts))
    except DegenerateCentroidError:
        return
    b = centroid(pts * k)
    assert haversine_km(a, b) < 1e-6


def test_distance_matrix_examples():
    one = distance_matrix(GeoGraph({5: GeoCoord(1, 2)}))
    assert one.values.shape == (1, 1) and one.values[0, 0] == 0.0
    g = GeoGraph({0: GeoCoord(0, 0), 1: GeoCoord(0, 90), 2: GeoCoord(0, 180)}, {(0, 1): 1.0})
    dm = distance_matrix(g)
    for u in g.node_ids:
        for v in g.node_ids:
            assert dm(u, v) == pytest.approx(haversine_km(g.coord(u), g.coord(v)), abs=1e-9)
    assert np.array_equal(dm.values, dm.values.T)
    with pytest.raises(ValueError):
        dm.values[0, 1] = 3.0  # read-only


@given(st.lists(coords, min_size=1, max_size=10))
def test_matrix_symmetric_zero_diagonal(pts):
    lat = np.array([p.lat for p in pts])
    lon = np.array([p.lon for p in pts])
    d = haversine_matrix(lat, lon)
    assert np.array_equal(d, d.T)
    assert np.all(np.diag(d) == 0)
    assume(len(pts) > 1)
    assert d[0, 1] == pytest.approx(haversine_km(pts[0], pts[1]), abs=1e-6)
