import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from geomod import (DecayKernel, DomainError, GeoCoord, GeoGraph, Partition, UndefinedScoreError,
                    build_null_model, community_quality, distance_matrix, distance_modularity, gain,
                    ng_modularity, p_hat, p_sym, rank_communities)
from geomod.oracle import naive_score

from graphs import TRIANGLES, random_graph, random_partition, single_edge, two_triangles

CONST = DecayKernel.constant()
seeds = st.integers(0, 2**32 - 1)


def sigma_apart(sigma=100.0):
    # two nodes on the equator exactly sigma km apart
    return single_edge(0.0, math.degrees(sigma / 6371.0))


# -- NG modularity ------------------------------------------------------------

def test_whole_partition_scores_zero():
    g = two_triangles(bridge=True)
    assert ng_modularity(g, Partition.whole(g.node_ids)) == 0.0
    t = build_null_model(g, None, DecayKernel.exponential(50))
    assert distance_modularity(g, Partition.whole(g.node_ids), t) == pytest.approx(0.0, abs=1e-15)


def test_bridge_of_triangles():
    g = two_triangles(bridge=True)
    assert ng_modularity(g, TRIANGLES) == pytest.approx(5 / 14, abs=1e-12)
    assert 2 * (3 / 7 - (7 / 14) ** 2) == pytest.approx(5 / 14, abs=1e-15)


def test_singletons_single_edge():
    g = single_edge()
    assert ng_modularity(g, Partition.singletons(g.node_ids)) == pytest.approx(-0.5, abs=1e-15)


def test_disjoint_triangles():
    assert ng_modularity(two_triangles(), TRIANGLES) == pytest.approx(0.5, abs=1e-12)


def test_undefined_and_mismatch():
    g = GeoGraph({0: GeoCoord(0, 0)})
    with pytest.raises(UndefinedScoreError):
        ng_modularity(g, Partition.whole([0]))
    with pytest.raises(UndefinedScoreError):
        build_null_model(g, None, CONST)
    h = two_triangles()
    with pytest.raises(Exception):
        ng_modularity(h, Partition.whole([0, 1]))


# -- null model ---------------------------------------------------------------

def test_constant_kernel_denominator_is_2m():
    g = two_triangles(bridge=True)
    t = build_null_model(g, distance_matrix(g), CONST)
    assert np.allclose(t.denominators, 2 * g.m)


def test_two_node_denominator_and_p_hat():
    g = sigma_apart(100.0)
    t = build_null_model(g, None, DecayKernel.exponential(100))
    assert t.denominators[0] == pytest.approx(1 + math.exp(-1), rel=1e-12)
    assert p_hat(t, 0, 1) == pytest.approx(math.exp(-1) / (1 + math.exp(-1)), rel=1e-12)
    assert p_hat(t, 0, 1) == pytest.approx(0.2689, abs=1e-4)
    # symmetric case: both directions agree
    assert p_sym(t, 0, 1) == pytest.approx(p_hat(t, 1, 0), rel=1e-12)


def test_isolated_node_denominator_positive():
    g = GeoGraph({0: GeoCoord(0, 0), 1: GeoCoord(0, 1), 2: GeoCoord(0, 2)}, {(0, 1): 1.0})
    t = build_null_model(g, None, DecayKernel.exponential(100))
    assert t.denominators[2] > 0
    assert p_hat(t, 2, 0) == 0.0 and p_hat(t, 2, 2) == 0.0


def test_constant_kernel_reduces_to_ng_null():
    g = random_graph(np.random.default_rng(4), 7)
    t = build_null_model(g, None, CONST)
    for i in g.node_ids:
        for j in g.node_ids:
            expect = g.degree(i) * g.degree(j) / (2 * g.m)
            assert p_hat(t, i, j) == pytest.approx(expect, rel=1e-12)
            assert p_sym(t, i, j) == pytest.approx(expect, rel=1e-12)


def test_three_node_line_p_sym_by_hand():
    # 0 -- 1 -- 2 on the equator, 100 km spacing; k = (1, 2, 1)
    step = math.degrees(100 / 6371.0)
    g = GeoGraph({i: GeoCoord(0, i * step) for i in range(3)}, {(0, 1): 1.0, (1, 2): 1.0})
    t = build_null_model(g, None, DecayKernel.exponential(100))
    e1, e4 = math.exp(-1), math.exp(-4)
    d0 = 1 + 2 * e1 + e4
    d1 = e1 + 2 + e1
    hat01 = 1 * 2 * e1 / d0
    hat10 = 2 * 1 * e1 / d1
    assert p_hat(t, 0, 1) == pytest.approx(hat01, rel=1e-12)
    assert p_hat(t, 1, 0) == pytest.approx(hat10, rel=1e-12)
    assert hat01 != pytest.approx(hat10)
    assert p_sym(t, 0, 1) == pytest.approx((hat01 + hat10) / 2, rel=1e-12)


@given(seeds, st.integers(1, 8))
def test_p_sym_exactly_symmetric(seed, n):
    g = random_graph(np.random.default_rng(seed), n)
    t = build_null_model(g, None, DecayKernel.exponential(150))
    pm = t.matrix()
    assert np.array_equal(pm, pm.T)
    for i in g.node_ids:
        for j in g.node_ids:
            assert p_sym(t, i, j) == p_sym(t, j, i)


# -- distance modularity ------------------------------------------------------

def test_colocated_equals_ng():
    g = two_triangles(bridge=True, colocated=True)
    t = build_null_model(g, None, DecayKernel.exponential(10))
    for p in (TRIANGLES, Partition.singletons(g.node_ids), Partition.whole(g.node_ids)):
        assert distance_modularity(g, p, t) == pytest.approx(ng_modularity(g, p), abs=1e-12)


def test_six_node_matches_direct_evaluation():
    g = random_graph(np.random.default_rng(11), 6, box_km=300)
    k = DecayKernel.exponential(100)
    t = build_null_model(g, None, k)
    for p in (TRIANGLES, Partition.singletons(g.node_ids), Partition({u: u % 2 for u in range(6)})):
        direct = naive_score(g, p.labels(g.node_ids), k)
        assert distance_modularity(g, p, t) == pytest.approx(direct, abs=1e-10)


def test_table_must_match_graph():
    g = two_triangles()
    t = build_null_model(two_triangles(bridge=True).subgraph([0, 1, 2]), None, CONST)
    with pytest.raises(DomainError):
        distance_modularity(g, TRIANGLES, t)


@given(seeds, st.integers(1, 9), st.booleans())
def test_reduction_invariant(seed, n, loops):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, loops=loops)
    p = random_partition(rng, g.node_ids)
    t = build_null_model(g, None, CONST)
    assert abs(distance_modularity(g, p, t) - ng_modularity(g, p)) < 1e-12


@given(seeds, st.integers(1, 9), st.sampled_from([30.0, 100.0, 500.0]))
def test_range_and_label_invariance(seed, n, sigma):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, loops=True)
    p = random_partition(rng, g.node_ids)
    q = ng_modularity(g, p)
    assert -1.0 <= q <= 1.0
    t = build_null_model(g, None, DecayKernel.exponential(sigma))
    d = distance_modularity(g, p, t)
    assert math.isfinite(d)
    shift = {c: 1000 - 7 * c for c in p.communities}
    r = p.relabel(shift)
    assert ng_modularity(g, r) == pytest.approx(q, abs=1e-14)
    assert distance_modularity(g, r, t) == pytest.approx(d, abs=1e-14)


# -- gain ---------------------------------------------------------------------

def test_gain_no_neighbours_constant_kernel():
    g = two_triangles()
    t = build_null_model(g, None, CONST)
    p = Partition({0: 9, 1: 1, 2: 1, 3: 0, 4: 0, 5: 0})
    kc = sum(g.degree(j) for j in (3, 4, 5))
    assert gain(t, g, 0, 0, p) == pytest.approx(-g.degree(0) * kc / (2 * g.m), rel=1e-12)


def test_gain_single_edge():
    g = single_edge()
    t = build_null_model(g, None, CONST)
    assert gain(t, g, 0, 1, Partition.singletons([0, 1])) == pytest.approx(0.5, rel=1e-12)


def test_gain_rejects_own_community():
    g = single_edge()
    t = build_null_model(g, None, CONST)
    with pytest.raises(DomainError):
        gain(t, g, 0, 0, Partition.whole([0, 1]))


@given(seeds, st.integers(2, 9), st.sampled_from(["const", 50.0, 200.0]))
def test_gain_matches_full_rescore(seed, n, sigma):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n, loops=True)
    k = CONST if sigma == "const" else DecayKernel.exponential(sigma)
    t = build_null_model(g, None, k)
    p = random_partition(rng, g.node_ids)
    i = int(rng.integers(n))
    alone = p.with_move(i, max(p.communities) + 1)
    targets = [c for c in alone.communities if i not in alone.members(c)]
    c = targets[int(rng.integers(len(targets)))]
    before = distance_modularity(g, alone, t)
    after = distance_modularity(g, alone.with_move(i, c), t)
    assert after - before == pytest.approx(2 * gain(t, g, i, c, alone) / (2 * g.m), abs=1e-10)


# -- community quality --------------------------------------------------------

def test_singleton_quality():
    g = single_edge(0, 1)
    t = build_null_model(g, None, DecayKernel.exponential(100))
    s = community_quality(g, Partition.singletons([0, 1]), t, 0)
    assert s.quality == pytest.approx(-p_sym(t, 0, 0) / 2, rel=1e-12)
    assert s.quality < 0 and s.size == 1


def test_isolated_triangle_quality():
    # a triangle plus a sparse path of 10 other nodes
    coords = {i: GeoCoord(0, i * 0.1) for i in range(13)}
    edges = {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 1.0}
    edges.update({(i, i + 1): 1.0 for i in range(3, 12)})
    g = GeoGraph(coords, edges)
    t = build_null_model(g, None, CONST)
    p = Partition({u: 0 if u < 3 else 1 for u in g.node_ids})
    null = sum(p_sym(t, i, j) for i in range(3) for j in range(3))
    s = community_quality(g, p, t, 0)
    assert s.quality == pytest.approx((6 - null) / 6, rel=1e-12)
    assert s.quality > 0


def test_ranking_ties_and_relabel():
    g = two_triangles()
    t = build_null_model(g, None, CONST)
    ranked = rank_communities(g, TRIANGLES, t)
    assert [s.community for s in ranked] == [0, 1]
    assert ranked[0].quality == pytest.approx(ranked[1].quality, abs=1e-15)
    flipped = rank_communities(g, TRIANGLES.relabel({0: 5, 1: 3}), t)
    assert [s.community for s in flipped] == [3, 5]
    one = rank_communities(g, Partition.whole(g.node_ids), t)
    assert len(one) == 1


@given(seeds, st.integers(2, 9))
def test_ranking_label_independent(seed, n):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, n)
    p = random_partition(rng, g.node_ids)
    t = build_null_model(g, None, DecayKernel.exponential(100))
    mapping = {c: 100 + i for i, c in enumerate(reversed(sorted(p.communities)))}
    a = rank_communities(g, p, t)
    b = rank_communities(g, p.relabel(mapping), t)
    qa = sorted((round(s.quality, 12), sorted(p.members(s.community))) for s in a)
    qb = sorted((round(s.quality, 12), sorted(p.relabel(mapping).members(s.community))) for s in b)
    assert qa == qb
