"""Small graph builders shared by the tests."""

import itertools
import math

import numpy as np

from geomod import GeoCoord, GeoGraph, Partition

KM_PER_DEG = 111.195


def two_triangles(bridge=False, colocated=False):
    coords = {i: GeoCoord(0.0, 0.0) if colocated else GeoCoord(40.0 + 0.3 * i, -100.0 + 0.5 * (i % 3))
              for i in range(6)}
    edges = {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 1.0, (3, 4): 1.0, (4, 5): 1.0, (3, 5): 1.0}
    if bridge:
        edges[(2, 3)] = 1.0
    return GeoGraph(coords, edges)


TRIANGLES = Partition.from_communities([[0, 1, 2], [3, 4, 5]])


def single_edge(lat2=0.0, lon2=0.0):
    return GeoGraph({0: GeoCoord(0.0, 0.0), 1: GeoCoord(lat2, lon2)}, {(0, 1): 1.0})


def complete(n, lat=10.0):
    coords = {i: GeoCoord(lat, float(i)) for i in range(n)}
    return GeoGraph(coords, {(u, v): 1.0 for u, v in itertools.combinations(range(n), 2)})


def planted_two_city(tie_weight=1.5):
    """Two 6-cliques, each split 3+3 between two cities about 1000 km apart.

    Within each city the two cliques' local halves are joined by a complete
    bipartite set of ties of weight ``tie_weight``, so grouping by city wins
    under NG modularity while the cliques win under distance modularity.
    """
    coords = {}
    for i in range(12):
        city = 0 if i % 6 < 3 else 1
        coords[i] = GeoCoord(40.0 + 0.01 * (i % 3), -100.0 + 11.75 * city + 0.01 * (i // 6))
    edges = {}
    for clique in (range(6), range(6, 12)):
        for u, v in itertools.combinations(clique, 2):
            edges[(u, v)] = 1.0
    for a, b in (((0, 1, 2), (6, 7, 8)), ((3, 4, 5), (9, 10, 11))):
        for u in a:
            for v in b:
                edges[(u, v)] = tie_weight
    return GeoGraph(coords, edges)


PLANTED = Partition.from_communities([range(6), range(6, 12)])
BY_CITY = Partition.from_communities([[0, 1, 2, 6, 7, 8], [3, 4, 5, 9, 10, 11]])


def random_graph(rng, n, p=0.5, box_km=1000.0, weighted=True, loops=False, center=(40.0, -100.0)):
    """Random geolocated graph with at least one edge.

    Coordinates are uniform in a square of side ``box_km`` around ``center``;
    weights are either all 1 or drawn from {1, 0.5..3}.
    """
    half_lat = box_km / 2 / KM_PER_DEG
    half_lon = half_lat / math.cos(math.radians(center[0]))
    coords = {i: GeoCoord(float(center[0] + rng.uniform(-half_lat, half_lat)),
                          float(center[1] + rng.uniform(-half_lon, half_lon))) for i in range(n)}
    edges = {}
    for u, v in itertools.combinations(range(n), 2):
        if rng.random() < p:
            edges[(u, v)] = _weight(rng, weighted)
    if loops:
        for u in range(n):
            if rng.random() < 0.2:
                edges[(u, u)] = _weight(rng, weighted)
    if not edges:
        edges[(0, n - 1) if n > 1 else (0, 0)] = 1.0
    return GeoGraph(coords, edges)


def _weight(rng, weighted):
    if not weighted or rng.random() < 0.3:
        return 1.0
    return float(np.round(rng.uniform(0.5, 3.0), 3))


def random_partition(rng, nodes, k=None):
    nodes = list(nodes)
    k = k or int(rng.integers(1, len(nodes) + 1))
    return Partition({u: int(rng.integers(k)) for u in nodes})
