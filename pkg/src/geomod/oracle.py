"""Brute-force references for small graphs.

Everything here is written straight from the definitions, without the
incremental bookkeeping of :mod:`geomod.modularity` or :mod:`geomod.louvain`,
so the two can check each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from .errors import SizeLimitError, UndefinedScoreError
from .partition import Partition

MAX_NODES = 10
_R = 6371.0


def enumerate_partitions(n: int) -> Iterator[tuple[int, ...]]:
    """Yield every set partition of ``{0..n-1}`` as a restricted growth string.

    ``labels[i]`` is the block of element ``i``; the first element is always
    in block 0 and each new block gets the next unused label.
    """
    if n > MAX_NODES:
        raise SizeLimitError(f"refusing to enumerate partitions of {n} > {MAX_NODES} elements")
    if n <= 0:
        yield ()
        return
    labels = [0] * n

    def rec(i: int, top: int):
        if i == n:
            yield tuple(labels)
            return
        for b in range(top + 2):
            labels[i] = b
            yield from rec(i + 1, max(top, b))

    yield from rec(1, 0)


def bell(n: int) -> int:
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def _adjacency(g):
    """Dense ordered-pair adjacency with ``A[i][i] = 2 * loop weight``."""
    ids = list(g.node_ids)
    pos = {u: i for i, u in enumerate(ids)}
    n = len(ids)
    a = [[0.0] * n for _ in range(n)]
    for u, v, w in g.edges():
        i, j = pos[u], pos[v]
        if i == j:
            a[i][i] += 2.0 * w
        else:
            a[i][j] += w
            a[j][i] += w
    return ids, a


def _chord_km(p, q) -> float:
    # arc length from the straight-line chord between unit vectors; a
    # different route to the same great-circle distance as haversine
    def vec(c):
        la, lo = math.radians(c[0]), math.radians(c[1])
        return (math.cos(la) * math.cos(lo), math.cos(la) * math.sin(lo), math.sin(la))
    x, y = vec(p), vec(q)
    chord = math.sqrt(sum((a - b) ** 2 for a, b in zip(x, y)))
    return 2.0 * _R * math.asin(min(1.0, chord / 2.0))


def null_terms(g, objective) -> list[list[float]]:
    """``P[i][j]`` for the NG (``"ng"``) or distance objective, from scratch."""
    ids, a = _adjacency(g)
    n = len(ids)
    k = [sum(row) for row in a]
    two_m = sum(k)
    if two_m <= 0:
        raise UndefinedScoreError("zero total weight")
    if objective == "ng":
        return [[k[i] * k[j] / two_m for j in range(n)] for i in range(n)]

    coords = [g.coord(u) for u in ids]

    def f(i, j):
        if objective.kind == "constant":
            return 1.0
        d = _chord_km(coords[i], coords[j])
        return math.exp(-((d / objective.sigma) ** 2))

    hat = [[0.0] * n for _ in range(n)]
    for i in range(n):
        denom = 0.0
        for q in range(n):
            denom += k[q] * f(q, i)
        for j in range(n):
            hat[i][j] = k[i] * k[j] * f(i, j) / denom if k[i] > 0 else 0.0
    return [[(hat[i][j] + hat[j][i]) / 2.0 for j in range(n)] for i in range(n)]


def naive_score(g, labels, objective="ng", null=None) -> float:
    """Modularity of the partition given as per-node ``labels`` (node-id order)."""
    ids, a = _adjacency(g)
    n = len(ids)
    two_m = sum(sum(row) for row in a)
    if two_m <= 0:
        raise UndefinedScoreError("zero total weight")
    if null is None:
        null = null_terms(g, objective)
    total = 0.0
    for c in set(labels):
        members = [i for i in range(n) if labels[i] == c]
        for i in members:
            for j in members:
                total += a[i][j] - null[i][j]
    return total / two_m


@dataclass
class OracleResult:
    partition: Partition
    objective: float
    enumerated: int


def brute_force_best(g, objective="ng") -> OracleResult:
    """Exact maximizer of the objective over all partitions of ``g``."""
    n = g.n
    if n > MAX_NODES:
        raise SizeLimitError(f"brute force is limited to {MAX_NODES} nodes, graph has {n}")
    null = null_terms(g, objective)
    best_labels, best = None, -math.inf
    count = 0
    for labels in enumerate_partitions(n):
        count += 1
        s = naive_score(g, labels, objective, null)
        if s > best + 1e-12:
            best, best_labels = s, labels
    ids = list(g.node_ids)
    part = Partition({u: best_labels[i] for i, u in enumerate(ids)})
    return OracleResult(part, best, count)
