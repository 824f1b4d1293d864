"""Newman-Girvan and distance modularity, move gains and per-community quality.

All double sums run over ordered node pairs inside a community, including
``i == j``. The diagonal adjacency entry of a node with a self-loop of weight
``w`` is ``2 w``, matching the degree convention of :class:`GeoGraph`. With
this convention collapsing a community into a meta-node preserves the score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, UndefinedScoreError
from .geodesy import DecayKernel, DistanceMatrix, decay, distance_matrix
from .graph import GeoGraph
from .partition import Partition


def _intra_weight(g: GeoGraph, p: Partition) -> dict[int, float]:
    """Ordered-pair adjacency sum inside each community (``2 *`` internal weight)."""
    inside = {c: 0.0 for c in p.communities}
    for u, v, w in g.edges():
        cu = p.community_of(u)
        if cu == p.community_of(v):
            inside[cu] += 2.0 * w
    return inside


def _check(g: GeoGraph, p: Partition) -> None:
    p.check_covers(g.node_ids)
    if not g.m > 0:
        raise UndefinedScoreError("modularity is undefined for a graph with zero total weight")


def ng_modularity(g: GeoGraph, p: Partition) -> float:
    """Newman-Girvan modularity of ``p`` on ``g``."""
    _check(g, p)
    two_m = 2.0 * g.m
    inside = _intra_weight(g, p)
    total = {c: 0.0 for c in p.communities}
    for u in g.node_ids:
        total[p.community_of(u)] += g.degree(u)
    q = 0.0
    for c in p.communities:
        q += inside[c] / two_m - (total[c] / two_m) ** 2
    return q


class NullModelTable:
    """Distance-decay null model for one graph and kernel.

    Holds the per-node denominators ``D[i] = sum_q k_q f(d(q, i))`` (the
    ``q == i`` term included). Pair expectations are produced on demand by
    :meth:`p_hat` / :meth:`p_sym`; :meth:`matrix` materializes the full
    symmetric table once and caches it.
    """

    def __init__(self, node_ids: Sequence[int], degrees, distances, kernel: DecayKernel):
        self.node_ids = tuple(node_ids)
        self.kernel = kernel
        self._index = {u: i for i, u in enumerate(self.node_ids)}
        k = np.array(degrees, dtype=float)
        k.setflags(write=False)
        self.degrees = k
        n = len(self.node_ids)
        if k.shape != (n,):
            raise DomainError("one degree per node is required")
        if isinstance(distances, DistanceMatrix):
            distances = distances.values
        if distances is None:
            if kernel.kind != "constant":
                raise DomainError("a distance matrix is required for a distance-decay kernel")
            self._decay = None
        else:
            distances = np.asarray(distances, dtype=float)
            if distances.shape != (n, n):
                raise DomainError("distance matrix does not match the node set")
            self._decay = np.asarray(decay(kernel, distances), dtype=float).reshape(n, n)
        if not np.any(k > 0):
            raise UndefinedScoreError("null model is undefined when every degree is zero")
        if self._decay is None:
            denom = np.full(n, k.sum())
        else:
            denom = self._decay @ k
        denom.setflags(write=False)
        self.denominators = denom
        self._matrix = None

    def __len__(self) -> int:
        return len(self.node_ids)

    def index(self, u: int) -> int:
        return self._index[u]

    def _f(self, a: int, b: int) -> float:
        return 1.0 if self._decay is None else float(self._decay[a, b])

    def p_hat(self, i: int, j: int) -> float:
        a, b = self._index[i], self._index[j]
        ki = self.degrees[a]
        if ki == 0:
            return 0.0
        return float(ki * self.degrees[b] * self._f(a, b) / self.denominators[a])

    def p_sym(self, i: int, j: int) -> float:
        return (self.p_hat(i, j) + self.p_hat(j, i)) / 2.0

    def matrix(self) -> np.ndarray:
        """Dense symmetric expectation table ``P[a, b]`` in node-index order."""
        if self._matrix is None:
            k = self.degrees
            n = len(k)
            f = np.ones((n, n)) if self._decay is None else self._decay
            num = k[:, None] * k[None, :] * f
            ph = np.zeros_like(num)
            rows = k > 0
            ph[rows] = num[rows] / self.denominators[rows, None]
            pm = (ph + ph.T) / 2.0
            pm.setflags(write=False)
            self._matrix = pm
        return self._matrix


def build_null_model(g: GeoGraph, dm: DistanceMatrix | None, kernel: DecayKernel) -> NullModelTable:
    """Null-model table for ``g`` under ``kernel``.

    ``dm`` may be None for the constant kernel; otherwise it must be indexed
    by the graph's node ids in order.
    """
    if dm is not None and tuple(dm.node_ids) != tuple(g.node_ids):
        raise DomainError("distance matrix does not cover the graph's nodes")
    if dm is None and kernel.kind != "constant":
        dm = distance_matrix(g)
    return NullModelTable(g.node_ids, g.degree_array(), dm, kernel)


def p_hat(t: NullModelTable, i: int, j: int) -> float:
    return t.p_hat(i, j)


def p_sym(t: NullModelTable, i: int, j: int) -> float:
    return t.p_sym(i, j)


def _null_inside(p: Partition, t: NullModelTable) -> dict[int, float]:
    pm = t.matrix()
    out = {}
    for c, members in p.communities.items():
        idx = np.fromiter((t.index(u) for u in sorted(members)), dtype=np.intp)
        out[c] = float(pm[np.ix_(idx, idx)].sum())
    return out


def distance_modularity(g: GeoGraph, p: Partition, t: NullModelTable) -> float:
    """Distance modularity of ``p`` on ``g`` using the null model ``t``.

    Not clamped: the value is reported as computed.
    """
    _check(g, p)
    if t.node_ids != g.node_ids:
        raise DomainError("null model was built for a different node set")
    inside = _intra_weight(g, p)
    null = _null_inside(p, t)
    return sum(inside[c] - null[c] for c in p.communities) / (2.0 * g.m)


def modularity(g: GeoGraph, p: Partition, objective="ng", table: NullModelTable | None = None) -> float:
    """Score ``p`` under ``objective`` ("ng" or a :class:`DecayKernel`)."""
    if objective == "ng":
        return ng_modularity(g, p)
    if table is None:
        table = build_null_model(g, None, objective)
    return distance_modularity(g, p, table)


def gain(t: NullModelTable, g: GeoGraph, i: int, c: int, p: Partition) -> float:
    """``k_i,in - sum_{j in c} P_ij`` for moving an isolated ``i`` into ``c``.

    Placing ``i`` into ``c`` raises the objective by ``2 * gain / (2 m)``
    relative to ``i`` sitting alone.
    """
    members = p.members(c)
    if i in members:
        raise DomainError(f"node {i} already belongs to community {c}")
    k_in = math.fsum(w for j, w in g.neighbors(i).items() if j in members)
    null = math.fsum(t.p_sym(i, j) for j in members)
    return k_in - null


@dataclass(frozen=True)
class CommunityScore:
    community: int
    quality: float
    size: int


def community_quality(g: GeoGraph, p: Partition, t: NullModelTable, c: int) -> CommunityScore:
    """Size-normalized modularity contribution of community ``c``."""
    members = p.members(c)
    inside = 0.0
    for u in members:
        for v, w in g.neighbors(u).items():
            if v in members:
                # a self-loop shows up once here and must count twice
                inside += 2.0 * w if u == v else w
    idx = np.fromiter((t.index(u) for u in sorted(members)), dtype=np.intp)
    null = float(t.matrix()[np.ix_(idx, idx)].sum())
    return CommunityScore(c, (inside - null) / (2.0 * len(members)), len(members))


def rank_communities(g: GeoGraph, p: Partition, t: NullModelTable) -> list[CommunityScore]:
    """All communities by descending quality; ties go to the lower id."""
    p.check_covers(g.node_ids)
    scores = [community_quality(g, p, t, c) for c in p.communities]
    return sorted(scores, key=lambda s: (-s.quality, s.community))
