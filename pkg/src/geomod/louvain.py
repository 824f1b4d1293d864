"""Louvain modularity maximization and its distance-modularity variant.

Both objectives share one two-phase engine. Phase 1 sweeps the nodes of the
current level in a seeded random order and moves each to the neighbouring
community with the largest gain ``k_i,in - sum_{j in c} P_ij``. Phase 2
collapses communities into meta-nodes, summing edge weights, turning
internal weight into self-loops and placing each meta-node at the centroid of
the level-0 nodes it contains.

For the distance objective the meta-level expectation between two meta-nodes
is, by default, the sum of level-0 expectations between their members, so
every level optimizes exactly the level-0 score. ``meta_null="centroid"``
instead re-evaluates the kernel between meta-node centroids using the
meta-degrees; that is cheaper to state but drifts from the level-0 score once
communities spread out geographically.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np

from .errors import DomainError, UndefinedScoreError
from .geodesy import DecayKernel, GeoCoord, from_vector, haversine_matrix, to_unit_vectors
from .graph import GeoGraph
from .modularity import NullModelTable, build_null_model, distance_modularity, ng_modularity
from .partition import Partition

log = logging.getLogger(__name__)

Objective = Union[str, DecayKernel]

# relative width inside which two candidate gains count as tied
_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class DetectionConfig:
    objective: Objective = "ng"
    init: str = "singleton"           # "singleton" | "warm"
    warm_mode: str = "aggregate"      # "aggregate" | "resweep"
    move_epsilon: float = 1e-10
    outer_epsilon: float = 1e-9
    rng_seed: int = 0
    max_outer_iterations: int = 100
    # meta-level null model: "centroid" re-evaluates the kernel between meta-node
    # centroids; "exact" sums the level-0 expectations between member sets
    meta_null: str = "exact"
    # return the hierarchy level with the best level-0 score instead of the last one
    keep_best_level: bool = False
    # recompute the level objective after every move and assert it went up
    audit: bool = False

    def __post_init__(self):
        if self.objective != "ng" and not isinstance(self.objective, DecayKernel):
            raise DomainError(f"objective must be 'ng' or a DecayKernel, got {self.objective!r}")
        if self.init not in ("singleton", "warm"):
            raise DomainError(f"unknown init {self.init!r}")
        if self.meta_null not in ("centroid", "exact"):
            raise DomainError(f"unknown meta_null {self.meta_null!r}")
        if self.warm_mode not in ("aggregate", "resweep"):
            raise DomainError(f"unknown warm_mode {self.warm_mode!r}")
        if self.init == "warm" and self.objective == "ng":
            raise DomainError("warm start only applies to the distance objective")
        if not (self.move_epsilon > 0 and self.outer_epsilon > 0):
            raise DomainError("epsilons must be positive")
        if self.max_outer_iterations < 1:
            raise DomainError("max_outer_iterations must be >= 1")


@dataclass
class DetectionResult:
    partition: Partition
    objective: float                  # level-0 score of ``partition``
    internal_objective: float         # score at the level where the run stopped
    levels: list[Partition] = field(default_factory=list)
    level_objectives: list[float] = field(default_factory=list)
    level_internal: list[float] = field(default_factory=list)
    moves: list[int] = field(default_factory=list)
    passes: list[int] = field(default_factory=list)
    chosen_level: int = -1
    duration: float = 0.0
    config: DetectionConfig | None = None

    @property
    def n_levels(self) -> int:
        return len(self.levels)

    @property
    def n_communities(self) -> int:
        return len(self.partition)


@dataclass(frozen=True)
class MetaGraph:
    """Aggregated graph plus the bookkeeping needed to keep collapsing it."""

    graph: GeoGraph
    counts: dict[int, int]            # level-0 nodes represented by each meta-node
    members: dict[int, frozenset]     # input nodes inside each meta-node
    # sum of the level-0 unit vectors per meta-node; the centroid is its direction
    vectors: np.ndarray = field(default=None, repr=False, compare=False)


# -- array representation of one hierarchy level ---------------------------

class _Level:
    __slots__ = ("n", "adj", "src", "dst", "w", "loops", "k", "vec", "count", "latlon")

    def __init__(self, n, src, dst, w, loops, k, vec, count, latlon=None):
        self.n = n
        self.src, self.dst, self.w = src, dst, w          # both directions, no loops
        self.loops = loops
        self.k = k
        self.vec = vec                                     # summed level-0 unit vectors
        self.count = count
        self.latlon = latlon                               # exact coordinates at level 0
        adj = [[] for _ in range(n)]
        for a, b, x in zip(src.tolist(), dst.tolist(), w.tolist()):
            adj[a].append((b, x))
        self.adj = adj

    @classmethod
    def from_graph(cls, g: GeoGraph, counts=None, vectors=None) -> "_Level":
        ids = g.node_ids
        pos = {u: i for i, u in enumerate(ids)}
        n = len(ids)
        loops = np.zeros(n)
        src, dst, ws = [], [], []
        for u, v, x in g.edges():
            a, b = pos[u], pos[v]
            if a == b:
                loops[a] += x
            else:
                src += (a, b)
                dst += (b, a)
                ws += (x, x)
        count = np.ones(n) if counts is None else np.array([counts[u] for u in ids], dtype=float)
        lats, lons = g.coord_arrays()
        if vectors is None:
            vec = to_unit_vectors(lats, lons) * count[:, None]
        else:
            vec = np.asarray(vectors, dtype=float)
        return cls(n, np.array(src, dtype=np.intp), np.array(dst, dtype=np.intp),
                   np.array(ws, dtype=float), loops, g.degree_array(), vec, count, (lats, lons))

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        if self.latlon is not None:
            return self.latlon
        out = [from_vector(v) for v in self.vec]
        return (np.array([c.lat for c in out]), np.array([c.lon for c in out]))

    def collapse(self, lab: np.ndarray, q: int) -> "_Level":
        """Aggregate by contiguous labels ``0..q-1``."""
        ls, ld = lab[self.src], lab[self.dst]
        same = ls == ld
        loops = np.bincount(lab, weights=self.loops, minlength=q)
        # each internal edge is listed in both directions
        loops += 0.5 * np.bincount(ls[same], weights=self.w[same], minlength=q)
        key = ls[~same] * q + ld[~same]
        uniq, inv = np.unique(key, return_inverse=True)
        w = np.bincount(inv, weights=self.w[~same], minlength=len(uniq))
        src, dst = uniq // q, uniq % q
        k = np.bincount(lab, weights=self.k, minlength=q)
        vec = np.zeros((q, 3))
        np.add.at(vec, lab, self.vec)
        count = np.bincount(lab, weights=self.count, minlength=q)
        return _Level(q, src.astype(np.intp), dst.astype(np.intp), w, loops, k, vec, count)

    def two_m(self) -> float:
        return float(self.k.sum())

    def intra(self, comm: np.ndarray) -> float:
        """Ordered-pair adjacency sum inside communities."""
        same = comm[self.src] == comm[self.dst]
        return float(self.w[same].sum() + 2.0 * self.loops.sum())


def _contiguous(comm: np.ndarray) -> tuple[np.ndarray, int]:
    """Relabel to 0..q-1 in order of each community's lowest node index."""
    _, first, inv = np.unique(comm, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.intp)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inv.ravel()], len(first)


def _block_sum(pm: np.ndarray, comm: np.ndarray) -> float:
    """``sum_{i,j: comm[i] == comm[j]} pm[i, j]``."""
    order = np.argsort(comm, kind="stable")
    sl = comm[order]
    starts = np.flatnonzero(np.r_[True, sl[1:] != sl[:-1]])
    blocks = np.add.reduceat(np.add.reduceat(pm[np.ix_(order, order)], starts, axis=0), starts, axis=1)
    return float(np.trace(blocks))


# -- null-model strategies for phase 1 --------------------------------------

class _NGNull:
    def __init__(self, level: _Level, comm: np.ndarray):
        self.k = level.k
        self.two_m = level.two_m()
        self.tot = np.bincount(comm, weights=self.k, minlength=level.n)

    def remove(self, i, c):
        self.tot[c] -= self.k[i]

    def insert(self, i, c):
        self.tot[c] += self.k[i]

    def sums(self, i, comm, cands):
        return (self.k[i] * self.tot[cands] / self.two_m).tolist()

    def objective(self, level, comm):
        tot = np.bincount(comm, weights=self.k)
        return (level.intra(comm) - float(np.dot(tot, tot)) / self.two_m) / self.two_m


def _aggregate_matrix(pm: np.ndarray, base_labels: np.ndarray, q: int) -> np.ndarray:
    """``out[a, b] = sum of pm[i, j]`` over level-0 ``i`` in ``a`` and ``j`` in ``b``."""
    order = np.argsort(base_labels, kind="stable")
    starts = np.searchsorted(base_labels[order], np.arange(q))
    out = np.add.reduceat(np.add.reduceat(pm[np.ix_(order, order)], starts, axis=0), starts, axis=1)
    # average with the transpose: reduceat sums in different orders per side
    return (out + out.T) / 2.0


class _DistanceNull:
    def __init__(self, level: _Level, kernel: DecayKernel, table: NullModelTable | None = None,
                 matrix: np.ndarray | None = None):
        if matrix is not None:
            self.pm = matrix
        else:
            if table is None:
                if kernel.kind == "constant":
                    dist = None
                else:
                    dist = haversine_matrix(*level.coords())
                table = NullModelTable(range(level.n), level.k, dist, kernel)
            self.pm = table.matrix()
        self.diag = np.diagonal(self.pm).copy()
        self.n = level.n
        self.two_m = level.two_m()

    def remove(self, i, c):
        pass

    def insert(self, i, c):
        pass

    def sums(self, i, comm, cands):
        s = np.bincount(comm, weights=self.pm[i], minlength=self.n)
        s[comm[i]] -= self.diag[i]
        return s[cands].tolist()

    def objective(self, level, comm):
        return (level.intra(comm) - _block_sum(self.pm, comm)) / self.two_m


# -- phase 1 ----------------------------------------------------------------

def _move_nodes(level: _Level, comm: np.ndarray, null, cfg: DetectionConfig, rng) -> tuple[int, int]:
    """Local moving until a full sweep changes nothing. Mutates ``comm``."""
    n = level.n
    adj = level.adj
    order = rng.permutation(n).tolist()
    size = np.bincount(comm, minlength=n)
    min_step = cfg.move_epsilon * level.two_m() / 2.0
    moves = passes = 0
    current = null.objective(level, comm) if cfg.audit else None
    while True:
        passes += 1
        moved = 0
        for i in order:
            own = int(comm[i])
            kin = {own: 0.0}
            for j, x in adj[i]:
                c = int(comm[j])
                kin[c] = kin.get(c, 0.0) + x
            null.remove(i, own)
            cands = sorted(kin)
            gains = [kin[c] - s for c, s in zip(cands, null.sums(i, comm, cands))]
            own_gain = gains[cands.index(own)]
            top = max(gains)
            lonely = size[own] == 1
            if not lonely:
                top = max(top, 0.0)  # i alone in a fresh community
            target = own
            if top - own_gain > min_step:
                tol = _TIE_RTOL * max(1.0, abs(top))
                tied = [c for c, gn in zip(cands, gains) if gn >= top - tol]
                if own in tied:
                    target = own
                elif tied:
                    target = tied[0]
                else:
                    target = int(np.flatnonzero(size == 0)[0])
            if target != own:
                comm[i] = target
                size[own] -= 1
                size[target] += 1
                moved += 1
            null.insert(i, target)
            if cfg.audit and target != own:
                after = null.objective(level, comm)
                if not after > current:
                    raise AssertionError(f"move of node {i} did not increase the objective "
                                         f"({current!r} -> {after!r})")
                current = after
        moves += moved
        if moved == 0:
            return moves, passes


# -- drivers ----------------------------------------------------------------

class _Run:
    """State shared by the levels of one detection run."""

    def __init__(self, g: GeoGraph, cfg: DetectionConfig, rng):
        if not g.m > 0:
            raise UndefinedScoreError("cannot detect communities in a graph with zero total weight")
        self.g = g
        self.cfg = cfg
        self.rng = rng
        self.ids = g.node_ids
        self.level0 = None
        self.base_table = None
        self.result = DetectionResult(Partition.whole(self.ids), float("-inf"), float("-inf"), config=cfg)

    def to_partition(self, base_labels: np.ndarray) -> Partition:
        lab, _ = _contiguous(base_labels)
        return Partition(dict(zip(self.ids, lab.tolist())))

    def table(self) -> NullModelTable:
        if self.base_table is None:
            self.base_table = build_null_model(self.g, None, self.cfg.objective)
        return self.base_table

    def score_base(self, p: Partition) -> float:
        if self.cfg.objective == "ng":
            return ng_modularity(self.g, p)
        return distance_modularity(self.g, p, self.table())

    def record(self, base_labels, internal, moves, passes):
        p = self.to_partition(base_labels)
        r = self.result
        r.levels.append(p)
        r.level_objectives.append(self.score_base(p))
        r.level_internal.append(internal)
        r.moves.append(moves)
        r.passes.append(passes)

    def make_null(self, level, comm, base_labels=None):
        obj = self.cfg.objective
        if obj == "ng":
            return _NGNull(level, comm)
        if level is self.level0:
            return _DistanceNull(level, obj, self.table())
        if self.cfg.meta_null == "exact":
            pm = _aggregate_matrix(self.table().matrix(), base_labels, level.n)
            return _DistanceNull(level, obj, matrix=pm)
        return _DistanceNull(level, obj)

    def run(self, level: _Level, comm: np.ndarray, base_labels: np.ndarray):
        cfg = self.cfg
        for _ in range(cfg.max_outer_iterations):
            null = self.make_null(level, comm, base_labels)
            before = null.objective(level, comm)
            moves, passes = _move_nodes(level, comm, null, cfg, self.rng)
            after = null.objective(level, comm) if moves else before
            lab, q = _contiguous(comm)
            base_labels = lab[base_labels]
            self.record(base_labels, after, moves, passes)
            log.debug("level %d: n=%d moves=%d passes=%d q=%d internal=%.6f",
                      len(self.result.levels) - 1, level.n, moves, passes, q, after)
            if moves == 0 or q == level.n or after - before < cfg.outer_epsilon:
                break
            level = level.collapse(lab, q)
            comm = np.arange(q)
        return self.finish()

    def finish(self) -> DetectionResult:
        r = self.result
        if self.cfg.keep_best_level:
            best = max(range(len(r.levels)), key=lambda i: (r.level_objectives[i], i))
        else:
            best = len(r.levels) - 1
        r.chosen_level = best
        r.partition = r.levels[best]
        r.objective = r.level_objectives[best]
        r.internal_objective = r.level_internal[-1]
        return r


def louvain(g: GeoGraph, cfg: DetectionConfig | None = None, *, rng=None) -> DetectionResult:
    """Newman-Girvan Louvain."""
    cfg = cfg or DetectionConfig()
    if cfg.objective != "ng":
        raise DomainError("louvain() optimizes the 'ng' objective; use louvain_d() for distance")
    t0 = time.perf_counter()
    rng = rng if rng is not None else np.random.default_rng(cfg.rng_seed)
    run = _Run(g, cfg, rng)
    level = run.level0 = _Level.from_graph(g)
    res = run.run(level, np.arange(level.n), np.arange(level.n))
    res.duration = time.perf_counter() - t0
    return res


def louvain_d(g: GeoGraph, cfg: DetectionConfig) -> DetectionResult:
    """Louvain on distance modularity, optionally warm-started from NG Louvain."""
    if not isinstance(cfg.objective, DecayKernel):
        raise DomainError("louvain_d() needs a distance objective (DecayKernel)")
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.rng_seed)
    run = _Run(g, cfg, rng)
    level = run.level0 = _Level.from_graph(g)
    n = level.n
    if cfg.init == "singleton":
        res = run.run(level, np.arange(n), np.arange(n))
    else:
        ng_cfg = replace(cfg, objective="ng", init="singleton", audit=False)
        warm = louvain(g, ng_cfg, rng=rng).partition
        labels = np.array(warm.labels(g.node_ids), dtype=np.intp)
        lab, q = _contiguous(labels)
        null = run.make_null(level, lab)
        run.record(lab, null.objective(level, lab), 0, 0)
        if cfg.warm_mode == "aggregate":
            res = run.run(level.collapse(lab, q), np.arange(q), lab)
        else:
            res = run.run(level, lab.copy(), np.arange(n))
    res.duration = time.perf_counter() - t0
    return res


def detect(g: GeoGraph, cfg: DetectionConfig) -> DetectionResult:
    return louvain(g, cfg) if cfg.objective == "ng" else louvain_d(g, cfg)


def rescore_base(result: DetectionResult, g: GeoGraph, objective: Objective) -> float:
    """Score the result's partition on the original graph and coordinates."""
    if objective == "ng":
        return ng_modularity(g, result.partition)
    return distance_modularity(g, result.partition, build_null_model(g, None, objective))


def aggregate(g, p: Partition) -> tuple[MetaGraph, dict[int, int]]:
    """Collapse each community of ``p`` into one meta-node.

    ``g`` may be a GeoGraph or a MetaGraph (whose counts then carry over).
    Returns the meta-graph and the community -> meta-node id map; meta-node
    ids follow the order of each community's smallest member.
    """
    counts = vectors = None
    if isinstance(g, MetaGraph):
        counts, vectors, g = g.counts, g.vectors, g.graph
    p.check_covers(g.node_ids)
    level = _Level.from_graph(g, counts, vectors)
    labels = np.array(p.labels(g.node_ids), dtype=np.intp)
    lab, q = _contiguous(labels)
    meta = level.collapse(lab, q)

    comm_to_meta = {}
    for c, x in zip(labels.tolist(), lab.tolist()):
        comm_to_meta.setdefault(c, x)
    members = {x: frozenset() for x in range(q)}
    for u, x in zip(g.node_ids, lab.tolist()):
        members[x] = members[x] | {u}

    coords = {x: from_vector(meta.vec[x]) for x in range(q)}
    edges = {}
    for a, b, x in zip(meta.src.tolist(), meta.dst.tolist(), meta.w.tolist()):
        if a < b:
            edges[(a, b)] = x
    for a in range(q):
        if meta.loops[a] > 0:
            edges[(a, a)] = float(meta.loops[a])
    mg = MetaGraph(GeoGraph(coords, edges),
                   {x: int(round(meta.count[x])) for x in range(q)},
                   members, meta.vec)
    return mg, comm_to_meta


def meta_coords(mg: MetaGraph) -> dict[int, GeoCoord]:
    return mg.graph.coords()
