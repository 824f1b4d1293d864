"""Experiment harness: partition files, run summaries, sigma sweeps and ranking."""

from __future__ import annotations

import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .errors import ConsistencyError, ParseError
from .geodesy import DecayKernel
from .graph import GeoGraph, load_graph
from .louvain import DetectionConfig, DetectionResult, louvain, louvain_d
from .modularity import CommunityScore, build_null_model, distance_modularity, ng_modularity, rank_communities
from .partition import Partition

log = logging.getLogger(__name__)

METHODS = ("louvain", "louvain_d_singleton", "louvain_d_warm")
DEFAULT_SIGMAS = tuple(float(s) for s in range(50, 501, 50))

SWEEP_COLUMNS = ["sample", "sigma", "method", "m_dist", "m_ng", "communities",
                 "pct_improvement", "status"]
TIMING_COLUMNS = ["sample", "sigma", "method", "runtime_s"]


def fmt(x) -> str:
    """Stable text form for floats in delimited output."""
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        return format(x, ".12g")
    return str(x)


# -- partition files --------------------------------------------------------

def write_partition_tsv(p: Partition, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("node_id\tcommunity_id\n")
        for u, c in p.assignment.items():
            fh.write(f"{u}\t{c}\n")


def read_partition_tsv(path) -> Partition:
    assign = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#") or (lineno == 1 and s.startswith("node_id")):
                continue
            parts = s.split("\t")
            if len(parts) != 2:
                raise ParseError("expected node_id<TAB>community_id", path, lineno)
            try:
                u, c = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"non-integer field in {s!r}", path, lineno) from None
            if u in assign:
                raise ParseError(f"node {u} listed twice", path, lineno)
            assign[u] = c
    return Partition(assign)


def run_summary(g: GeoGraph, res: DetectionResult, objective, cfg: DetectionConfig) -> dict:
    kernel = objective if isinstance(objective, DecayKernel) else None
    return {
        "nodes": g.n,
        "edges": g.num_edges,
        "objective": "ng" if kernel is None else "distance",
        "sigma": None if kernel is None else kernel.sigma,
        "init": cfg.init,
        "warm_mode": cfg.warm_mode if cfg.init == "warm" else None,
        "meta_null": cfg.meta_null if kernel is not None else None,
        "seed": cfg.rng_seed,
        "objective_level0": res.objective,
        "internal_objective": res.internal_objective,
        "ng_modularity": ng_modularity(g, res.partition),
        "communities": res.n_communities,
        "levels": res.n_levels,
        "level_objectives": res.level_objectives,
        "moves": res.moves,
        "passes": res.passes,
        "runtime_s": res.duration,
    }


# -- sweeps -----------------------------------------------------------------

@dataclass
class SweepRow:
    sample: str
    sigma: float
    method: str
    m_dist: float = math.nan
    m_ng: float = math.nan
    communities: float = math.nan
    pct_improvement: float = math.nan
    runtime_s: float = math.nan
    status: str = "ok"

    def cells(self, columns) -> list[str]:
        return [fmt(getattr(self, c)) for c in columns]


@dataclass
class SweepReport:
    rows: list[SweepRow] = field(default_factory=list)
    means: list[SweepRow] = field(default_factory=list)

    def write(self, path) -> Path:
        """Write the sweep CSV and a sibling ``*.timing.csv``; returns the latter.

        Runtimes live in their own file so that the main CSV is byte-identical
        across reruns.
        """
        path = Path(path)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(SWEEP_COLUMNS)
            for r in self.rows + self.means:
                w.writerow(r.cells(SWEEP_COLUMNS))
        timing = path.with_name(path.stem + ".timing.csv")
        with open(timing, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TIMING_COLUMNS)
            for r in self.rows + self.means:
                w.writerow(r.cells(TIMING_COLUMNS))
        return timing

    def select(self, method=None, sigma=None) -> list[SweepRow]:
        return [r for r in self.rows
                if (method is None or r.method == method) and (sigma is None or r.sigma == sigma)]

    def mean_improvement(self, method: str, sigma: float) -> float:
        for r in self.means:
            if r.method == method and r.sigma == sigma:
                return r.pct_improvement
        raise KeyError((method, sigma))


def percent_improvement(value: float, baseline: float) -> float:
    if baseline == 0:
        return 0.0 if value == baseline else math.copysign(math.inf, value)
    return 100.0 * (value - baseline) / abs(baseline)


def _sweep_cell(args) -> list[SweepRow]:
    name, g, sigma, methods, seed, meta_null = args
    kernel = DecayKernel.exponential(sigma)
    rows = []
    baseline = table = None
    try:
        table = build_null_model(g, None, kernel)
        res = louvain(g, DetectionConfig(rng_seed=seed))
        baseline = distance_modularity(g, res.partition, table)
        if "louvain" in methods:
            rows.append(SweepRow(name, sigma, "louvain", baseline, res.objective,
                                 res.n_communities, 0.0, res.duration))
    except Exception as exc:  # recorded per row; the sweep carries on
        log.exception("louvain failed on %s", name)
        rows.append(SweepRow(name, sigma, "louvain", status=f"error: {exc}"))

    for method, init in (("louvain_d_singleton", "singleton"), ("louvain_d_warm", "warm")):
        if method not in methods:
            continue
        try:
            if table is None:
                table = build_null_model(g, None, kernel)
            cfg = DetectionConfig(objective=kernel, init=init, rng_seed=seed, meta_null=meta_null)
            res = louvain_d(g, cfg)
            m_dist = distance_modularity(g, res.partition, table)
            pct = percent_improvement(m_dist, baseline) if baseline is not None else math.nan
            rows.append(SweepRow(name, sigma, method, m_dist, ng_modularity(g, res.partition),
                                 res.n_communities, pct, res.duration))
        except Exception as exc:
            log.exception("%s failed on %s at sigma=%g", method, name, sigma)
            rows.append(SweepRow(name, sigma, method, status=f"error: {exc}"))
    return rows


def _mean(xs):
    xs = [x for x in xs if not math.isnan(x)]
    return math.fsum(xs) / len(xs) if xs else math.nan


def run_sweep(samples: Sequence[tuple[str, GeoGraph]], sigmas: Sequence[float],
              methods: Sequence[str] = METHODS, seed: int = 0, jobs: int = 1,
              meta_null: str = "exact") -> SweepReport:
    """Every (sample, sigma, method) combination, scored on the original graph."""
    methods = tuple(m for m in METHODS if m in set(methods))
    cells = [(name, g, float(s), methods, seed, meta_null) for name, g in samples for s in sigmas]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_cell, cells))
    else:
        results = [_sweep_cell(c) for c in cells]

    report = SweepReport()
    for rows in results:
        report.rows.extend(rows)
    for s in sigmas:
        for m in methods:
            sel = [r for r in report.rows if r.sigma == float(s) and r.method == m and r.status == "ok"]
            report.means.append(SweepRow(
                "mean", float(s), m,
                _mean([r.m_dist for r in sel]), _mean([r.m_ng for r in sel]),
                _mean([r.communities for r in sel]), _mean([r.pct_improvement for r in sel]),
                _mean([r.runtime_s for r in sel]),
                "ok" if sel else "error: no successful runs"))
    return report


def load_samples(sample_dir) -> list[tuple[str, GeoGraph]]:
    paths = sorted(Path(sample_dir).glob("*.json"))
    return [(p.stem, load_graph(p)) for p in paths]


# -- ranking and GeoJSON ----------------------------------------------------

def rank(g: GeoGraph, p: Partition, kernel: DecayKernel | None) -> list[CommunityScore]:
    if set(p.nodes()) != set(g.node_ids):
        raise ConsistencyError("partition and graph describe different node sets")
    table = build_null_model(g, None, kernel or DecayKernel.constant())
    return rank_communities(g, p, table)


def community_geojson(g: GeoGraph, p: Partition, scores: Sequence[CommunityScore], top_k: int) -> dict:
    """FeatureCollection for the ``top_k`` best communities.

    Holds one MultiPoint per community and one Point per member node;
    coordinates are ``[lon, lat]``.
    """
    features = []
    chosen = list(scores)[:max(0, top_k)]
    for rank_, s in enumerate(chosen, 1):
        members = sorted(p.members(s.community))
        features.append({
            "type": "Feature",
            "geometry": {"type": "MultiPoint",
                         "coordinates": [[g.coord(u).lon, g.coord(u).lat] for u in members]},
            "properties": {"kind": "community", "community_id": s.community, "rank": rank_,
                           "quality": s.quality, "size": s.size},
        })
    for rank_, s in enumerate(chosen, 1):
        for u in sorted(p.members(s.community)):
            c = g.coord(u)
            features.append({
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [c.lon, c.lat]},
                "properties": {"kind": "node", "node_id": u, "community_id": s.community,
                               "rank": rank_},
            })
    return {"type": "FeatureCollection", "features": features}


def write_json(doc, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n", encoding="utf-8")
