"""Snowball (breadth-first) sample extraction."""

from __future__ import annotations

import csv
import logging
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, NodeNotFoundError
from .graph import GeoGraph

log = logging.getLogger(__name__)


class SampleExhaustedWarning(UserWarning):
    """A snowball sample ran out of reachable nodes before reaching its size."""


@dataclass(frozen=True)
class SampleSpec:
    """Where a snowball sample starts and how big it must get.

    ``seed_node`` is either an explicit node id or ``"random"``, in which case
    the start is drawn with ``rng_seed``. ``expand`` selects between adding a
    whole breadth-first layer per step (``"layer"``) and adding the
    neighbours of one node at a time (``"node"``).
    """

    min_size: int
    seed_node: Union[int, str] = "random"
    rng_seed: int = 0
    expand: str = "layer"

    def __post_init__(self):
        if self.min_size < 1:
            raise DomainError("min_size must be >= 1")
        if self.expand not in ("layer", "node"):
            raise DomainError(f"unknown expansion mode {self.expand!r}")


def _start(g: GeoGraph, spec: SampleSpec) -> int:
    if spec.seed_node == "random":
        rng = np.random.default_rng(spec.rng_seed)
        return g.node_ids[int(rng.integers(g.n))]
    if spec.seed_node not in g:
        raise NodeNotFoundError(f"seed node {spec.seed_node} is not in the graph")
    return int(spec.seed_node)


def snowball_nodes(g: GeoGraph, spec: SampleSpec) -> tuple[list[int], bool]:
    """Sampled node ids and whether the component ran out first."""
    if g.n == 0:
        raise DomainError("cannot sample from an empty graph")
    seed = _start(g, spec)
    taken = {seed}
    order = [seed]
    if spec.expand == "layer":
        frontier = [seed]
        while len(taken) < spec.min_size and frontier:
            layer = []
            for u in frontier:
                for v in sorted(g.neighbors(u)):
                    if v not in taken:
                        taken.add(v)
                        layer.append(v)
            order += layer
            frontier = layer
    else:
        head = 0
        while len(taken) < spec.min_size and head < len(order):
            u = order[head]
            head += 1
            for v in sorted(g.neighbors(u)):
                if v not in taken:
                    taken.add(v)
                    order.append(v)
    return order, len(taken) < spec.min_size


def snowball_sample(g: GeoGraph, spec: SampleSpec) -> GeoGraph:
    """Induced subgraph grown from the seed until it has ``min_size`` nodes.

    Growth stops early (with a SampleExhaustedWarning) if the seed's component
    is smaller than ``min_size``.
    """
    nodes, exhausted = snowball_nodes(g, spec)
    if exhausted:
        warnings.warn(f"component of seed {nodes[0]} has only {len(nodes)} nodes "
                      f"(< {spec.min_size}); returning the whole component",
                      SampleExhaustedWarning, stacklevel=2)
    return g.subgraph(nodes)


def batch_samples(g: GeoGraph, count: int, min_size: int, rng_seed: int = 0,
                  expand: str = "layer") -> list[GeoGraph]:
    """``count`` snowball samples from distinct random seed nodes."""
    if count < 1:
        raise DomainError("count must be >= 1")
    if count > g.n:
        raise DomainError(f"cannot draw {count} distinct seeds from {g.n} nodes")
    if g.n < min_size:
        warnings.warn(f"graph has {g.n} nodes, fewer than min_size={min_size}",
                      SampleExhaustedWarning, stacklevel=2)
    rng = np.random.default_rng(rng_seed)
    seeds = rng.choice(np.array(g.node_ids), size=count, replace=False)
    out = []
    for s in seeds.tolist():
        spec = SampleSpec(min_size=min_size, seed_node=int(s), expand=expand)
        out.append(snowball_sample(g, spec))
    return out


def sample_stats(samples) -> list[dict]:
    return [{"sample": i, "nodes": s.n, "edges": s.num_edges} for i, s in enumerate(samples)]


def write_stats_csv(samples, path) -> None:
    rows = sample_stats(samples)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=["sample", "nodes", "edges"], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
