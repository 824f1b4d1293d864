"""Geolocated weighted undirected graphs and SNAP-format ingestion."""

from __future__ import annotations

import gzip
import json
import logging
import math
from collections import defaultdict
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import DomainError, NodeNotFoundError, ParseError
from .geodesy import GeoCoord, from_vector, to_unit_vectors

log = logging.getLogger(__name__)


def _open_text(path):
    # SNAP distributes its files gzipped
    if str(path).endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, encoding="utf-8")


def _key(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u <= v else (v, u)


class GeoGraph:
    """Undirected weighted graph whose nodes carry coordinates.

    Edges are stored once per unordered pair. A self-loop ``(u, u)`` adds
    twice its weight to the degree of ``u``, so that ``sum(k) == 2 m``.
    Instances are treated as immutable after construction.
    """

    def __init__(self, coords: Mapping[int, GeoCoord], edges: Mapping[tuple[int, int], float] = ()):
        self._coords: dict[int, GeoCoord] = {}
        for u in sorted(coords):
            if not isinstance(u, (int, np.integer)) or u < 0:
                raise DomainError(f"node ids must be non-negative integers, got {u!r}")
            self._coords[int(u)] = GeoCoord(float(coords[u][0]), float(coords[u][1])).validate()

        self._adj: dict[int, dict[int, float]] = {u: {} for u in self._coords}
        edges = dict(edges)
        for (u, v), w in edges.items():
            w = float(w)
            if u not in self._coords or v not in self._coords:
                missing = u if u not in self._coords else v
                raise NodeNotFoundError(f"edge ({u}, {v}) references unknown node {missing}")
            if not (math.isfinite(w) and w > 0):
                raise DomainError(f"edge ({u}, {v}) has non-positive weight {w}")
            if v in self._adj[u]:
                raise DomainError(f"duplicate edge ({u}, {v})")
            self._adj[u][v] = w
            self._adj[v][u] = w

        self._ids = tuple(self._coords)
        self._degree = {}
        for u, nbrs in self._adj.items():
            # self-loop is stored once in _adj[u][u] and counts twice
            self._degree[u] = math.fsum(nbrs.values()) + nbrs.get(u, 0.0)
        self._m = math.fsum(self._degree.values()) / 2.0

    # -- basic views -------------------------------------------------------

    @property
    def node_ids(self) -> tuple[int, ...]:
        """Node ids in ascending order."""
        return self._ids

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, u) -> bool:
        return u in self._coords

    @property
    def n(self) -> int:
        return len(self._ids)

    @property
    def m(self) -> float:
        """Total edge weight (self-loops counted once)."""
        return self._m

    def coord(self, u: int) -> GeoCoord:
        try:
            return self._coords[u]
        except KeyError:
            raise NodeNotFoundError(u) from None

    def coords(self) -> dict[int, GeoCoord]:
        return dict(self._coords)

    def degree(self, u: int) -> float:
        try:
            return self._degree[u]
        except KeyError:
            raise NodeNotFoundError(u) from None

    def neighbors(self, u: int) -> Mapping[int, float]:
        """Neighbor -> weight map (includes ``u`` itself for a self-loop)."""
        try:
            return dict(self._adj[u])
        except KeyError:
            raise NodeNotFoundError(u) from None

    def weight(self, u: int, v: int) -> float:
        """Stored edge weight, 0.0 for non-adjacent pairs."""
        return self._adj.get(u, {}).get(v, 0.0)

    def edges(self) -> list[tuple[int, int, float]]:
        """Each edge once as ``(u, v, w)`` with ``u <= v``, sorted."""
        out = []
        for u in self._ids:
            for v, w in self._adj[u].items():
                if u <= v:
                    out.append((u, v, w))
        out.sort()
        return out

    @property
    def num_edges(self) -> int:
        return sum(1 for u in self._ids for v in self._adj[u] if u <= v)

    def subgraph(self, nodes: Iterable[int]) -> "GeoGraph":
        keep = set(nodes)
        for u in keep:
            if u not in self._coords:
                raise NodeNotFoundError(u)
        coords = {u: self._coords[u] for u in keep}
        edges = {(u, v): w for u, v, w in self.edges() if u in keep and v in keep}
        return GeoGraph(coords, edges)

    # -- array views used by the numerical code ---------------------------

    def degree_array(self) -> np.ndarray:
        return np.array([self._degree[u] for u in self._ids], dtype=float)

    def coord_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        lats = np.array([self._coords[u].lat for u in self._ids], dtype=float)
        lons = np.array([self._coords[u].lon for u in self._ids], dtype=float)
        return lats, lons

    # -- comparison / serialization ---------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, GeoGraph):
            return NotImplemented
        return self._coords == other._coords and self.edges() == other.edges()

    def __repr__(self) -> str:
        return f"GeoGraph(n={self.n}, edges={self.num_edges}, m={self.m:g})"

    def to_dict(self) -> dict:
        return {
            "nodes": [{"id": u, "lat": c.lat, "lon": c.lon} for u, c in self._coords.items()],
            "edges": [{"u": u, "v": v, "w": w} for u, v, w in self.edges()],
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "GeoGraph":
        try:
            coords = {int(r["id"]): GeoCoord(float(r["lat"]), float(r["lon"])) for r in doc["nodes"]}
            edges = {}
            for r in doc["edges"]:
                key = _key(int(r["u"]), int(r["v"]))
                if key in edges:
                    raise DomainError(f"duplicate edge {key}")
                edges[key] = float(r.get("w", 1.0))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"malformed graph document: {exc}") from None
        return cls(coords, edges)


def save_graph(g: GeoGraph, path) -> None:
    """Write ``g`` as the internal JSON format (deterministic bytes)."""
    text = json.dumps(g.to_dict(), indent=1, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_graph(path) -> GeoGraph:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(str(exc), path=path, lineno=exc.lineno) from None
    return GeoGraph.from_dict(doc)


# -- SNAP ingestion --------------------------------------------------------

@dataclass
class IngestReport:
    nodes_read: int = 0
    nodes_dropped_no_location: int = 0
    # located nodes whose every edge went to an unlocated endpoint
    nodes_dropped_isolated: int = 0
    edges_read: int = 0
    edges_dropped_endpoint_missing: int = 0

    def summary(self) -> str:
        return " ".join(f"{k}={v}" for k, v in asdict(self).items())


def load_edge_list(path) -> set[tuple[int, int]]:
    """Read a SNAP edge list into a set of unordered ``(min, max)`` pairs.

    Lines starting with ``#`` and blank lines are skipped. Both directions of
    an undirected edge collapse into one pair; self-pairs are skipped.
    """
    pairs = set()
    self_pairs = 0
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise ParseError(f"expected two node ids, got {len(parts)} fields", path, lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"non-integer node id in {s!r}", path, lineno) from None
            if u < 0 or v < 0:
                raise ParseError(f"negative node id in {s!r}", path, lineno)
            if u == v:
                self_pairs += 1
                continue
            pairs.add(_key(u, v))
    if self_pairs:
        log.warning("%s: skipped %d self-pair line(s)", path, self_pairs)
    return pairs


def load_checkins(path) -> dict[int, GeoCoord]:
    """One representative coordinate per user from a SNAP check-in file.

    Check-ins at exactly (0, 0) are placeholders and are discarded. The
    representative point is the spherical mean of the remaining check-ins.
    """
    points: dict[int, list[tuple[float, float]]] = defaultdict(list)
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.rstrip("\r\n")
            if not s.strip() or s.startswith("#"):
                continue
            parts = s.split("\t")
            if len(parts) != 5:
                parts = s.split()
            if len(parts) != 5:
                raise ParseError(f"expected 5 tab-separated fields, got {len(parts)}", path, lineno)
            user, _ts, lat_s, lon_s, _loc = parts
            try:
                u = int(user)
                lat, lon = float(lat_s), float(lon_s)
            except ValueError:
                raise ParseError(f"bad user id or coordinate in {s!r}", path, lineno) from None
            if not (math.isfinite(lat) and math.isfinite(lon)):
                raise ParseError("non-finite coordinate", path, lineno)
            if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
                raise ParseError(f"coordinate ({lat}, {lon}) out of range", path, lineno)
            if lat == 0.0 and lon == 0.0:
                continue
            points[u].append((lat, lon))

    out = {}
    for u in sorted(points):
        pts = np.asarray(sorted(points[u]))
        if len(pts) == 1:
            out[u] = GeoCoord(float(pts[0, 0]), float(pts[0, 1]))
        else:
            out[u] = from_vector(to_unit_vectors(pts[:, 0], pts[:, 1]).sum(axis=0))
    return out


def build_graph(pairs: Iterable[tuple[int, int]],
                locations: Mapping[int, GeoCoord],
                weights: Mapping[tuple[int, int], float] | None = None) -> tuple[GeoGraph, IngestReport]:
    """Assemble a GeoGraph from edge pairs and node locations.

    Edges with an endpoint lacking a location are dropped and counted; nodes
    are kept only if located and incident to at least one surviving edge.
    """
    report = IngestReport()
    seen_nodes = set()
    edges = {}
    for u, v in pairs:
        report.edges_read += 1
        seen_nodes.update((u, v))
        key = _key(u, v)
        if u not in locations or v not in locations:
            report.edges_dropped_endpoint_missing += 1
            continue
        w = 1.0
        if weights is not None:
            w = weights.get(key, weights.get((key[1], key[0]), 1.0))
        edges[key] = w

    report.nodes_read = len(seen_nodes)
    report.nodes_dropped_no_location = sum(1 for u in seen_nodes if u not in locations)
    kept = {u for e in edges for u in e}
    report.nodes_dropped_isolated = report.nodes_read - report.nodes_dropped_no_location - len(kept)
    coords = {u: locations[u] for u in kept}
    return GeoGraph(coords, edges), report
