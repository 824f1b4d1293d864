"""Great-circle distances, distance-decay kernels and spherical centroids."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import DegenerateCentroidError, DomainError

EARTH_RADIUS_KM = 6371.0

# Below this norm a weighted sum of unit vectors has no usable direction.
_DEGENERATE_NORM = 1e-12


class GeoCoord(NamedTuple):
    lat: float
    lon: float

    def validate(self) -> "GeoCoord":
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise DomainError(f"non-finite coordinate {self!r}")
        if not -90.0 <= self.lat <= 90.0:
            raise DomainError(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise DomainError(f"longitude {self.lon} outside [-180, 180]")
        return self


def haversine_km(a: GeoCoord, b: GeoCoord) -> float:
    """Great-circle distance between two coordinates in kilometers."""
    lat1, lon1 = math.radians(a[0]), math.radians(a[1])
    lat2, lon2 = math.radians(b[0]), math.radians(b[1])
    h = (math.sin((lat2 - lat1) / 2.0) ** 2
         + math.cos(lat1) * math.cos(lat2) * math.sin((lon2 - lon1) / 2.0) ** 2)
    # rounding can push h a hair above 1 for antipodal points
    h = min(1.0, max(0.0, h))
    return 2.0 * EARTH_RADIUS_KM * math.asin(math.sqrt(h))


def haversine_matrix(lats: np.ndarray, lons: np.ndarray) -> np.ndarray:
    """All-pairs haversine distances (km) for coordinate arrays in degrees."""
    lat = np.radians(np.asarray(lats, dtype=float))
    lon = np.radians(np.asarray(lons, dtype=float))
    dlat = lat[:, None] - lat[None, :]
    dlon = lon[:, None] - lon[None, :]
    h = (np.sin(dlat / 2.0) ** 2
         + np.cos(lat)[:, None] * np.cos(lat)[None, :] * np.sin(dlon / 2.0) ** 2)
    np.clip(h, 0.0, 1.0, out=h)
    d = 2.0 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(h))
    # mirror the upper triangle so symmetry is exact regardless of libm
    upper = np.triu(d, 1)
    return upper + upper.T


@dataclass(frozen=True)
class DecayKernel:
    """Distance-decay function ``f(x) = exp(-(x / sigma)**2)`` or the constant 1.

    The constant kernel is the ``sigma -> inf`` limit, under which distance
    modularity collapses to Newman-Girvan modularity.
    """

    kind: str
    sigma: float | None = None

    def __post_init__(self):
        if self.kind == "exponential":
            if self.sigma is None or not math.isfinite(self.sigma) or self.sigma <= 0:
                raise DomainError(f"exponential kernel needs finite sigma > 0, got {self.sigma!r}")
        elif self.kind == "constant":
            if self.sigma is not None:
                raise DomainError("constant kernel takes no sigma")
        else:
            raise DomainError(f"unknown kernel kind {self.kind!r}")

    @classmethod
    def exponential(cls, sigma: float) -> "DecayKernel":
        return cls("exponential", float(sigma))

    @classmethod
    def constant(cls) -> "DecayKernel":
        return cls("constant")

    def __call__(self, x):
        return decay(self, x)

    def label(self) -> str:
        return "constant" if self.kind == "constant" else f"exp(sigma={self.sigma:g})"


def decay(kernel: DecayKernel, x):
    """Evaluate the kernel at distance ``x`` (scalar or array, km)."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("decay is defined for distances >= 0 only")
    if kernel.kind == "constant":
        out = np.ones_like(arr)
    else:
        out = np.exp(-np.square(arr / kernel.sigma))
    if out.ndim == 0:
        return float(out)
    return out


def to_unit_vectors(lats, lons) -> np.ndarray:
    """Convert degree coordinates to an ``(n, 3)`` array of unit vectors."""
    lat = np.radians(np.asarray(lats, dtype=float))
    lon = np.radians(np.asarray(lons, dtype=float))
    return np.column_stack((np.cos(lat) * np.cos(lon),
                            np.cos(lat) * np.sin(lon),
                            np.sin(lat)))


def from_vector(v: Sequence[float]) -> GeoCoord:
    """Direction of a (not necessarily unit) 3-vector as a coordinate.

    Raises DegenerateCentroidError when the vector is too short to define a
    direction, e.g. the sum of two antipodal points.
    """
    x, y, z = (float(c) for c in v)
    norm = math.sqrt(x * x + y * y + z * z)
    if norm < _DEGENERATE_NORM:
        raise DegenerateCentroidError(f"centroid undefined: vector norm {norm:.3g}")
    lat = math.degrees(math.atan2(z, math.hypot(x, y)))
    lon = math.degrees(math.atan2(y, x))
    return GeoCoord(lat, lon)


def centroid(points: Iterable[GeoCoord], multiplicities: Iterable[int] | None = None) -> GeoCoord:
    """Multiplicity-weighted spherical mean of ``points``."""
    pts = list(points)
    if not pts:
        raise DomainError("centroid of an empty point set")
    if multiplicities is None:
        mult = np.ones(len(pts))
    else:
        mult = np.asarray(list(multiplicities), dtype=float)
        if mult.shape != (len(pts),):
            raise DomainError("one multiplicity per point is required")
        if np.any(mult < 1):
            raise DomainError("multiplicities must be >= 1")
    if len(pts) == 1:
        return GeoCoord(float(pts[0][0]), float(pts[0][1]))
    arr = np.asarray(pts, dtype=float)
    # sort rows so that the float sum does not depend on input order
    vecs = to_unit_vectors(arr[:, 0], arr[:, 1]) * mult[:, None]
    order = np.lexsort(vecs.T[::-1])
    return from_vector(vecs[order].sum(axis=0))


class DistanceMatrix:
    """Symmetric table of pairwise great-circle distances (km)."""

    __slots__ = ("node_ids", "_index", "values")

    def __init__(self, node_ids: Sequence[int], values: np.ndarray):
        values = np.asarray(values, dtype=float)
        n = len(node_ids)
        if values.shape != (n, n):
            raise DomainError(f"distance matrix shape {values.shape} does not match {n} nodes")
        self.node_ids = tuple(node_ids)
        self._index = {u: i for i, u in enumerate(self.node_ids)}
        values.setflags(write=False)
        self.values = values

    def __len__(self):
        return len(self.node_ids)

    def __call__(self, u: int, v: int) -> float:
        return float(self.values[self._index[u], self._index[v]])

    def index(self, u: int) -> int:
        return self._index[u]


def distance_matrix(g) -> DistanceMatrix:
    """All-pairs distance table for the nodes of a GeoGraph."""
    ids = g.node_ids
    lats = [g.coord(u).lat for u in ids]
    lons = [g.coord(u).lon for u in ids]
    return DistanceMatrix(ids, haversine_matrix(lats, lons))
