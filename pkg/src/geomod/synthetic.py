"""Synthetic location-based social networks in SNAP file format.

Used for demos and tests when the public check-in datasets are not at hand.
Users live around cities of Zipf-distributed size; ties are mostly local,
partly inside interest groups that span cities, and occasionally random.
Each user gets a handful of check-ins near home, some while travelling, and
the odd (0, 0) placeholder the real data also contains.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

# continental-US-sized box
LAT_RANGE = (26.0, 48.0)
LON_RANGE = (-122.0, -72.0)
KM_PER_DEG = 111.2


@dataclass
class SyntheticNetwork:
    pairs: set
    checkins: list          # (user, timestamp, lat, lon, location id)
    home: dict              # user -> (lat, lon)
    city: np.ndarray
    group: np.ndarray


def _jitter(rng, lat, lon, km):
    dlat = rng.normal(0.0, km / KM_PER_DEG)
    dlon = rng.normal(0.0, km / (KM_PER_DEG * max(0.2, math.cos(math.radians(lat)))))
    return (float(np.clip(lat + dlat, -89.9, 89.9)),
            float((lon + dlon + 180.0) % 360.0 - 180.0))


def generate(n_users=3000, n_cities=25, n_groups=60, mean_degree=8.0,
             p_local=0.55, p_group=0.35, city_km=20.0, seed=0) -> SyntheticNetwork:
    rng = np.random.default_rng(seed)
    centers = np.column_stack((rng.uniform(*LAT_RANGE, n_cities), rng.uniform(*LON_RANGE, n_cities)))
    pop = 1.0 / np.arange(1, n_cities + 1) ** 0.9
    city = rng.choice(n_cities, size=n_users, p=pop / pop.sum())
    group = rng.integers(n_groups, size=n_users)
    activity = rng.pareto(2.5, size=n_users) + 1.0

    home = {}
    for u in range(n_users):
        home[u] = _jitter(rng, centers[city[u], 0], centers[city[u], 1], city_km)

    by_city = [np.flatnonzero(city == c) for c in range(n_cities)]
    by_group = [np.flatnonzero(group == k) for k in range(n_groups)]

    def pick(pool):
        w = activity[pool]
        return int(pool[rng.choice(len(pool), p=w / w.sum())])

    pairs = set()
    stubs = rng.poisson(mean_degree / 2.0 * activity / activity.mean())
    for u in range(n_users):
        for _ in range(int(stubs[u])):
            r = rng.random()
            if r < p_local:
                v = pick(by_city[city[u]])
            elif r < p_local + p_group:
                v = pick(by_group[group[u]])
            else:
                v = int(rng.integers(n_users))
            if v != u:
                pairs.add((min(u, v), max(u, v)))

    t0 = datetime(2009, 1, 1, tzinfo=timezone.utc)
    checkins = []
    for u in range(n_users):
        if rng.random() < 0.03:
            continue  # never checked in
        for _ in range(1 + rng.poisson(4)):
            r = rng.random()
            if r < 0.02:
                lat, lon = 0.0, 0.0
            elif r < 0.08:
                c = rng.integers(n_cities)
                lat, lon = _jitter(rng, centers[c, 0], centers[c, 1], city_km)
            else:
                lat, lon = _jitter(rng, *home[u], 3.0)
            ts = t0 + timedelta(minutes=int(rng.integers(0, 500_000)))
            loc = f"{zlib.crc32(f'{lat:.3f},{lon:.3f}'.encode()):08x}"
            checkins.append((u, ts.strftime("%Y-%m-%dT%H:%M:%SZ"), lat, lon, loc))
    return SyntheticNetwork(pairs, checkins, home, city, group)


def write_snap(net: SyntheticNetwork, outdir) -> tuple[Path, Path]:
    """Write ``edges.txt`` (both directions, like SNAP) and ``checkins.txt``."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    edges = out / "edges.txt"
    with open(edges, "w", encoding="utf-8") as fh:
        fh.write("# synthetic location-based social network\n")
        for u, v in sorted(net.pairs):
            fh.write(f"{u}\t{v}\n{v}\t{u}\n")
    checkins = out / "checkins.txt"
    with open(checkins, "w", encoding="utf-8") as fh:
        for u, ts, lat, lon, loc in net.checkins:
            fh.write(f"{u}\t{ts}\t{lat:.6f}\t{lon:.6f}\t{loc}\n")
    return edges, checkins
