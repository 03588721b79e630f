"""Topology sampling: Poisson point processes on a square region, D2D
pairing, ordered nearest-SBS distances and per-SBS service loads.

The region is a torus by default (wrap-around distances) so interference
statistics have no edge effects; ``boundary="truncated"`` keeps plain
Euclidean distances.  All sampling is driven by an explicit numpy Generator.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .params import SystemParams
from .popularity import CLUSTER, MISS


def region_side(area: float) -> float:
    return math.sqrt(area)


def metric_length(params: SystemParams) -> float:
    """Torus side length for distance computations; 0 disables wrapping."""
    return region_side(params.area) if params.boundary == "torus" else 0.0


def sample_ppp(density: float, area: float, rng: np.random.Generator) -> np.ndarray:
    """Sample a homogeneous PPP: Poisson(density*area) points uniform on the
    square region.  Returns an (n, 2) array (possibly empty)."""
    if density < 0.0 or area < 0.0:
        raise ValueError("density and area must be non-negative")
    n = rng.poisson(density * area)
    side = region_side(area)
    return rng.uniform(0.0, side, size=(n, 2))


@dataclass(frozen=True)
class Pairing:
    """D2D pairing of a user set: which users are paired, where their peers
    sit and the pair distances."""

    paired: np.ndarray    # bool mask over users
    peer_xy: np.ndarray   # (n_paired, 2) peer positions (torus-wrapped)
    distance: np.ndarray  # (n_paired,) pair distances, all < r_d_max

    @property
    def n_paired(self) -> int:
        return int(self.paired.sum())


def pair_users(users: np.ndarray, delta: float, r_d_max: float, side: float,
               rng: np.random.Generator) -> Pairing:
    """Designate a delta fraction of users (rounded) as paired and place each
    peer uniformly in the disk of radius r_d_max around its user, so the
    pair distance has density 2r/r_d_max**2."""
    if not (0.0 <= delta <= 1.0):
        raise ValueError(f"delta out of range [0, 1]: {delta}")
    n = len(users)
    n_paired = round(delta * n)
    paired = np.zeros(n, dtype=bool)
    paired[:n_paired] = True
    r = r_d_max * np.sqrt(rng.uniform(size=n_paired))
    theta = rng.uniform(0.0, 2.0 * math.pi, size=n_paired)
    peer = users[:n_paired] + np.stack([r * np.cos(theta), r * np.sin(theta)], axis=1)
    if side > 0.0:
        peer %= side
    return Pairing(paired=paired, peer_xy=peer, distance=r)


def ordered_sbs_distances(point, sbs_xy: np.ndarray, k: int, length: float = 0.0):
    """The k smallest SBS distances from ``point``, ascending, with indices."""
    n = len(sbs_xy)
    if k > n:
        raise ValueError(f"requested {k} nearest of only {n} SBS")
    d, ix = kernels.knearest(np.asarray(point, dtype=float).reshape(1, 2),
                             sbs_xy, k, length)
    return d[0], ix[0]


@dataclass
class NetworkDrop:
    """One sampled topology realization."""

    sbs_xy: np.ndarray
    user_xy: np.ndarray
    pairing: Pairing
    # per-user association available after associate_and_load()
    serving: np.ndarray | None = None       # serving SBS index per user (-1 if none)
    serving_rank: np.ndarray | None = None  # 1-based distance order of serving SBS
    serving_dist: np.ndarray | None = None
    load_cellular: np.ndarray | None = None  # N_C per SBS
    load_backhaul: np.ndarray | None = None  # N_B per SBS


def sample_drop(params: SystemParams, rng: np.random.Generator) -> NetworkDrop:
    """Sample SBS and user positions plus the D2D pairing."""
    sbs = sample_ppp(params.sbs_density_lambda_BS, params.area, rng)
    users = sample_ppp(params.ue_density_lambda_UE, params.area, rng)
    pairing = pair_users(users, params.paired_fraction_delta,
                         params.max_d2d_distance, region_side(params.area), rng)
    return NetworkDrop(sbs_xy=sbs, user_xy=users, pairing=pairing)


def associate_and_load(drop: NetworkDrop, categories: np.ndarray, k_cluster: int,
                       length: float, rng: np.random.Generator) -> NetworkDrop:
    """Attach cellular-active users to SBSs and count per-SBS loads.

    Miss users attach to their nearest SBS; cluster users attach uniformly at
    random to one of their ``k_cluster`` nearest (every cluster SBS holds an
    equal popularity share, so each is equally likely to own the request).
    The cellular load N_C counts miss plus cluster users, the backhaul load
    N_B counts miss users only.
    """
    n_users = len(drop.user_xy)
    n_sbs = len(drop.sbs_xy)
    serving = np.full(n_users, -1, dtype=np.int64)
    serving_rank = np.zeros(n_users, dtype=np.int64)
    serving_dist = np.full(n_users, np.nan)
    load_c = np.zeros(n_sbs, dtype=np.int64)
    load_b = np.zeros(n_sbs, dtype=np.int64)

    active = np.flatnonzero((categories == MISS) | (categories == CLUSTER))
    if n_sbs > 0 and len(active) > 0:
        k = min(k_cluster, n_sbs)
        dists, idx = kernels.knearest(drop.user_xy[active], drop.sbs_xy, k, length)
        is_cluster = categories[active] == CLUSTER
        pick = np.zeros(len(active), dtype=np.int64)
        pick[is_cluster] = rng.integers(0, k, size=int(is_cluster.sum()))
        rows = np.arange(len(active))
        serving[active] = idx[rows, pick]
        serving_rank[active] = pick + 1
        serving_dist[active] = dists[rows, pick]
        load_c = np.bincount(serving[active], minlength=n_sbs).astype(np.int64)
        miss_serving = serving[active[~is_cluster]]
        load_b = np.bincount(miss_serving, minlength=n_sbs).astype(np.int64)

    drop.serving = serving
    drop.serving_rank = serving_rank
    drop.serving_dist = serving_dist
    drop.load_cellular = load_c
    drop.load_backhaul = load_b
    return drop


def drop_to_rows(drop: NetworkDrop):
    """Flatten a drop to CSV-ready rows: kind, x, y, pair_id."""
    rows = []
    for i, (x, y) in enumerate(drop.sbs_xy):
        rows.append(("sbs", float(x), float(y), -1))
    peer_of = np.flatnonzero(drop.pairing.paired)
    for i, (x, y) in enumerate(drop.user_xy):
        pair_id = i if drop.pairing.paired[i] else -1
        rows.append(("user", float(x), float(y), pair_id))
    for j, i in enumerate(peer_of):
        x, y = drop.pairing.peer_xy[j]
        rows.append(("peer", float(x), float(y), int(i)))
    return rows
