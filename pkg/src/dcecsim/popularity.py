"""Zipf content popularity, cache placement and backhaul offloading math.

Two placement policies:

* ``DCEC`` -- the cooperative policy: the 2*Cu most popular contents are split
  across a user pair (alternating by rank), the next K*Cs across the K
  cluster SBSs (round-robin by rank).
* ``MPC`` -- most-popular baseline: the user caches ranks 1..Cu, its
  associated SBS ranks Cu+1..Cu+Cs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# request categories, also used by the simulator
LOCAL, D2D, CLUSTER, MISS = 0, 1, 2, 3

POLICIES = ("DCEC", "MPC")


@dataclass(frozen=True)
class ContentCatalog:
    """Rank-ordered Zipf popularity over a finite content library."""

    size: int
    skewness: float
    probs: np.ndarray  # shape (size,), non-increasing, sums to 1

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.probs)


def zipf_popularity(size: int, xi: float) -> ContentCatalog:
    """Zipf popularity vector q_i = i**-xi / sum_j j**-xi, ranks 1..size."""
    if size < 1:
        raise ValueError(f"catalog size must be >= 1, got {size}")
    if xi < 0.0:
        raise ValueError(f"skewness must be >= 0, got {xi}")
    ranks = np.arange(1, size + 1, dtype=float)
    weights = ranks ** (-xi)
    probs = weights / weights.sum()
    probs.setflags(write=False)
    return ContentCatalog(size=size, skewness=xi, probs=probs)


@dataclass(frozen=True)
class CacheConfig:
    """Per-node cache capacities (integer content counts) and cluster size."""

    user_capacity: int
    sbs_capacity: int
    cluster_size: int

    def __post_init__(self):
        if self.user_capacity < 0 or self.sbs_capacity < 0:
            raise ValueError("cache capacities must be non-negative")
        if self.cluster_size < 1:
            raise ValueError(f"cluster size must be >= 1, got {self.cluster_size}")


def _check_dcec_fit(catalog: ContentCatalog, cache: CacheConfig) -> None:
    need = 2 * cache.user_capacity + cache.cluster_size * cache.sbs_capacity
    if need > catalog.size:
        raise ValueError(
            f"cache capacity overflow: 2*Cu + K*Cs = {need} exceeds "
            f"catalog size {catalog.size}"
        )


def _check_mpc_fit(catalog: ContentCatalog, cache: CacheConfig) -> None:
    need = cache.user_capacity + cache.sbs_capacity
    if need > catalog.size:
        raise ValueError(
            f"cache capacity overflow: Cu + Cs = {need} exceeds "
            f"catalog size {catalog.size}"
        )


def dcec_hit_ratios(catalog: ContentCatalog, cache: CacheConfig):
    """Hit ratios (h_p, h_u, h_s) of a paired user, an unpaired user and one
    cluster SBS under the cooperative placement."""
    _check_dcec_fit(catalog, cache)
    cu, cs, k = cache.user_capacity, cache.sbs_capacity, cache.cluster_size
    cum = np.concatenate(([0.0], np.cumsum(catalog.probs)))
    h_p = 0.5 * cum[2 * cu]
    h_u = cum[cu]
    h_s = (cum[2 * cu + k * cs] - cum[2 * cu]) / k
    return float(h_p), float(h_u), float(h_s)


def offloading_gain_dcec(h_u: float, h_p: float, h_s: float, k: int,
                         delta: float) -> float:
    """Average fraction of traffic served by edge caches under cooperation:
    F = h_u*(1-delta) + 2*h_p*delta + K*h_s."""
    for name, v in (("h_u", h_u), ("h_p", h_p), ("h_s", h_s), ("delta", delta)):
        if not (0.0 <= v <= 1.0):
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    return h_u * (1.0 - delta) + 2.0 * h_p * delta + k * h_s


def offloading_gain_mpc(catalog: ContentCatalog, cache: CacheConfig) -> float:
    """Offloading gain of the most-popular baseline: mass of ranks 1..Cu+Cs."""
    _check_mpc_fit(catalog, cache)
    return float(np.sum(catalog.probs[: cache.user_capacity + cache.sbs_capacity]))


def miss_probability(f: float) -> float:
    """P_m = 1 - F."""
    if not (0.0 <= f <= 1.0):
        raise ValueError(f"offloading gain must lie in [0, 1], got {f}")
    return 1.0 - f


@dataclass(frozen=True)
class RequestProbabilities:
    """Where a random request lands: own cache, D2D peer, SBS cluster, miss."""

    p_local: float
    p_d2d: float
    p_cluster: float
    p_miss: float

    def __post_init__(self):
        total = self.p_local + self.p_d2d + self.p_cluster + self.p_miss
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"request probabilities must sum to 1, got {total}")
        for v in (self.p_local, self.p_d2d, self.p_cluster, self.p_miss):
            if v < -1e-12:
                raise ValueError(f"request probability out of range: {v}")


def request_probabilities(catalog: ContentCatalog, cache: CacheConfig,
                          delta: float, policy: str = "DCEC") -> RequestProbabilities:
    """Population-averaged request-category probabilities.

    DCEC: P_s = K*h_s, P_d = delta*h_p, P_m = 1 - F and the local residual
    F - P_s - P_d.  MPC: the SBS tier behaves like a cluster of one.
    """
    if policy not in POLICIES:
        raise ValueError(f"unknown policy: {policy!r}")
    if policy == "MPC":
        _check_mpc_fit(catalog, cache)
        cum = np.concatenate(([0.0], np.cumsum(catalog.probs)))
        p_local = float(cum[cache.user_capacity])
        p_sbs = float(cum[cache.user_capacity + cache.sbs_capacity] - cum[cache.user_capacity])
        return RequestProbabilities(
            p_local=p_local, p_d2d=0.0, p_cluster=p_sbs,
            p_miss=1.0 - p_local - p_sbs,
        )
    h_p, h_u, h_s = dcec_hit_ratios(catalog, cache)
    f = offloading_gain_dcec(h_u, h_p, h_s, cache.cluster_size, delta)
    p_s = cache.cluster_size * h_s
    p_d = delta * h_p
    return RequestProbabilities(
        p_local=f - p_s - p_d, p_d2d=p_d, p_cluster=p_s, p_miss=1.0 - f,
    )


@dataclass(frozen=True)
class CachePlacement:
    """Explicit content-to-node assignment plus derived hit ratios.

    Rank sets are 1-based numpy arrays.  ``category_tables`` maps a cache
    role (``paired_a``, ``paired_b``, ``unpaired``) to an int8 array over
    ranks 0..size (index 0 unused) with values LOCAL/D2D/CLUSTER/MISS.
    """

    policy: str
    user_set_a: np.ndarray
    user_set_b: np.ndarray
    sbs_sets: tuple
    h_p: float
    h_u: float
    h_s: float
    category_tables: dict

    @property
    def cluster_size(self) -> int:
        return len(self.sbs_sets)


def build_placement(catalog: ContentCatalog, cache: CacheConfig,
                    policy: str = "DCEC") -> CachePlacement:
    """Deal content ranks to nodes and precompute request-category tables."""
    if policy not in POLICIES:
        raise ValueError(f"unknown policy: {policy!r}")
    size = catalog.size
    cu, cs, k = cache.user_capacity, cache.sbs_capacity, cache.cluster_size

    if policy == "MPC":
        _check_mpc_fit(catalog, cache)
        set_a = np.arange(1, cu + 1)
        set_b = np.empty(0, dtype=int)
        sbs_sets = (np.arange(cu + 1, cu + cs + 1),)
        cum = np.concatenate(([0.0], np.cumsum(catalog.probs)))
        h_u = float(cum[cu])
        h_s = float(cum[cu + cs] - cum[cu])
        table = np.full(size + 1, MISS, dtype=np.int8)
        table[set_a] = LOCAL
        table[sbs_sets[0]] = CLUSTER
        tables = {"paired_a": table, "paired_b": table, "unpaired": table}
        return CachePlacement(policy=policy, user_set_a=set_a, user_set_b=set_b,
                              sbs_sets=sbs_sets, h_p=0.0, h_u=h_u, h_s=h_s,
                              category_tables=tables)

    _check_dcec_fit(catalog, cache)
    pair_ranks = np.arange(1, 2 * cu + 1)
    set_a = pair_ranks[0::2]  # ranks 1, 3, 5, ...
    set_b = pair_ranks[1::2]  # ranks 2, 4, 6, ...
    cluster_ranks = np.arange(2 * cu + 1, 2 * cu + k * cs + 1)
    sbs_sets = tuple(cluster_ranks[i::k] for i in range(k))
    h_p, h_u, h_s = dcec_hit_ratios(catalog, cache)

    table_a = np.full(size + 1, MISS, dtype=np.int8)
    table_a[set_a] = LOCAL
    table_a[set_b] = D2D
    table_a[cluster_ranks] = CLUSTER
    table_b = np.full(size + 1, MISS, dtype=np.int8)
    table_b[set_b] = LOCAL
    table_b[set_a] = D2D
    table_b[cluster_ranks] = CLUSTER
    # unpaired users hold only the Cu most popular contents
    table_u = np.full(size + 1, MISS, dtype=np.int8)
    table_u[1:cu + 1] = LOCAL
    table_u[cluster_ranks] = CLUSTER
    tables = {"paired_a": table_a, "paired_b": table_b, "unpaired": table_u}
    return CachePlacement(policy=policy, user_set_a=set_a, user_set_b=set_b,
                          sbs_sets=sbs_sets, h_p=h_p, h_u=h_u, h_s=h_s,
                          category_tables=tables)


def placement_mass(catalog: ContentCatalog, ranks: np.ndarray) -> float:
    """Total popularity mass of a 1-based rank set."""
    if len(ranks) == 0:
        return 0.0
    return float(np.sum(catalog.probs[np.asarray(ranks) - 1]))
