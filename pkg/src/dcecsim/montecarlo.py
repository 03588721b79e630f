"""Drop-based Monte Carlo simulator.

Each drop samples a fresh topology, request pattern and fading realization,
then measures one tagged "typical" user per service class: SINR with every
co-band transmitter interfering, TDMA share of the realized serving-cell
load, and the backhaul split of the serving SBS.  Per-drop randomness comes
from a seed derived as (base_seed, drop_index), so results are reproducible
for any execution order or worker count.
"""
from __future__ import annotations

import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .antenna import average_gain
from .geometry import associate_and_load, metric_length, sample_drop
from .params import SystemParams, pathloss_constant
from .popularity import (CLUSTER, D2D, LOCAL, MISS, CachePlacement,
                         ContentCatalog, RequestProbabilities)

INTERFERENCE_MODES = ("sampled", "mean_gain")


@dataclass(frozen=True)
class DropResult:
    """Per-link-class samples from one drop (nan where the class was empty)."""

    rate_nearest: float
    rate_cluster: float
    rate_d2d: float
    backhaul_share: float
    interf_nearest: float
    load_nearest: int       # cellular load of the tagged miss user's SBS
    load_cluster: int       # cellular load of the tagged cluster user's SBS
    load_backhaul: int      # backhaul load of the tagged miss user's SBS
    load_backhaul_mean: float
    load_cellular_mean: float
    delay: float
    n_sbs: int
    n_users: int
    n_local: int
    n_d2d: int
    n_cluster: int
    n_miss: int


@dataclass(frozen=True)
class Stat:
    """Mean, 95% CI half-width (1.96 * stderr) and sample count."""

    mean: float
    ci: float
    count: int

    @property
    def stderr(self) -> float:
        return self.ci / 1.96 if self.count > 0 else math.nan


@dataclass(frozen=True)
class SimulationSummary:
    n_drops: int
    base_seed: int
    nearest: Stat
    cluster: Stat
    d2d: Stat
    backhaul: Stat
    load_backhaul: Stat
    load_cellular: Stat
    delay: Stat
    fingerprint: str


def _interference(params: SystemParams, pattern, dists, skip: int, rng,
                  mode: str, fading: bool, tx_power: float) -> float:
    """Summed interference power from transmitters at the given distances,
    excluding index ``skip`` (guard radius d0 applies)."""
    n = len(dists)
    if n == 0:
        return 0.0
    c = pathloss_constant(params)
    h = rng.exponential(size=n) if fading else np.ones(n)
    if mode == "sampled":
        theta_t = rng.uniform(-math.pi, math.pi, size=n)
        theta_r = rng.uniform(-math.pi, math.pi, size=n)
        p = pattern
        return kernels.interference_sum(
            dists, skip, theta_t, theta_r, h, p.main_gain, p.side_gain,
            p.halfpower_bw, p.mainlobe_bw, p.rolloff, params.ref_distance_d0,
            params.pathloss_exp_alpha, tx_power * c)
    # mean-field mode: every interfering link carries the squared mean gain
    g2 = average_gain(pattern, params.average_gain_convention) ** 2
    keep = np.arange(n) != skip
    r = np.maximum(dists[keep], params.ref_distance_d0)
    if len(r) == 0:
        return 0.0
    terms = h[keep] * r ** (-params.pathloss_exp_alpha)
    return float(tx_power * c * g2 * np.cumsum(terms)[-1])


def _cellular_rate(params: SystemParams, drop, user_idx: int, rng,
                   mode: str, fading: bool):
    """(rate, interference) for one tagged cellular user."""
    alpha = params.pathloss_exp_alpha
    d0 = params.ref_distance_d0
    serving = drop.serving[user_idx]
    r_serve = max(drop.serving_dist[user_idx], d0)
    h1 = rng.exponential()
    c = pathloss_constant(params)
    s = (params.sbs_tx_power_PB * params.sbs_antenna.main_gain ** 2
         * h1 * c * r_serve ** (-alpha))
    dists = kernels.alldist(drop.user_xy[user_idx], drop.sbs_xy,
                            metric_length(params))
    interf = _interference(params, params.sbs_antenna, dists, int(serving),
                           rng, mode, fading, params.sbs_tx_power_PB)
    band = (1.0 - params.d2d_fraction_phi) * params.bandwidth_W
    sigma2 = band * params.noise_psd_No
    n_cell = drop.load_cellular[serving]
    rate = band / n_cell * math.log2(1.0 + s / (interf + sigma2))
    return rate, interf


def link_rate(band: float, n_share: int, signal: float, interference: float,
              noise: float) -> float:
    """Shannon-form rate of one link given its TDMA share of the band."""
    return band / n_share * math.log2(1.0 + signal / (interference + noise))


def simulate_drop(params: SystemParams, catalog: ContentCatalog,
                  placement: CachePlacement, probs: RequestProbabilities,
                  rng: np.random.Generator,
                  interference_mode: str = "sampled",
                  interference_fading: bool = True) -> DropResult:
    """Run one drop and sample per-class rates at tagged typical users."""
    if interference_mode not in INTERFERENCE_MODES:
        raise ValueError(f"unknown interference mode: {interference_mode!r}")
    drop = sample_drop(params, rng)
    n_users = len(drop.user_xy)
    n_sbs = len(drop.sbs_xy)
    k_cluster = placement.cluster_size

    # request ranks and cache roles decide each user's service class
    n_paired = drop.pairing.n_paired
    side_b = np.zeros(n_users, dtype=bool)
    side_b[:n_paired] = rng.integers(0, 2, size=n_paired).astype(bool)
    cum = np.concatenate(([0.0], np.cumsum(catalog.probs)))
    ranks = np.searchsorted(cum, rng.uniform(size=n_users), side="right")
    ranks = np.clip(ranks, 1, len(cum) - 1)
    categories = np.empty(n_users, dtype=np.int8)
    paired = drop.pairing.paired
    tab = placement.category_tables
    categories[~paired] = tab["unpaired"][ranks[~paired]]
    pa = paired & ~side_b
    pb = paired & side_b
    categories[pa] = tab["paired_a"][ranks[pa]]
    categories[pb] = tab["paired_b"][ranks[pb]]

    if n_sbs > 0:
        associate_and_load(drop, categories, k_cluster, metric_length(params), rng)

    miss_ix = np.flatnonzero(categories == MISS)
    cluster_ix = np.flatnonzero(categories == CLUSTER)
    d2d_ix = np.flatnonzero(categories == D2D)

    rate_n = rate_c = rate_d = share_b = interf_n = math.nan
    load_n = load_c = load_b = 0
    if n_sbs > 0 and len(miss_ix) > 0:
        tag = miss_ix[rng.integers(0, len(miss_ix))]
        rate_n, interf_n = _cellular_rate(params, drop, tag, rng,
                                          interference_mode, interference_fading)
        serving = drop.serving[tag]
        load_n = int(drop.load_cellular[serving])
        load_b = int(drop.load_backhaul[serving])
        share_b = params.backhaul_capacity_B / load_b
    if n_sbs > 0 and len(cluster_ix) > 0:
        tag = cluster_ix[rng.integers(0, len(cluster_ix))]
        rate_c, _ = _cellular_rate(params, drop, tag, rng,
                                   interference_mode, interference_fading)
        load_c = int(drop.load_cellular[drop.serving[tag]])
    if len(d2d_ix) > 0:
        tag = d2d_ix[rng.integers(0, len(d2d_ix))]
        rate_d = _d2d_rate(params, drop, d2d_ix, tag, rng,
                           interference_mode, interference_fading)

    delay = _drop_delay(params, probs, share_b, rate_n, rate_c, rate_d)
    return DropResult(
        rate_nearest=rate_n, rate_cluster=rate_c, rate_d2d=rate_d,
        backhaul_share=share_b, interf_nearest=interf_n,
        load_nearest=load_n, load_cluster=load_c, load_backhaul=load_b,
        load_backhaul_mean=float(np.mean(drop.load_backhaul)) if n_sbs else math.nan,
        load_cellular_mean=float(np.mean(drop.load_cellular)) if n_sbs else math.nan,
        delay=delay, n_sbs=n_sbs, n_users=n_users,
        n_local=int(np.sum(categories == LOCAL)), n_d2d=len(d2d_ix),
        n_cluster=len(cluster_ix), n_miss=len(miss_ix),
    )


def _d2d_rate(params: SystemParams, drop, d2d_ix, tag: int, rng,
              mode: str, fading: bool) -> float:
    """Rate of the tagged D2D receiver; every other busy pair interferes."""
    alpha = params.pathloss_exp_alpha
    d0 = params.ref_distance_d0
    # paired users occupy rows 0..n_paired-1 of the peer arrays
    r_d = max(drop.pairing.distance[tag], d0)
    h1 = rng.exponential()
    c = pathloss_constant(params)
    s = (params.ue_tx_power_PU * params.ue_antenna.main_gain ** 2
         * h1 * c * r_d ** (-alpha))
    others = d2d_ix[d2d_ix != tag]
    if len(others) > 0:
        tx_xy = drop.pairing.peer_xy[others]
        dists = kernels.alldist(drop.user_xy[tag], tx_xy, metric_length(params))
    else:
        dists = np.empty(0)
    interf = _interference(params, params.ue_antenna, dists, -1, rng, mode,
                           fading, params.ue_tx_power_PU)
    band = params.d2d_fraction_phi * params.bandwidth_W
    sigma2 = band * params.noise_psd_No
    return band * math.log2(1.0 + s / (interf + sigma2))


def _drop_delay(params, probs, share_b, rate_n, rate_c, rate_d) -> float:
    nu = params.content_size_nu
    total = 0.0
    for prob, rate in ((probs.p_miss, share_b), (probs.p_miss, rate_n),
                       (probs.p_cluster, rate_c), (probs.p_d2d, rate_d)):
        if prob > 0.0:
            if math.isnan(rate) or rate <= 0.0:
                return math.nan
            total += prob * nu / rate
    return total


def _stat(values: np.ndarray) -> Stat:
    mask = ~np.isnan(values)
    n = int(mask.sum())
    if n == 0:
        return Stat(mean=math.nan, ci=math.nan, count=0)
    sel = values[mask]
    mean = float(np.mean(sel))
    if n > 1:
        ci = 1.96 * float(np.std(sel, ddof=1)) / math.sqrt(n)
    else:
        ci = math.nan
    return Stat(mean=mean, ci=ci, count=n)


def _fingerprint(params: SystemParams, placement: CachePlacement,
                 n_drops: int, base_seed: int, mode: str) -> str:
    blob = json.dumps({
        "params": repr(params),
        "policy": placement.policy,
        "sets": [len(placement.user_set_a), len(placement.user_set_b),
                 [len(s) for s in placement.sbs_sets]],
        "n_drops": n_drops, "seed": base_seed, "mode": mode,
    }, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def run_experiment(params: SystemParams, catalog: ContentCatalog,
                   placement: CachePlacement, probs: RequestProbabilities,
                   n_drops: int, base_seed: int,
                   threads: int = 1, interference_mode: str = "sampled",
                   interference_fading: bool = True,
                   drop_log: list | None = None) -> SimulationSummary:
    """Aggregate ``n_drops`` independent drops.

    Deterministic for fixed (params, placement, n_drops, base_seed): each
    drop owns the seed (base_seed, drop_index) and results are reduced in
    drop order, so the thread count never changes the output.  Pass a list
    as ``drop_log`` to receive every DropResult in drop order.
    """
    if n_drops < 1:
        raise ValueError(f"n_drops must be >= 1, got {n_drops}")
    results: list[DropResult | None] = [None] * n_drops

    def one(i: int) -> None:
        rng = np.random.default_rng((base_seed, i))
        results[i] = simulate_drop(params, catalog, placement, probs, rng,
                                   interference_mode, interference_fading)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(one, range(n_drops)))
    else:
        for i in range(n_drops):
            one(i)
    if drop_log is not None:
        drop_log.extend(results)

    def col(field: str) -> np.ndarray:
        return np.array([getattr(r, field) for r in results], dtype=float)

    return SimulationSummary(
        n_drops=n_drops, base_seed=base_seed,
        nearest=_stat(col("rate_nearest")),
        cluster=_stat(col("rate_cluster")),
        d2d=_stat(col("rate_d2d")),
        backhaul=_stat(col("backhaul_share")),
        load_backhaul=_stat(col("load_backhaul_mean")),
        load_cellular=_stat(col("load_cellular_mean")),
        delay=_stat(col("delay")),
        fingerprint=_fingerprint(params, placement, n_drops, base_seed,
                                 interference_mode),
    )


def dump_samples(results: list, path: str) -> None:
    """Write per-drop samples as CSV rows ``drop,class,rate_bps,load``."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("drop,class,rate_bps,load\n")
        for i, r in enumerate(results):
            for cls, rate, load in (("nearest", r.rate_nearest, r.load_nearest),
                                    ("cluster", r.rate_cluster, r.load_cluster),
                                    ("d2d", r.rate_d2d, 1),
                                    ("backhaul", r.backhaul_share,
                                     r.load_backhaul)):
                if not math.isnan(rate):
                    fh.write(f"{i},{cls},{rate:.12g},{load}\n")


def estimate_delay(summary: SimulationSummary, probs: RequestProbabilities,
                   params: SystemParams) -> float:
    """Retrieval delay with empirical mean rates substituted into the
    delay decomposition."""
    nu = params.content_size_nu
    total = 0.0
    for prob, stat, what in ((probs.p_miss, summary.backhaul, "backhaul"),
                             (probs.p_miss, summary.nearest, "nearest-SBS"),
                             (probs.p_cluster, summary.cluster, "cluster"),
                             (probs.p_d2d, summary.d2d, "D2D")):
        if prob > 0.0:
            if stat.count == 0 or math.isnan(stat.mean) or stat.mean <= 0.0:
                raise ValueError(
                    f"no {what} samples but its probability is {prob}")
            total += prob * nu / stat.mean
    return total


@dataclass(frozen=True)
class GridRates:
    nearest: Stat
    cluster: Stat
    d2d: Stat


def run_rate_grid(params: SystemParams, catalog: ContentCatalog,
                  cache, alphas, lambdas_km2, ks, n_drops: int,
                  base_seed: int) -> dict:
    """Simulated mean rates over an (alpha, lambda_BS, K) validation grid.

    Topology, request pattern, association and fading realizations are
    shared across the alpha and K axes of one density point (they do not
    depend on either), which makes the full grid an order of magnitude
    cheaper than independent runs; each grid cell still aggregates
    ``n_drops`` i.i.d. samples.  Density sweeps keep lambda_UE/lambda_BS at
    the configured ratio.  Returns {(alpha, lam, K): GridRates}.
    """
    alphas = sorted(set(float(a) for a in alphas))
    lambdas_km2 = sorted(set(float(l) for l in lambdas_km2))
    ks = sorted(set(int(k) for k in ks))
    k_max = max(ks)
    cu, cs = cache.user_capacity, cache.sbs_capacity
    if 2 * cu + k_max * cs > catalog.size:
        raise ValueError("largest cluster size overflows the catalog")
    ratio = params.ue_density_lambda_UE / params.sbs_density_lambda_BS
    delta = params.paired_fraction_delta
    cum = np.concatenate(([0.0], np.cumsum(catalog.probs)))

    samples = {
        (a, l, k): {"N": np.full(n_drops, math.nan),
                    "C": np.full(n_drops, math.nan),
                    "D": np.full(n_drops, math.nan)}
        for a in alphas for l in lambdas_km2 for k in ks
    }

    for li, lam in enumerate(lambdas_km2):
        p_l = params.with_(sbs_density_lambda_BS=lam * 1e-6,
                           ue_density_lambda_UE=ratio * lam * 1e-6)
        length = 0.0 if p_l.boundary != "torus" else math.sqrt(p_l.area)
        p_alpha = {a: p_l.with_(pathloss_exp_alpha=a) for a in alphas}
        for i in range(n_drops):
            rng = np.random.default_rng((base_seed, li, i))
            drop = sample_drop(p_l, rng)
            n_users = len(drop.user_xy)
            n_sbs = len(drop.sbs_xy)
            n_paired = drop.pairing.n_paired
            side_b = np.zeros(n_users, dtype=bool)
            side_b[:n_paired] = rng.integers(0, 2, size=n_paired).astype(bool)
            ranks = np.searchsorted(cum, rng.uniform(size=n_users), side="right")
            ranks = np.clip(ranks, 1, len(cum) - 1)

            paired = drop.pairing.paired
            in_a = (ranks % 2 == 1) & (ranks <= 2 * cu)
            in_b = (ranks % 2 == 0) & (ranks <= 2 * cu)
            is_local = np.where(paired, np.where(side_b, in_b, in_a),
                                ranks <= cu)
            is_d2d = paired & np.where(side_b, in_a, in_b)
            rest = ~(is_local | is_d2d)
            rest_ix = np.flatnonzero(rest)
            d2d_ix = np.flatnonzero(is_d2d)

            if n_sbs == 0:
                continue
            k_eff = min(k_max, n_sbs)
            if len(rest_ix):
                dists_k, idx_k = kernels.knearest(drop.user_xy[rest_ix],
                                                  drop.sbs_xy, k_eff, length)
            else:
                dists_k = np.empty((0, k_eff))
                idx_k = np.empty((0, k_eff), dtype=np.int64)

            rank_rest = ranks[rest_ix]
            cluster_eligible = rank_rest > 2 * cu
            rows = np.arange(len(rest_ix))
            for k in ks:
                is_cluster = cluster_eligible & (rank_rest <= 2 * cu + k * cs)
                picks = np.zeros(len(rest_ix), dtype=np.int64)
                n_cl = int(is_cluster.sum())
                if n_cl:
                    picks[is_cluster] = rng.integers(0, min(k, k_eff), size=n_cl)
                serving = idx_k[rows, picks]
                load_c = np.bincount(serving, minlength=n_sbs)
                miss_rows = np.flatnonzero(~is_cluster)
                cluster_rows = np.flatnonzero(is_cluster)

                for link, pool in (("N", miss_rows), ("C", cluster_rows)):
                    if len(pool) == 0:
                        continue
                    row = pool[rng.integers(0, len(pool))]
                    user = rest_ix[row]
                    r_serve = max(dists_k[row, picks[row]],
                                  p_l.ref_distance_d0)
                    b = serving[row]
                    h1 = rng.exponential()
                    all_d = kernels.alldist(drop.user_xy[user], drop.sbs_xy,
                                            length)
                    theta_t = rng.uniform(-math.pi, math.pi, size=n_sbs)
                    theta_r = rng.uniform(-math.pi, math.pi, size=n_sbs)
                    h = rng.exponential(size=n_sbs)
                    n_cell = load_c[b]
                    for a in alphas:
                        pa = p_alpha[a]
                        c_pl = pathloss_constant(pa)
                        s = (pa.sbs_tx_power_PB * pa.sbs_antenna.main_gain ** 2
                             * h1 * c_pl * r_serve ** (-a))
                        interf = kernels.interference_sum(
                            all_d, int(b), theta_t, theta_r, h,
                            pa.sbs_antenna.main_gain, pa.sbs_antenna.side_gain,
                            pa.sbs_antenna.halfpower_bw,
                            pa.sbs_antenna.mainlobe_bw, pa.sbs_antenna.rolloff,
                            pa.ref_distance_d0, a, pa.sbs_tx_power_PB * c_pl)
                        band = (1.0 - pa.d2d_fraction_phi) * pa.bandwidth_W
                        sigma2 = band * pa.noise_psd_No
                        rate = band / n_cell * math.log2(
                            1.0 + s / (interf + sigma2))
                        samples[(a, lam, k)][link][i] = rate

            if len(d2d_ix):
                tag = d2d_ix[rng.integers(0, len(d2d_ix))]
                r_d = max(drop.pairing.distance[tag], p_l.ref_distance_d0)
                others = d2d_ix[d2d_ix != tag]
                h1 = rng.exponential()
                if len(others):
                    tx_xy = drop.pairing.peer_xy[others]
                    dd = kernels.alldist(drop.user_xy[tag], tx_xy, length)
                else:
                    dd = np.empty(0)
                theta_t = rng.uniform(-math.pi, math.pi, size=len(dd))
                theta_r = rng.uniform(-math.pi, math.pi, size=len(dd))
                h = rng.exponential(size=len(dd))
                for a in alphas:
                    pa = p_alpha[a]
                    c_pl = pathloss_constant(pa)
                    s = (pa.ue_tx_power_PU * pa.ue_antenna.main_gain ** 2
                         * h1 * c_pl * r_d ** (-a))
                    interf = kernels.interference_sum(
                        dd, -1, theta_t, theta_r, h,
                        pa.ue_antenna.main_gain, pa.ue_antenna.side_gain,
                        pa.ue_antenna.halfpower_bw, pa.ue_antenna.mainlobe_bw,
                        pa.ue_antenna.rolloff, pa.ref_distance_d0, a,
                        pa.ue_tx_power_PU * c_pl)
                    band = pa.d2d_fraction_phi * pa.bandwidth_W
                    sigma2 = band * pa.noise_psd_No
                    rate = band * math.log2(1.0 + s / (interf + sigma2))
                    for k in ks:
                        samples[(a, lam, k)]["D"][i] = rate

    return {
        key: GridRates(nearest=_stat(v["N"]), cluster=_stat(v["C"]),
                       d2d=_stat(v["D"]))
        for key, v in samples.items()
    }


def simulate_d2d_standalone(params: SystemParams, lambda_d: float,
                            n_drops: int, base_seed: int,
                            interference_mode: str = "sampled") -> Stat:
    """Mean D2D rate at an explicit transmitter density ``lambda_d``.

    Dedicated fast path for D2D-density sweeps: a typical pair plus a PPP of
    co-band transmitters, no cellular machinery.
    """
    if lambda_d <= 0.0:
        raise ValueError(f"D2D density must be positive, got {lambda_d}")
    side = math.sqrt(params.area)
    length = metric_length(params)
    c = pathloss_constant(params)
    alpha = params.pathloss_exp_alpha
    d0 = params.ref_distance_d0
    band = params.d2d_fraction_phi * params.bandwidth_W
    sigma2 = band * params.noise_psd_No
    rates = np.empty(n_drops)
    for i in range(n_drops):
        rng = np.random.default_rng((base_seed, i))
        rx = rng.uniform(0.0, side, size=2)
        r_d = max(params.max_d2d_distance * math.sqrt(rng.uniform()), d0)
        n_tx = rng.poisson(lambda_d * params.area)
        tx_xy = rng.uniform(0.0, side, size=(n_tx, 2))
        h1 = rng.exponential()
        s = (params.ue_tx_power_PU * params.ue_antenna.main_gain ** 2
             * h1 * c * r_d ** (-alpha))
        dists = kernels.alldist(rx, tx_xy, length) if n_tx else np.empty(0)
        interf = _interference(params, params.ue_antenna, dists, -1, rng,
                               interference_mode, True, params.ue_tx_power_PU)
        rates[i] = band * math.log2(1.0 + s / (interf + sigma2))
    return _stat(rates)
