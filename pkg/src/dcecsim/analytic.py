"""Closed-form evaluators: expected loads, per-link-class rate lower bounds,
retrieval delay composition and the optimal cluster size.

The rate bounds drop thermal noise (high-SNR regime) and bound the expected
log-SIR from below via Jensen's inequality on the summed mean interference;
the acceptance suite validates every bound against the simulator over an
alpha x density x cluster-size grid.  At extreme parameters a bracket can
go non-positive; those values are clamped to zero with a
:class:`DegenerateBoundWarning` instead of aborting sweeps.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .antenna import average_gain
from .params import SystemParams
from .popularity import (CacheConfig, ContentCatalog, RequestProbabilities,
                         request_probabilities)
from .specfun import (exp_integral_e1, gamma_fn, gammaln_ratio,
                      incomplete_gamma_upper)

LN2 = math.log(2.0)
EULER_GAMMA = 0.5772156649015329


class DegenerateBoundWarning(UserWarning):
    """A rate lower bound went non-positive and was clamped to zero."""


@dataclass(frozen=True)
class RateBounds:
    """Per-link-class average rates (bit/s): backhaul share and the three
    radio lower bounds."""

    backhaul: float
    nearest_lb: float
    cluster_lb: float
    d2d_lb: float


@dataclass(frozen=True)
class DelayBreakdown:
    """Average content retrieval delay split by leg (seconds)."""

    backhaul: float
    nearest: float
    cluster: float
    d2d: float

    @property
    def total(self) -> float:
        return self.backhaul + self.nearest + self.cluster + self.d2d


def _loaded_mean(u: float, kappa: float) -> float:
    """Mean TDMA load for active-user-to-SBS density ratio ``u`` with
    gamma-distributed cell areas of shape ``kappa``."""
    if u == 0.0:
        return 0.0
    x = 1.0 + u / kappa
    return u * (1.0 - x ** (-(kappa + 1.0)))


def expected_backhaul_load(params: SystemParams, p_miss: float) -> float:
    """Average number of users an SBS serves over its backhaul link."""
    if not (0.0 <= p_miss <= 1.0):
        raise ValueError(f"p_miss must lie in [0, 1], got {p_miss}")
    u = p_miss * params.ue_density_lambda_UE / params.sbs_density_lambda_BS
    return _loaded_mean(u, params.cell_area_shape_kappa)


def backhaul_rate(params: SystemParams, p_miss: float) -> float:
    """Average per-user backhaul rate: capacity B split over the backhaul load.

    p_miss = 0 means no backhaul traffic at all; the rate is reported as
    +inf so the corresponding delay leg is zero.
    """
    if not (0.0 <= p_miss <= 1.0):
        raise ValueError(f"p_miss must lie in [0, 1], got {p_miss}")
    if p_miss == 0.0:
        return math.inf
    return params.backhaul_capacity_B / expected_backhaul_load(params, p_miss)


def expected_cell_load(params: SystemParams, p_cellular: float) -> float:
    """Average TDMA cell load counting miss and cluster-served users."""
    if not (0.0 <= p_cellular <= 1.0):
        raise ValueError(f"p_cellular must lie in [0, 1], got {p_cellular}")
    u = p_cellular * params.ue_density_lambda_UE / params.sbs_density_lambda_BS
    return _loaded_mean(u, params.cell_area_shape_kappa)


def n_sbs(params: SystemParams) -> int:
    """Deterministic surrogate for the SBS count: round(density * area)."""
    return max(2, round(params.sbs_density_lambda_BS * params.area))


def j1(alpha: float, n_bs: int) -> float:
    """Interference distance-moment sum over the 2nd..N-th nearest SBS,
    in units of (pi * lambda_BS)**(alpha/2)."""
    if n_bs < 2:
        raise ValueError(f"j1 needs at least 2 SBS, got {n_bs}")
    if alpha == 2.0:
        return math.log(n_bs - 1.0) + EULER_GAMMA
    beta = alpha / 2.0
    if n_bs <= beta:
        raise ValueError(f"j1 requires n_bs > alpha/2, got n_bs={n_bs}, alpha={alpha}")
    return gammaln_ratio(n_bs + 1.0 - beta, n_bs) / (1.0 - beta) - gamma_fn(1.0 - beta)


def harmonic(n: int) -> float:
    return sum(1.0 / i for i in range(1, n + 1))


def expected_ln_rk(k: int, lambda_bs: float) -> float:
    """E[ln r_k] for the k-th nearest point of a planar PPP of density
    lambda_bs: -(gamma + ln(pi*lambda) - H_{k-1}) / 2."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if lambda_bs <= 0.0:
        raise ValueError(f"density must be positive, got {lambda_bs}")
    return -0.5 * (EULER_GAMMA + math.log(math.pi * lambda_bs) - harmonic(k - 1))


def j4(k: int, r0: float) -> float:
    """Guarded -2nd distance moment of the k-th nearest point (alpha = 2
    case), in units of pi*lambda: E1(r0) for k = 1, else 1/(k-1)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if k == 1:
        return exp_integral_e1(r0)
    return 1.0 / (k - 1.0)


def j3(alpha: float, k: int, r0: float) -> float:
    """Guarded -alpha-th distance moment of the k-th nearest point (alpha > 2
    case), in units of (pi*lambda)**(alpha/2)."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    beta = alpha / 2.0
    if k == 1:
        return incomplete_gamma_upper(1.0 - beta, r0)
    return gammaln_ratio(k - beta, k)


def j2(alpha: float, k: int, n_bs: int, r0: float) -> float:
    """Interference moment sum over all SBS except the serving k-th nearest,
    in units of (pi * lambda_BS)**(alpha/2).  Branches on alpha."""
    if not 1 <= k <= n_bs:
        raise ValueError(f"serving index k={k} out of range 1..{n_bs}")
    beta = alpha / 2.0
    if alpha < 2.0:
        total = gammaln_ratio(n_bs + 1.0 - beta, n_bs) / (1.0 - beta)
        return total - gammaln_ratio(k - beta, k)
    if alpha == 2.0:
        return exp_integral_e1(r0) + math.log(n_bs - 1.0) + EULER_GAMMA - j4(k, r0)
    return (incomplete_gamma_upper(1.0 - beta, r0)
            + gammaln_ratio(n_bs + 1.0 - beta, n_bs) / (1.0 - beta)
            - gamma_fn(1.0 - beta)
            - j3(alpha, k, r0))


def _cellular_prefactor(params: SystemParams, p_cellular: float) -> float:
    enc = expected_cell_load(params, p_cellular)
    if enc <= 0.0:
        raise ValueError("cellular prefactor undefined with zero cell load")
    return (1.0 - params.d2d_fraction_phi) * params.bandwidth_W / (enc * LN2)


def _clamp_bracket(bracket: float, what: str) -> float:
    if bracket <= 0.0:
        warnings.warn(
            f"{what} lower bound degenerate (bracket={bracket:.4g}); clamped to 0",
            DegenerateBoundWarning,
            stacklevel=3,
        )
        return 0.0
    return bracket


def nearest_rate_lb(params: SystemParams, p_miss: float, p_cluster: float) -> float:
    """Lower bound on the mean rate from the nearest SBS (miss traffic)."""
    alpha = params.pathloss_exp_alpha
    g_m = params.sbs_antenna.main_gain
    g_bar = average_gain(params.sbs_antenna, params.average_gain_convention)
    bracket = (2.0 * math.log(g_m / g_bar)
               + (alpha - 2.0) * params.euler_gamma / 2.0
               - math.log(j1(alpha, n_sbs(params))))
    bracket = _clamp_bracket(bracket, "nearest-SBS rate")
    return _cellular_prefactor(params, p_miss + p_cluster) * bracket


def cluster_rate_lb(params: SystemParams, k_cluster: int, p_miss: float,
                    p_cluster: float) -> float:
    """Lower bound on the mean rate from the serving SBS cluster, averaged
    uniformly over the K candidate SBSs (ordered by distance)."""
    n = n_sbs(params)
    if not 1 <= k_cluster <= n:
        raise ValueError(f"cluster size {k_cluster} out of range 1..{n}")
    alpha = params.pathloss_exp_alpha
    g_m = params.sbs_antenna.main_gain
    g_bar = average_gain(params.sbs_antenna, params.average_gain_convention)
    r0 = math.pi * params.sbs_density_lambda_BS * params.ref_distance_d0 ** 2
    sum_h = sum(harmonic(k - 1) for k in range(1, k_cluster + 1))
    sum_j = sum(math.log(j2(alpha, k, n, r0)) for k in range(1, k_cluster + 1))
    bracket = (2.0 * math.log(g_m / g_bar)
               + (alpha - 2.0) * params.euler_gamma / 2.0
               - alpha / (2.0 * k_cluster) * sum_h
               - sum_j / k_cluster)
    bracket = _clamp_bracket(bracket, "cluster rate")
    return _cellular_prefactor(params, p_miss + p_cluster) * bracket


def j5(alpha: float, radius: float, d0: float) -> float:
    """D2D interference field integral over the equivalent cell of radius
    ``radius`` with guard distance d0, in units of pi*lambda_D."""
    if radius <= d0:
        raise ValueError(f"equivalent radius {radius} must exceed d0={d0}")
    if alpha < 2.0:
        return radius ** (2.0 - alpha) / (1.0 - alpha / 2.0)
    if alpha == 2.0:
        return 2.0 * math.log(radius / d0)
    return (radius ** (2.0 - alpha) - d0 ** (2.0 - alpha)) / (1.0 - alpha / 2.0)


def d2d_rate_lb(params: SystemParams, lambda_d: float,
                n_d: int | None = None) -> float:
    """Lower bound on the mean D2D rate at transmitter density ``lambda_d``.

    The D2D overlay gets the phi*W band and a dedicated (non-TDMA) link.
    ``n_d`` defaults to round(lambda_d * area).
    """
    if lambda_d <= 0.0:
        raise ValueError(f"D2D density must be positive, got {lambda_d}")
    if n_d is None:
        n_d = round(lambda_d * params.area)
    if n_d < 2:
        raise ValueError(f"need at least 2 D2D transmitters, got n_d={n_d}")
    alpha = params.pathloss_exp_alpha
    g_m = params.ue_antenna.main_gain
    g_bar = average_gain(params.ue_antenna, params.average_gain_convention)
    radius = math.sqrt(n_d / (math.pi * lambda_d))
    bracket = (2.0 * math.log(g_m / g_bar)
               - params.euler_gamma
               - alpha * (math.log(params.max_d2d_distance) - 0.5)
               - math.log(math.pi * lambda_d)
               - math.log(j5(alpha, radius, params.ref_distance_d0)))
    bracket = _clamp_bracket(bracket, "D2D rate")
    return params.d2d_fraction_phi * params.bandwidth_W / LN2 * bracket


def rate_bounds(params: SystemParams, probs: RequestProbabilities,
                k_cluster: int) -> RateBounds:
    """Evaluate all four per-link-class rates for one configuration."""
    if probs.p_d2d > 0.0:
        lambda_d = probs.p_d2d * params.ue_density_lambda_UE
        d2d = d2d_rate_lb(params, lambda_d)
    else:
        d2d = math.inf
    return RateBounds(
        backhaul=backhaul_rate(params, probs.p_miss),
        nearest_lb=nearest_rate_lb(params, probs.p_miss, probs.p_cluster),
        cluster_lb=cluster_rate_lb(params, k_cluster, probs.p_miss, probs.p_cluster),
        d2d_lb=d2d,
    )


def _leg(prob: float, rate: float, nu: float, what: str) -> float:
    if prob == 0.0:
        return 0.0
    if not (rate > 0.0):
        raise ValueError(f"{what} rate is {rate} but its probability is {prob}")
    return prob * nu / rate


def content_delay(params: SystemParams, probs: RequestProbabilities,
                  rates: RateBounds) -> DelayBreakdown:
    """Average retrieval delay: a miss pays the backhaul and the nearest-SBS
    legs in series; cluster and D2D hits pay their own leg; local hits are
    free."""
    nu = params.content_size_nu
    return DelayBreakdown(
        backhaul=_leg(probs.p_miss, rates.backhaul, nu, "backhaul"),
        nearest=_leg(probs.p_miss, rates.nearest_lb, nu, "nearest-SBS"),
        cluster=_leg(probs.p_cluster, rates.cluster_lb, nu, "cluster"),
        d2d=_leg(probs.p_d2d, rates.d2d_lb, nu, "D2D"),
    )


def policy_delay(params: SystemParams, catalog: ContentCatalog,
                 cache: CacheConfig, policy: str = "DCEC") -> DelayBreakdown:
    """Analytic delay of a policy at the given catalog/cache configuration."""
    probs = request_probabilities(catalog, cache, params.paired_fraction_delta,
                                  policy)
    k = cache.cluster_size if policy == "DCEC" else 1
    return content_delay(params, probs, rate_bounds(params, probs, k))


def optimal_cluster_size(params: SystemParams, catalog: ContentCatalog,
                         cache: CacheConfig, k_range) -> int:
    """argmin over candidate cluster sizes of the analytic total delay,
    ties broken toward the smaller K."""
    k_range = list(k_range)
    if not k_range:
        raise ValueError("k_range must not be empty")
    best_k, best_d = None, math.inf
    for k in sorted(k_range):
        candidate = CacheConfig(cache.user_capacity, cache.sbs_capacity, k)
        d = policy_delay(params, catalog, candidate, "DCEC").total
        if d < best_d:
            best_k, best_d = k, d
    return best_k
