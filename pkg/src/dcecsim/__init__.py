"""Cooperative edge caching for mmWave dense networks.

A D2D-assisted cooperative caching policy with its closed-form performance
model (backhaul offloading gain, per-link-class rate lower bounds, content
retrieval delay) and an independent stochastic-geometry Monte Carlo
simulator that validates the bounds.
"""

from .analytic import (DegenerateBoundWarning, DelayBreakdown, RateBounds,
                       backhaul_rate, cluster_rate_lb, content_delay,
                       d2d_rate_lb, expected_backhaul_load, expected_cell_load,
                       expected_ln_rk, nearest_rate_lb, optimal_cluster_size,
                       policy_delay, rate_bounds)
from .antenna import AntennaPattern, average_gain, gain, gauss_integral, pattern_from_db
from .config import Config, config_from_dict, load_config
from .montecarlo import (DropResult, SimulationSummary, Stat, estimate_delay,
                         run_experiment, simulate_d2d_standalone, simulate_drop)
from .params import (SystemParams, average_pathloss, noise_power,
                     pathloss_constant, validate)
from .popularity import (CacheConfig, CachePlacement, ContentCatalog,
                         RequestProbabilities, build_placement,
                         dcec_hit_ratios, miss_probability,
                         offloading_gain_dcec, offloading_gain_mpc,
                         request_probabilities, zipf_popularity)

__version__ = "0.1.0"

__all__ = [
    "AntennaPattern", "CacheConfig", "CachePlacement", "Config",
    "ContentCatalog", "DegenerateBoundWarning", "DelayBreakdown", "DropResult",
    "RateBounds", "RequestProbabilities", "SimulationSummary", "Stat",
    "SystemParams", "average_gain", "average_pathloss", "backhaul_rate",
    "build_placement", "cluster_rate_lb", "config_from_dict", "content_delay",
    "d2d_rate_lb", "dcec_hit_ratios", "estimate_delay",
    "expected_backhaul_load", "expected_cell_load", "expected_ln_rk", "gain",
    "gauss_integral", "load_config", "miss_probability", "nearest_rate_lb",
    "noise_power", "offloading_gain_dcec", "offloading_gain_mpc",
    "optimal_cluster_size", "pathloss_constant", "pattern_from_db",
    "policy_delay", "rate_bounds", "request_probabilities", "run_experiment",
    "simulate_d2d_standalone", "simulate_drop", "validate", "zipf_popularity",
]
