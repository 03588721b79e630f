"""JSON configuration loading.

One section per concern; keys use the conventional symbol names (powers in
dBm, gains in dB, beamwidths in degrees, densities per km^2).  Unknown keys
anywhere are a hard error so typos cannot silently fall back to defaults.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .antenna import pattern_from_db
from .params import SystemParams, dbm_to_watts, validate
from .popularity import CacheConfig, ContentCatalog, zipf_popularity

_CORE_KEYS = {
    "area": "area",                      # m^2
    "W": "bandwidth_W",                  # Hz
    "phi": "d2d_fraction_phi",
    "f": "carrier_freq_f",               # Hz
    "alpha": "pathloss_exp_alpha",
    "d0": "ref_distance_d0",             # m
    "r_d_max": "max_d2d_distance",       # m
    "delta": "paired_fraction_delta",
    "B": "backhaul_capacity_B",          # bit/s
    "kappa": "cell_area_shape_kappa",
    "nu": "content_size_nu",             # bits
    "pathloss_constant_convention": "pathloss_constant_convention",
    "average_gain_convention": "average_gain_convention",
    "boundary": "boundary",
}
# keys needing unit conversion
_CORE_SPECIAL = {"P_B_dBm", "P_U_dBm", "No_dBm_per_Hz", "lambda_BS", "lambda_UE"}

_ANTENNA_KEYS = {"G_m_dB", "G_s_dB", "omega_m_deg", "theta_m_deg", "c"}

_POPULARITY_KEYS = {"catalog_size", "xi", "C_u", "C_s", "K", "policy"}

_MONTECARLO_KEYS = {"n_drops", "seed", "interference_mode"}

_SECTIONS = {"core", "sbs_antenna", "ue_antenna", "popularity", "montecarlo"}


@dataclass(frozen=True)
class Config:
    params: SystemParams
    catalog: ContentCatalog
    cache: CacheConfig
    policy: str
    n_drops: int
    seed: int
    interference_mode: str


def _reject_unknown(section: str, data: dict, allowed) -> None:
    unknown = set(data) - set(allowed)
    if unknown:
        raise ValueError(
            f"unknown key(s) in config section {section!r}: {sorted(unknown)}"
        )


def _antenna_from_section(data: dict):
    _reject_unknown("antenna", data, _ANTENNA_KEYS)
    return pattern_from_db(
        main_db=float(data["G_m_dB"]),
        side_db=float(data["G_s_dB"]),
        halfpower_deg=float(data["omega_m_deg"]),
        mainlobe_deg=(float(data["theta_m_deg"]) if "theta_m_deg" in data else None),
        rolloff=float(data.get("c", 0.3)),
    )


def config_from_dict(doc: dict) -> Config:
    """Build a validated configuration from a parsed JSON document."""
    _reject_unknown("<root>", doc, _SECTIONS)

    kwargs = {}
    core = dict(doc.get("core", {}))
    _reject_unknown("core", core, set(_CORE_KEYS) | _CORE_SPECIAL)
    for key, field in _CORE_KEYS.items():
        if key in core:
            value = core[key]
            kwargs[field] = value if isinstance(value, str) else float(value)
    if "P_B_dBm" in core:
        kwargs["sbs_tx_power_PB"] = dbm_to_watts(float(core["P_B_dBm"]))
    if "P_U_dBm" in core:
        kwargs["ue_tx_power_PU"] = dbm_to_watts(float(core["P_U_dBm"]))
    if "No_dBm_per_Hz" in core:
        kwargs["noise_psd_No"] = dbm_to_watts(float(core["No_dBm_per_Hz"]))
    if "lambda_BS" in core:  # configured per km^2
        kwargs["sbs_density_lambda_BS"] = float(core["lambda_BS"]) * 1e-6
    if "lambda_UE" in core:
        kwargs["ue_density_lambda_UE"] = float(core["lambda_UE"]) * 1e-6

    if "sbs_antenna" in doc:
        kwargs["sbs_antenna"] = _antenna_from_section(doc["sbs_antenna"])
    if "ue_antenna" in doc:
        kwargs["ue_antenna"] = _antenna_from_section(doc["ue_antenna"])

    params = validate(SystemParams(**kwargs))

    pop = dict(doc.get("popularity", {}))
    _reject_unknown("popularity", pop, _POPULARITY_KEYS)
    catalog = zipf_popularity(int(pop.get("catalog_size", 2000)),
                              float(pop.get("xi", 0.56)))
    cache = CacheConfig(
        user_capacity=int(pop.get("C_u", 150)),
        sbs_capacity=int(pop.get("C_s", 200)),
        cluster_size=int(pop.get("K", 4)),
    )
    policy = str(pop.get("policy", "DCEC")).upper()

    mc = dict(doc.get("montecarlo", {}))
    _reject_unknown("montecarlo", mc, _MONTECARLO_KEYS)
    mode = str(mc.get("interference_mode", "sampled"))
    if mode not in ("sampled", "mean_gain"):
        raise ValueError(f"unknown interference_mode: {mode!r}")
    return Config(
        params=params, catalog=catalog, cache=cache, policy=policy,
        n_drops=int(mc.get("n_drops", 10000)), seed=int(mc.get("seed", 1)),
        interference_mode=mode,
    )


def load_config(path: str) -> Config:
    """Load and validate a JSON configuration file."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"config root must be a JSON object, got {type(doc)}")
    return config_from_dict(doc)
