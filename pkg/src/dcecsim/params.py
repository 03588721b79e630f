"""System-wide parameters, validation and derived physical constants.

All internal math is linear-scale SI: watts, hertz, meters, nodes per square
meter.  Powers are configured in dBm and antenna gains in dB; conversion
happens at load time (see :mod:`dcecsim.config`).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .antenna import AntennaPattern, pattern_from_db

C_LIGHT = 299_792_458.0  # m/s
EULER_GAMMA = 0.5772156649015329


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def _default_sbs_antenna() -> AntennaPattern:
    return pattern_from_db(18.0, -2.0, 10.0)


def _default_ue_antenna() -> AntennaPattern:
    return pattern_from_db(9.0, -2.0, 10.0)


@dataclass(frozen=True)
class SystemParams:
    """One validated record of every physical and network constant.

    Defaults are the reference simulation setup: 1 km^2 region, 2.16 GHz of
    60 GHz spectrum with a 20% D2D overlay slice, 30/20 dBm transmit powers,
    100 SBS and 1000 users per km^2 with 80% of users paired.
    """

    area: float = 1e6                       # m^2
    bandwidth_W: float = 2.16e9             # Hz
    d2d_fraction_phi: float = 0.2
    carrier_freq_f: float = 60e9            # Hz
    pathloss_exp_alpha: float = 1.6
    sbs_tx_power_PB: float = 1.0            # W  (30 dBm)
    ue_tx_power_PU: float = 0.1             # W  (20 dBm)
    sbs_antenna: AntennaPattern = field(default_factory=_default_sbs_antenna)
    ue_antenna: AntennaPattern = field(default_factory=_default_ue_antenna)
    ref_distance_d0: float = 1.0            # m
    max_d2d_distance: float = 10.0          # m
    sbs_density_lambda_BS: float = 100e-6   # per m^2
    ue_density_lambda_UE: float = 1000e-6   # per m^2
    paired_fraction_delta: float = 0.8
    backhaul_capacity_B: float = 3e9        # bit/s per SBS
    noise_psd_No: float = 10.0 ** (-20.4)   # W/Hz  (-174 dBm/Hz)
    cell_area_shape_kappa: float = 3.5
    content_size_nu: float = 1e8            # bits
    euler_gamma: float = EULER_GAMMA
    pathloss_constant_convention: str = "paper"
    average_gain_convention: str = "quadrature"
    boundary: str = "torus"

    def with_(self, **kw) -> "SystemParams":
        """Return a validated copy with the given fields replaced."""
        return validate(replace(self, **kw))


def validate(params: SystemParams) -> SystemParams:
    """Return ``params`` unchanged if every invariant holds, else raise.

    The error message names the first violated invariant.
    """
    p = params
    for name, value in (
        ("area", p.area),
        ("bandwidth_W", p.bandwidth_W),
        ("carrier_freq_f", p.carrier_freq_f),
        ("sbs_tx_power_PB", p.sbs_tx_power_PB),
        ("ue_tx_power_PU", p.ue_tx_power_PU),
        ("ref_distance_d0", p.ref_distance_d0),
        ("max_d2d_distance", p.max_d2d_distance),
        ("backhaul_capacity_B", p.backhaul_capacity_B),
        ("noise_psd_No", p.noise_psd_No),
        ("content_size_nu", p.content_size_nu),
    ):
        if not (value > 0.0) or not math.isfinite(value):
            raise ValueError(f"{name} must be positive and finite, got {value}")
    if not (p.sbs_density_lambda_BS > 0.0 and p.ue_density_lambda_UE > 0.0):
        raise ValueError(
            "density must be positive, got lambda_BS="
            f"{p.sbs_density_lambda_BS}, lambda_UE={p.ue_density_lambda_UE}"
        )
    if not (0.0 < p.d2d_fraction_phi < 1.0):
        raise ValueError(f"d2d_fraction out of range (0, 1): {p.d2d_fraction_phi}")
    if not (0.0 <= p.paired_fraction_delta <= 1.0):
        raise ValueError(
            f"paired_fraction out of range [0, 1]: {p.paired_fraction_delta}"
        )
    if not (p.pathloss_exp_alpha > 0.0):
        raise ValueError(f"pathloss exponent must be positive, got {p.pathloss_exp_alpha}")
    if not (p.ref_distance_d0 < p.max_d2d_distance):
        raise ValueError(
            f"ref_distance_d0 ({p.ref_distance_d0}) must be smaller than "
            f"max_d2d_distance ({p.max_d2d_distance})"
        )
    if not (p.cell_area_shape_kappa > 0.0):
        raise ValueError(f"cell_area_shape_kappa must be positive, got {p.cell_area_shape_kappa}")
    if not (p.euler_gamma > 0.0):
        raise ValueError(f"euler_gamma must be positive, got {p.euler_gamma}")
    if p.pathloss_constant_convention not in ("paper", "friis"):
        raise ValueError(
            f"unknown pathloss_constant_convention: {p.pathloss_constant_convention!r}"
        )
    if p.average_gain_convention not in ("quadrature", "paper"):
        raise ValueError(
            f"unknown average_gain_convention: {p.average_gain_convention!r}"
        )
    if p.boundary not in ("torus", "truncated"):
        raise ValueError(f"unknown boundary mode: {p.boundary!r}")
    return params


def noise_power(params: SystemParams) -> float:
    """Thermal noise power over the full system bandwidth: sigma^2 = W * No.

    Callers scale by the band fraction actually in use (cellular gets
    (1-phi)*W, D2D gets phi*W).
    """
    return params.bandwidth_W * params.noise_psd_No


def wavelength(params: SystemParams) -> float:
    return C_LIGHT / params.carrier_freq_f


def pathloss_constant(params: SystemParams) -> float:
    """Near-field constant C of the power-law average path loss C * r**-alpha.

    ``paper`` convention: C = lambda^2 / (d0^3 * (4*pi)^2), taken literally.
    ``friis`` convention: C = lambda^2 / (16*pi^2 * d0^(2-alpha)), the form
    that makes C * r**-alpha dimensionally consistent with free space at d0.
    The two agree at d0 = 1 m.
    """
    lam = wavelength(params)
    d0 = params.ref_distance_d0
    if params.pathloss_constant_convention == "paper":
        return lam * lam / (d0 ** 3 * (4.0 * math.pi) ** 2)
    return lam * lam / (16.0 * math.pi ** 2 * d0 ** (2.0 - params.pathloss_exp_alpha))


def average_pathloss(params: SystemParams, r: float) -> float:
    """Average path loss beta = C * r**-alpha, valid for r >= d0."""
    if r < params.ref_distance_d0:
        raise ValueError(
            f"path loss model breaks down below the reference distance: "
            f"r={r} < d0={params.ref_distance_d0}"
        )
    return pathloss_constant(params) * r ** (-params.pathloss_exp_alpha)
