import math

import numpy as np
import pytest

from dcecsim import (SystemParams, average_pathloss, noise_power,
                     pathloss_constant, validate)
from dcecsim.params import C_LIGHT, dbm_to_watts


def test_table_defaults_accepted(default_params):
    p = default_params
    assert p.bandwidth_W == 2.16e9
    assert p.d2d_fraction_phi == 0.2
    assert p.carrier_freq_f == 60e9
    assert p.sbs_tx_power_PB == pytest.approx(1.0)          # 30 dBm
    assert p.ue_tx_power_PU == pytest.approx(0.1)           # 20 dBm
    assert p.ref_distance_d0 == 1.0
    assert p.max_d2d_distance == 10.0
    assert p.paired_fraction_delta == 0.8
    assert p.cell_area_shape_kappa == 3.5
    assert p.content_size_nu == 1e8
    assert validate(p) is p


def test_dbm_conversion():
    assert dbm_to_watts(30.0) == pytest.approx(1.0)
    assert dbm_to_watts(20.0) == pytest.approx(0.1)
    assert dbm_to_watts(-174.0) == pytest.approx(10 ** (-20.4))


@pytest.mark.parametrize("field,value,msg", [
    ("d2d_fraction_phi", 0.0, "d2d_fraction out of range"),
    ("d2d_fraction_phi", 1.0, "d2d_fraction out of range"),
    ("sbs_density_lambda_BS", -1.0, "density must be positive"),
    ("ue_density_lambda_UE", 0.0, "density must be positive"),
    ("bandwidth_W", 0.0, "bandwidth_W"),
    ("paired_fraction_delta", 1.5, "paired_fraction"),
    ("cell_area_shape_kappa", 0.0, "kappa"),
    ("pathloss_exp_alpha", -0.1, "pathloss exponent"),
    ("boundary", "reflect", "boundary"),
    ("average_gain_convention", "mean", "average_gain_convention"),
])
def test_invariant_violations(field, value, msg):
    with pytest.raises(ValueError, match=msg):
        validate(SystemParams(**{field: value}))


def test_d0_must_be_below_d2d_range():
    with pytest.raises(ValueError, match="ref_distance_d0"):
        validate(SystemParams(ref_distance_d0=10.0, max_d2d_distance=10.0))


def test_noise_power_default():
    # W = 2.16e9 Hz at -174 dBm/Hz
    assert noise_power(SystemParams()) == pytest.approx(8.59911488e-12, rel=1e-8)


def test_noise_power_identity_and_linearity():
    p = SystemParams(bandwidth_W=1.0, noise_psd_No=1.0)
    assert noise_power(p) == 1.0
    p2 = SystemParams(bandwidth_W=3.0, noise_psd_No=2.0)
    assert noise_power(p2) == pytest.approx(6.0)


def test_pathloss_constant_default():
    # f = 60 GHz, d0 = 1 m: C = wavelength^2 / (16 pi^2)
    assert pathloss_constant(SystemParams()) == pytest.approx(1.58095379e-7, rel=1e-8)


def test_pathloss_constant_identity():
    # wavelength of 4*pi with d0 = 1 gives C = 1
    f = C_LIGHT / (4.0 * math.pi)
    p = SystemParams(carrier_freq_f=f)
    assert pathloss_constant(p) == pytest.approx(1.0, rel=1e-12)


def test_pathloss_constant_cubic_in_d0():
    base = pathloss_constant(SystemParams(ref_distance_d0=1.0))
    doubled = pathloss_constant(SystemParams(ref_distance_d0=2.0,
                                             max_d2d_distance=10.0))
    assert doubled == pytest.approx(base / 8.0, rel=1e-12)


def test_friis_convention_matches_at_unit_d0():
    paper = pathloss_constant(SystemParams())
    friis = pathloss_constant(SystemParams(pathloss_constant_convention="friis"))
    assert friis == pytest.approx(paper, rel=1e-12)


def test_friis_convention_d0_scaling():
    # friis uses d0^(2-alpha) instead of d0^3
    p = SystemParams(ref_distance_d0=2.0, pathloss_exp_alpha=1.6,
                     pathloss_constant_convention="friis")
    base = pathloss_constant(SystemParams(pathloss_constant_convention="friis"))
    assert pathloss_constant(p) == pytest.approx(base / 2.0 ** 0.4, rel=1e-12)


def test_average_pathloss_at_reference():
    p = SystemParams()
    c = pathloss_constant(p)
    assert average_pathloss(p, 1.0) == pytest.approx(c)


def test_average_pathloss_evaluation():
    p = SystemParams(pathloss_exp_alpha=2.0)
    c = pathloss_constant(p)
    assert average_pathloss(p, 10.0) == pytest.approx(c * 1e-2, rel=1e-12)


def test_average_pathloss_below_reference_rejected():
    with pytest.raises(ValueError, match="breaks down"):
        average_pathloss(SystemParams(), 0.5)


def test_average_pathloss_monotone_in_distance():
    p = SystemParams()
    rs = np.linspace(1.0, 500.0, 200)
    vals = [average_pathloss(p, r) for r in rs]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_average_pathloss_decreasing_in_alpha_beyond_1m():
    lo = SystemParams(pathloss_exp_alpha=1.4)
    hi = SystemParams(pathloss_exp_alpha=2.4)
    for r in (2.0, 10.0, 100.0):
        assert average_pathloss(hi, r) < average_pathloss(lo, r)


def test_with_copy_validates():
    p = SystemParams()
    q = p.with_(sbs_density_lambda_BS=400e-6)
    assert q.sbs_density_lambda_BS == 400e-6
    with pytest.raises(ValueError):
        p.with_(d2d_fraction_phi=0.0)
