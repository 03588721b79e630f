"""Directional antenna model: Gaussian main lobe over a flat side lobe.

The pattern is parameterized by the maximum main-lobe gain, the side-lobe
gain, the half-power beamwidth and the total main-lobe beamwidth.  Boresight
offsets inside the main lobe roll off as ``Gm * 10**(-c*(2*theta/omega)**2)``,
everything else sees the side-lobe floor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LN10 = math.log(10.0)


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class AntennaPattern:
    """Gain pattern of one steerable directional antenna.

    main_gain/side_gain are linear (not dB); beamwidths are radians.
    ``rolloff`` is the main-lobe rolloff constant c; with c = 0.3 the gain at
    half the half-power beamwidth is Gm * 10**-0.3 (~0.501 Gm), which is what
    makes ``halfpower_bw`` the half-power width.
    """

    main_gain: float
    side_gain: float
    halfpower_bw: float
    mainlobe_bw: float
    rolloff: float = 0.3

    def __post_init__(self):
        if not (self.main_gain >= self.side_gain > 0.0):
            raise ValueError(
                f"antenna gains must satisfy Gm >= Gs > 0, got "
                f"Gm={self.main_gain}, Gs={self.side_gain}"
            )
        if not (0.0 < self.halfpower_bw <= self.mainlobe_bw < 2.0 * math.pi):
            raise ValueError(
                f"beamwidths must satisfy 0 < omega_m <= theta_m < 2*pi, got "
                f"omega_m={self.halfpower_bw}, theta_m={self.mainlobe_bw}"
            )
        if self.rolloff <= 0.0:
            raise ValueError(f"rolloff constant must be positive, got {self.rolloff}")


def default_mainlobe_bw(main_db: float, side_db: float, halfpower_bw: float,
                        rolloff: float = 0.3) -> float:
    """Main-lobe width at which the Gaussian rolloff reaches the side-lobe level.

    Choosing theta_m = omega_m * sqrt((Gm_dB - Gs_dB) / (10 c)) makes the
    pattern continuous at the main-lobe edge and introduces no free parameter.
    """
    if main_db <= side_db:
        return halfpower_bw
    width = halfpower_bw * math.sqrt((main_db - side_db) / (10.0 * rolloff))
    return min(width, 2.0 * math.pi * (1.0 - 1e-9))


def pattern_from_db(main_db: float, side_db: float, halfpower_deg: float,
                    mainlobe_deg: float | None = None,
                    rolloff: float = 0.3) -> AntennaPattern:
    """Build a pattern from dB gains and beamwidths in degrees."""
    omega = math.radians(halfpower_deg)
    if mainlobe_deg is None:
        theta_m = default_mainlobe_bw(main_db, side_db, omega, rolloff)
    else:
        theta_m = math.radians(mainlobe_deg)
    return AntennaPattern(
        main_gain=db_to_linear(main_db),
        side_gain=db_to_linear(side_db),
        halfpower_bw=omega,
        mainlobe_bw=theta_m,
        rolloff=rolloff,
    )


def gain(pattern: AntennaPattern, theta):
    """Linear gain at boresight offset ``theta`` (radians, any value; wrapped).

    Accepts scalars or numpy arrays.
    """
    theta = np.asarray(theta, dtype=float)
    wrapped = np.abs((theta + math.pi) % (2.0 * math.pi) - math.pi)
    main = pattern.main_gain * 10.0 ** (
        -pattern.rolloff * (2.0 * wrapped / pattern.halfpower_bw) ** 2
    )
    out = np.where(wrapped <= pattern.mainlobe_bw / 2.0, main, pattern.side_gain)
    if out.ndim == 0:
        return float(out)
    return out


def gauss_integral(x: float) -> float:
    """Unnormalized Gaussian integral: integral of exp(-t^2) from 0 to x.

    Equals (sqrt(pi)/2) * erf(x); tends to sqrt(pi)/2 as x -> inf.
    """
    if x < 0.0:
        raise ValueError(f"gauss_integral requires x >= 0, got {x}")
    return math.sqrt(math.pi) / 2.0 * math.erf(x)


def average_gain(pattern: AntennaPattern, convention: str = "quadrature") -> float:
    """Mean gain over a boresight offset uniform on (0, 2*pi].

    Two conventions for the main-lobe coefficient:

    * ``quadrature``: omega*Gm / (2*pi*sqrt(c*ln10)) -- equals the defining
      integral (1/pi) * int_0^pi G(theta) dtheta exactly.
    * ``paper``: omega*Gm / sqrt(2*pi*c*ln10) -- a legacy variant whose
      main-lobe term is sqrt(2*pi) times the quadrature value.
    """
    c = pattern.rolloff
    arg = pattern.mainlobe_bw * math.sqrt(c * LN10) / pattern.halfpower_bw
    if convention == "quadrature":
        coef = pattern.halfpower_bw * pattern.main_gain / (
            2.0 * math.pi * math.sqrt(c * LN10)
        )
    elif convention == "paper":
        coef = pattern.halfpower_bw * pattern.main_gain / math.sqrt(
            2.0 * math.pi * c * LN10
        )
    else:
        raise ValueError(f"unknown average_gain convention: {convention!r}")
    side = pattern.side_gain - pattern.side_gain * pattern.mainlobe_bw / (2.0 * math.pi)
    return coef * gauss_integral(arg) + side
