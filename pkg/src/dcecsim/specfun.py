"""Special functions needed by the closed-form rate bounds.

scipy covers the gamma function, the exponential integral E1 and the upper
incomplete gamma function for positive order; the negative-order upper
incomplete gamma (needed for pathloss exponents above 2) is extended here by
the downward recurrence Gamma(z, x) = (Gamma(z+1, x) - x**z * exp(-x)) / z.
"""
from __future__ import annotations

import math

from scipy import special as sp


def gamma_fn(z: float) -> float:
    """Gamma(z); raises at the poles z = 0, -1, -2, ..."""
    if z <= 0.0 and z == math.floor(z):
        raise ValueError(f"gamma function pole at non-positive integer z={z}")
    return float(sp.gamma(z))


def gammaln_ratio(a: float, b: float) -> float:
    """Gamma(a) / Gamma(b) for positive a, b, computed in log space."""
    return float(math.exp(sp.gammaln(a) - sp.gammaln(b)))


def exp_integral_e1(x: float) -> float:
    """E1(x) = integral of exp(-t)/t from x to infinity, x > 0."""
    if x <= 0.0:
        raise ValueError(f"E1 requires x > 0, got {x}")
    return float(sp.exp1(x))


def incomplete_gamma_upper(z: float, a: float) -> float:
    """Upper incomplete gamma Gamma(z, a) = integral of t**(z-1)*exp(-t), t >= a.

    Supports any non-pole order z (including negative non-integers) for a > 0;
    z = 0 is handled as E1(a).
    """
    if a <= 0.0:
        raise ValueError(f"incomplete gamma requires a > 0, got a={a}")
    if z == 0.0:
        return exp_integral_e1(a)
    if z > 0.0:
        return float(sp.gammaincc(z, a) * sp.gamma(z))
    if z == math.floor(z):
        # negative integer order: recurse down from E1 via z=0
        steps = int(-z)
        val = exp_integral_e1(a)
        cur = 0.0
    else:
        steps = int(math.ceil(-z))
        top = z + steps  # in (0, 1)
        val = float(sp.gammaincc(top, a) * sp.gamma(top))
        cur = top
    for _ in range(steps):
        cur -= 1.0
        val = (val - a ** cur * math.exp(-a)) / cur
    return val
