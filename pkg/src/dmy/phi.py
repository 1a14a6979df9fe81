"""Radial squashing profile.

``build_phi(R, C, eps)`` constructs a C^2 function phi on [0, inf) with

    phi(r) = 1         for r <= R,
    phi(r) = 1/(2C)    for r >= r_tail,
    phi nonincreasing, and |phi'(r) * r| <= eps/8 everywhere.

This is the shape needed to squash a map whose Jacobian norm never exceeds C:
scaling by phi leaves the disc of radius R untouched and multiplies the far
tail by 1/(2C), while the slope budget eps/8 keeps the scaling's Jacobian
within an eps-sized perturbation of a positive multiple of the identity.

The decay runs in log-radius.  With u = ln(r/R),

    phi(r) = 1 - (eps/8) * m(u),    m(u) = integral of sigma from 0 to u,

where sigma ramps 0 -> 1 through a quintic smoothstep over one unit of u,
holds at 1 until the accumulated decay reaches

    m_target = 8 * (1 - 1/(2C)) / eps,

and ramps back down to 0 over another unit.  Both ramps integrate to 1/2, so
m(inf) = m_target exactly and the floor 1/(2C) is attained identically for
r >= r_tail = R * exp(m_target + 1).  The slope in log-radius is
phi'(r) * r = -(eps/8) * sigma(u), which never exceeds eps/8 in magnitude
because sigma stays in [0, 1].

A knot-by-knot construction of an equivalent envelope would need about
exp(m_target) knots (around 1e40 at desk parameters), which is why the
closed form in log-radius is used instead.  The quintic smoothstep makes the
profile C^2; nothing downstream needs more smoothness than one continuous
derivative of the Jacobian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError


@dataclass(frozen=True, slots=True)
class PhiProfile:
    """Parameters and derived constants of one squashing profile."""

    R: float         # inner flat radius: phi == 1 on [0, R]
    C: float         # Jacobian norm bound being squashed; tail value is 1/(2C)
    eps: float       # slope budget; must satisfy 0 < eps < 1/(8C)
    floor: float     # 1/(2C)
    m_target: float  # total decay needed, in log-radius units
    r_tail: float    # phi == floor for all r >= r_tail
    ramp: float      # smoothstep width in log-radius (1 unless m_target < 1)

    def __post_init__(self):
        if not (math.isfinite(self.R) and self.R > 0.0):
            raise ParameterError(f"flat radius must be positive and finite, got {self.R!r}")
        if not (math.isfinite(self.C) and self.C > 0.5):
            raise ParameterError(
                f"norm bound must exceed 1/2 so the floor 1/(2C) stays below 1, got {self.C!r}")
        if not (0.0 < self.eps < 1.0 / (8.0 * self.C)):
            raise ParameterError(
                f"slope budget must lie in (0, 1/(8C)) = (0, {1.0 / (8.0 * self.C)!r}), got {self.eps!r}")
        if not math.isfinite(self.r_tail):
            raise ParameterError(
                "slope budget is so small that the tail radius overflows a double")


def build_phi(R: float, C: float, eps: float) -> PhiProfile:
    # degenerate inputs must reach the profile's validation, not divide by zero
    floor = 1.0 / (2.0 * C) if C > 0.0 else math.inf
    m_target = 8.0 * (1.0 - floor) / eps if eps > 0.0 else math.inf
    ramp = min(1.0, m_target)
    try:
        r_tail = R * math.exp(m_target + 1.0)
    except OverflowError:
        r_tail = math.inf
    return PhiProfile(R=R, C=C, eps=eps, floor=floor, m_target=m_target,
                      r_tail=r_tail, ramp=ramp)


def _smoothstep(t: float) -> float:
    # quintic 6t^5 - 15t^4 + 10t^3, flat to second order at t = 0 and t = 1
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def _smoothstep_integral(t: float) -> float:
    # integral of the quintic from 0 to t; equals 1/2 at t = 1
    return t * t * t * t * (t * (t - 3.0) + 2.5)


def _slope_factor(profile: PhiProfile, u: float) -> float:
    """sigma(u): 0 outside the active band, 1 on the plateau, smooth ramps."""
    w = profile.ramp
    mt = profile.m_target
    if u <= 0.0 or u >= mt + w:
        return 0.0
    if u < w:
        return _smoothstep(u / w)
    if u <= mt:
        return 1.0
    return _smoothstep((mt + w - u) / w)


def _decay(profile: PhiProfile, u: float) -> float:
    """m(u): nondecreasing, 0 for u <= 0, exactly m_target for u >= m_target + ramp."""
    w = profile.ramp
    mt = profile.m_target
    if u <= 0.0:
        return 0.0
    if u >= mt + w:
        return mt
    if u < w:
        return w * _smoothstep_integral(u / w)
    if u <= mt:
        return u - 0.5 * w
    return mt - w * _smoothstep_integral((mt + w - u) / w)


def phi_eval(profile: PhiProfile, r: float) -> float:
    if not r >= 0.0:
        raise ParameterError(f"radius must be >= 0, got {r!r}")
    if r <= profile.R:
        return 1.0
    # compare against r_tail directly: log rounding must not push the exact
    # tail value off the floor branch
    if r >= profile.r_tail:
        return profile.floor
    u = math.log(r / profile.R)
    if u >= profile.m_target + profile.ramp:
        return profile.floor
    val = 1.0 - profile.eps / 8.0 * _decay(profile, u)
    # rounding may graze the floor just before the tail branch takes over
    return val if val > profile.floor else profile.floor


def phi_log_slope(profile: PhiProfile, r: float) -> float:
    """The product phi'(r) * r in closed form: -(eps/8) * sigma(ln(r/R)).

    Computing the product directly keeps the slope budget exact: sigma lies
    in [0, 1], and scaling eps/8 by a factor <= 1 cannot round past eps/8.
    The quotient form phi_deriv(r) * r can, by one ulp.
    """
    if not r >= 0.0:
        raise ParameterError(f"radius must be >= 0, got {r!r}")
    if r <= profile.R or r >= profile.r_tail:
        return 0.0
    s = _slope_factor(profile, math.log(r / profile.R))
    if s == 0.0:
        return 0.0
    return -(profile.eps / 8.0) * s


def phi_deriv(profile: PhiProfile, r: float) -> float:
    ls = phi_log_slope(profile, r)
    if ls == 0.0:
        return 0.0
    return ls / r
