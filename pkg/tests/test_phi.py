import math

import pytest
from hypothesis import given, strategies as st

from dmy import ParameterError, PhiProfile, build_phi, phi_deriv, phi_eval, phi_log_slope


@pytest.fixture(scope="module")
def prof():
    return build_phi(20.0, 2.0, 0.05)


def test_profile_constants(prof):
    # floor = 1/(2C), m_target = 8(1 - floor)/eps, tail at R e^(m_target + ramp)
    assert prof.floor == 0.25
    assert prof.m_target == 120.0
    assert prof.ramp == 1.0
    assert prof.r_tail == 20.0 * math.exp(121.0)
    assert prof.r_tail == 7.090262365522333e+53


def test_flat_inner_disc(prof):
    for r in (0.0, 1e-12, 10.0, 19.999, 20.0):
        assert phi_eval(prof, r) == 1.0
        assert phi_log_slope(prof, r) == 0.0
        assert phi_deriv(prof, r) == 0.0


def test_floor_tail_is_exact(prof):
    for r in (prof.r_tail, 1e54, 1e60, 1e300):
        assert phi_eval(prof, r) == 0.25
        assert phi_log_slope(prof, r) == 0.0


def test_value_just_past_the_flat_edge(prof):
    # the quintic onset is so flat that 20.0001 still rounds to 1.0 in doubles;
    # a visible drop needs a finite step up the ramp
    assert phi_eval(prof, 20.0001) == 1.0
    v = phi_eval(prof, 21.0)
    assert 0.999999 < v < 1.0


def test_mid_decay_value(prof):
    # at u = ln(r/R) = 60 the ramp has been at full slope since u = 1, so
    # m(60) = 60 - integral deficit of the smoothstep ramp (exactly ramp/2)
    r = 20.0 * math.exp(60.0)
    expected = 1.0 - (0.05 / 8.0) * (60.0 - 0.5)
    assert phi_eval(prof, r) == pytest.approx(expected, rel=1e-12)
    assert -0.00625 <= phi_log_slope(prof, r) <= 0.0


def test_slope_budget_everywhere(prof):
    lo, hi = math.log(prof.R / 1000.0), math.log(prof.r_tail * 10.0)
    worst = 0.0
    for i in range(10_000):
        r = math.exp(((9999 - i) * lo + i * hi) / 9999.0)
        s = phi_log_slope(prof, r)
        assert s <= 0.0
        worst = max(worst, -s)
    assert worst <= 0.00625  # eps/8, no tolerance needed
    assert worst == 0.00625  # the plateau attains the budget exactly


def test_monotone_and_strict_radius_stretch(prof):
    lo, hi = math.log(prof.R / 1000.0), math.log(prof.r_tail * 10.0)
    prev_v = None
    prev_rv = None
    for i in range(5000):
        r = math.exp(((4999 - i) * lo + i * hi) / 4999.0)
        v = phi_eval(prof, r)
        assert 0.25 <= v <= 1.0
        if prev_v is not None:
            assert v <= prev_v
            assert r * v > prev_rv  # injectivity surrogate: phi(r) r strictly grows
        prev_v, prev_rv = v, r * v


def test_deriv_matches_central_differences_in_log_r(prof):
    # oracle: d(phi)/dr at r equals d(phi)/du / r with u = ln(r/R)
    for u in (0.5, 1.5, 30.0, 119.0, 120.3, 120.9):
        r = prof.R * math.exp(u)
        h = 1e-6
        fd_du = (phi_eval(prof, prof.R * math.exp(u + h))
                 - phi_eval(prof, prof.R * math.exp(u - h))) / (2.0 * h)
        assert phi_deriv(prof, r) * r == pytest.approx(fd_du, rel=1e-6, abs=1e-12)
        assert phi_log_slope(prof, r) == pytest.approx(fd_du, rel=1e-6, abs=1e-12)


def test_deriv_is_log_slope_over_r(prof):
    r = 20.0 * math.exp(3.0)
    assert phi_deriv(prof, r) == phi_log_slope(prof, r) / r


@given(st.floats(min_value=0.0, max_value=1e60, allow_nan=False),
       st.floats(min_value=0.0, max_value=1e60, allow_nan=False))
def test_monotone_property(r1, r2):
    prof = build_phi(20.0, 2.0, 0.05)
    lo, hi = sorted((r1, r2))
    assert phi_eval(prof, lo) >= phi_eval(prof, hi)


def test_eval_rejects_negative_radius(prof):
    with pytest.raises(ParameterError):
        phi_eval(prof, -1.0)
    with pytest.raises(ParameterError):
        phi_deriv(prof, -1e-300)
    with pytest.raises(ParameterError):
        phi_eval(prof, float("nan"))


def test_build_validation():
    with pytest.raises(ParameterError):
        build_phi(0.0, 2.0, 0.05)
    with pytest.raises(ParameterError):
        build_phi(20.0, 0.5, 0.05)  # floor would reach 1
    with pytest.raises(ParameterError):
        build_phi(20.0, 2.0, 1.0 / 16.0)  # eps must stay below 1/(8C)
    with pytest.raises(ParameterError):
        build_phi(20.0, 2.0, 0.0)
    with pytest.raises(ParameterError):
        build_phi(20.0, 2.0, 1e-300)  # tail radius overflows


def test_small_budget_shrinks_ramp():
    # when the total decay is under one log unit the ramp contracts to fit
    prof = build_phi(1.0, 0.51, 0.2)
    assert prof.ramp < 1.0
    assert prof.r_tail > prof.R
    assert phi_eval(prof, prof.r_tail) == prof.floor


def test_profile_fields_are_validated():
    with pytest.raises(ParameterError):
        PhiProfile(R=-1.0, C=2.0, eps=0.05, floor=0.25, m_target=120.0,
                   r_tail=1e50, ramp=1.0)
