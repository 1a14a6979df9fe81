"""Construction and verification of the squashed damped map.

The construction: damp the cubic map by subtracting a small multiple of the
identity, bound its Jacobian norm by a sampled constant, build a radial
profile that is 1 on a disc large enough to contain the period-4 orbit and
collapses to 1/(2C) far out, and compose.  The result fixes the origin,
keeps every sampled Jacobian eigenvalue inside the 0.95 disc, has a
hyperbolic period-4 orbit inside the flat disc, and halves norms beyond the
profile tail, so orbits cannot run away even though the origin is not a
global attractor.

``build_counterexample`` performs the parameter search (slope budget by
halving against the sampled spectral-radius cap, damping by halving when the
period-4 Newton search fails).  ``verify_counterexample`` re-derives the six
claims by sampling and returns a report of per-check verdicts; it never
raises on a failed claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .dynamics import NewtonConfig, find_periodic
from .errors import (ConvergenceError, NewtonError, NumericOverflowError,
                     ParameterError)
from .geometry import Point2
from .phi import PhiProfile, build_phi, phi_eval, phi_log_slope
from .planar import (CompositeMap, DampedSzlenkMap, K_MAX, PlanarMap, RadialMap,
                     compose)
from .spectral import operator_norm, spectral_radius

# the damped map's parameter must stay below 0.88 of the cubic-map ceiling so
# the spectral margin survives damping and squashing
K_CEIL = K_MAX * 0.88


@dataclass(frozen=True, slots=True)
class SweepConfig:
    """Sample counts and caps for the build search and the verification."""

    # spectral-radius sweeps of the composed map (also the eps search)
    sr_radii: int = 400
    sr_angles: int = 32
    sr_span: float = 10.0        # radii reach sr_span * r_tail
    sr_cap: float = 0.95
    # norm and spectral-radius sweep of the damped map (c_raw and the
    # damping precondition)
    norm_grid: int = 81
    norm_half_width: float = 50.0
    norm_radii: int = 240
    norm_angles: int = 32
    norm_r_max: float = 1e6
    ga_sr_cap: float = 0.9
    # tail-contraction sweep
    tail_radii: int = 128
    tail_angles: int = 16
    tail_r_max: float = 1e60
    # radial-map orientation sweep
    orient_radii: int = 256
    orient_angles: int = 16
    # profile envelope sweep
    phi_samples: int = 10_000
    # search budgets
    max_eps_halvings: int = 20
    max_a_halvings: int = 8
    newton_tol: float = 1e-12
    newton_max_steps: int = 60

    def __post_init__(self):
        for name in ("sr_radii", "sr_angles", "norm_grid", "norm_radii", "norm_angles",
                     "tail_radii", "tail_angles", "orient_radii", "orient_angles",
                     "phi_samples", "newton_max_steps"):
            if getattr(self, name) < 2:
                raise ParameterError(f"{name} must be >= 2, got {getattr(self, name)!r}")
        if self.max_eps_halvings < 0 or self.max_a_halvings < 0:
            raise ParameterError("halving budgets must be >= 0")


@dataclass(frozen=True, slots=True)
class CounterexampleBundle:
    """One constructed map with everything needed to verify it."""

    k: float
    a: float
    profile: PhiProfile
    damped: DampedSzlenkMap
    radial: RadialMap
    composite: CompositeMap
    c_raw: float   # sampled sup of the damped map's Jacobian norm
    c_used: float  # 1.05 * max(c_raw, 1), the bound the profile is built for

    @property
    def flat_radius(self) -> float:
        return self.profile.R


@dataclass(frozen=True)
class CheckRecord:
    name: str
    passed: bool
    detail: str
    data: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed,
                "detail": self.detail, "data": self.data}


@dataclass(frozen=True)
class VerificationReport:
    map_desc: str
    k: float
    a: float
    c_raw: float
    c_used: float
    eps: float
    floor: float
    flat_radius: float
    tail_radius: float
    checks: tuple[CheckRecord, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "map": self.map_desc,
            "k": self.k,
            "a": self.a,
            "c_raw": self.c_raw,
            "c_used": self.c_used,
            "eps": self.eps,
            "floor": self.floor,
            "flat_radius": self.flat_radius,
            "tail_radius": self.tail_radius,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
        }


def _log_radii(lo: float, hi: float, n: int):
    llo, lhi = math.log(lo), math.log(hi)
    return [math.exp(((n - 1 - i) * llo + i * lhi) / (n - 1)) for i in range(n)]


def _ring_points(radii, angles: int):
    for r in radii:
        for j in range(angles):
            t = 2.0 * math.pi * j / angles
            yield Point2(r * math.cos(t), r * math.sin(t))


def _lerp(lo: float, hi: float, i: int, n: int) -> float:
    return ((n - 1 - i) * lo + i * hi) / (n - 1)


def _damped_sweep(damped: DampedSzlenkMap, cfg: SweepConfig):
    """Sampled sup of Jacobian norm and spectral radius over a wide
    multi-scale region: a uniform grid around the origin plus log-spaced
    rings far beyond it."""
    sup_norm = 0.0
    sup_sr = 0.0
    g = cfg.norm_grid
    hw = cfg.norm_half_width

    def visit(p):
        nonlocal sup_norm, sup_sr
        jac = damped.jacobian(p)
        sup_norm = max(sup_norm, operator_norm(jac))
        sup_sr = max(sup_sr, spectral_radius(jac))

    visit(Point2(0.0, 0.0))
    for iy in range(g):
        y = _lerp(-hw, hw, iy, g)
        for ix in range(g):
            visit(Point2(_lerp(-hw, hw, ix, g), y))
    for p in _ring_points(_log_radii(1e-2, cfg.norm_r_max, cfg.norm_radii),
                          cfg.norm_angles):
        visit(p)
    return sup_norm, sup_sr


def _composite_sr_sweep(m: PlanarMap, flat_radius: float, tail_radius: float,
                        cfg: SweepConfig):
    """Max sampled spectral radius of the composed map's Jacobian over log
    radii from far inside the flat disc to past the profile tail."""
    sup = spectral_radius(m.jacobian(Point2(0.0, 0.0)))
    worst = Point2(0.0, 0.0)
    count = 1
    radii = _log_radii(flat_radius * 1e-6, cfg.sr_span * tail_radius, cfg.sr_radii)
    for p in _ring_points(radii, cfg.sr_angles):
        count += 1
        sr = spectral_radius(m.jacobian(p))
        if sr > sup:
            sup = sr
            worst = p
    return sup, worst, count


def _build_once(k: float, a: float, eps_init: float, cfg: SweepConfig) -> CounterexampleBundle:
    damped = DampedSzlenkMap(k, a)
    c_raw, ga_sr = _damped_sweep(damped, cfg)
    if ga_sr > cfg.ga_sr_cap:
        raise ParameterError(
            f"damping {a!r} pushes the sampled spectral radius of the damped map to "
            f"{ga_sr!r} > {cfg.ga_sr_cap!r}; pick a smaller damping")
    c_used = 1.05 * max(c_raw, 1.0)
    flat_radius = 2.0 / math.sqrt(k - 1.0)

    eps = min(eps_init, 0.9 / (8.0 * c_used))
    bundle = None
    for _ in range(cfg.max_eps_halvings + 1):
        profile = build_phi(flat_radius, c_used, eps)
        radial = RadialMap(profile)
        comp = compose(radial, damped)
        sup, worst, _ = _composite_sr_sweep(comp, flat_radius, profile.r_tail, cfg)
        if sup <= cfg.sr_cap:
            bundle = CounterexampleBundle(k=k, a=a, profile=profile, damped=damped,
                                          radial=radial, composite=comp,
                                          c_raw=c_raw, c_used=c_used)
            break
        eps /= 2.0
    if bundle is None:
        raise ParameterError(
            f"no slope budget under {eps_init!r} brought the sampled spectral radius "
            f"under {cfg.sr_cap!r} within {cfg.max_eps_halvings} halvings")

    # the period-4 orbit must exist inside the flat disc; a failed search
    # invalidates this damping value, which the caller then halves
    orbit = find_periodic(bundle.composite, 4, Point2(flat_radius / 2.0, 0.0),
                          NewtonConfig(tol=cfg.newton_tol, max_steps=cfg.newton_max_steps))
    norms = [p.norm() for p in orbit.points]
    if min(norms) <= 1e-6 or max(norms) >= flat_radius:
        raise ConvergenceError(
            f"period-4 search collapsed outside the punctured flat disc "
            f"(orbit radii {min(norms)!r}..{max(norms)!r})",
            last_iterate=orbit.points[0], residual=orbit.residual)
    return bundle


def build_counterexample(k: float, a: float = 0.005, eps_init: float = 0.05,
                         cfg: SweepConfig | None = None) -> CounterexampleBundle:
    """Build the composed map for the given cubic parameter and damping.

    The damping halves automatically (up to the configured budget) when the
    period-4 Newton search fails, since only smallness of the damping is
    required.  Raises ParameterError when k or the damping precondition is
    out of range or either search is exhausted.
    """
    cfg = cfg or SweepConfig()
    if not (1.0 < k < K_CEIL):
        raise ParameterError(
            f"cubic parameter must satisfy 1 < k < {K_CEIL!r}, got {k!r}")
    if not (0.0 < a < 1.0):
        raise ParameterError(f"damping must satisfy 0 < a < 1, got {a!r}")
    if not (math.isfinite(eps_init) and eps_init > 0.0):
        raise ParameterError(f"slope budget must be positive, got {eps_init!r}")
    cur = a
    last_newton: NewtonError | None = None
    for _ in range(cfg.max_a_halvings + 1):
        try:
            return _build_once(k, cur, eps_init, cfg)
        except NewtonError as exc:
            last_newton = exc
            cur /= 2.0
    raise ParameterError(
        f"period-4 orbit search kept failing down to damping {cur * 2.0!r}: {last_newton}")


def _check_origin_fixed(bundle: CounterexampleBundle) -> CheckRecord:
    img = bundle.composite.eval(Point2(0.0, 0.0))
    ok = img.x == 0.0 and img.y == 0.0
    return CheckRecord(
        name="origin-fixed", passed=ok,
        detail=f"image of the origin is ({img.x!r}, {img.y!r})",
        data={"image": [img.x, img.y]})


def _check_sr_bound(bundle: CounterexampleBundle, cfg: SweepConfig) -> CheckRecord:
    sup, worst, count = _composite_sr_sweep(bundle.composite, bundle.flat_radius,
                                            bundle.profile.r_tail, cfg)
    bound = cfg.sr_cap + 1e-9
    return CheckRecord(
        name="spectral-radius-bound", passed=sup <= bound,
        detail=f"max sampled spectral radius {sup!r} vs cap {bound!r} over {count} samples",
        data={"max": sup, "cap": bound, "samples": count, "worst": [worst.x, worst.y]})


def _check_tail_contraction(bundle: CounterexampleBundle, cfg: SweepConfig) -> CheckRecord:
    r_tail = bundle.profile.r_tail
    if r_tail >= cfg.tail_r_max:
        return CheckRecord(
            name="tail-contraction", passed=False,
            detail=f"profile tail {r_tail!r} is beyond the sampling cap {cfg.tail_r_max!r}",
            data={"tail_radius": r_tail, "cap": cfg.tail_r_max, "samples": 0})
    worst = 0.0
    worst_at = Point2(r_tail, 0.0)
    count = 0
    for p in _ring_points(_log_radii(r_tail, cfg.tail_r_max, cfg.tail_radii),
                          cfg.tail_angles):
        count += 1
        try:
            ratio = bundle.composite.eval(p).norm() / p.norm()
        except NumericOverflowError:
            ratio = math.inf
        if ratio > worst:
            worst = ratio
            worst_at = p
    return CheckRecord(
        name="tail-contraction", passed=worst <= 0.5,
        detail=f"max |f(p)|/|p| = {worst!r} over {count} tail samples (bound 0.5)",
        data={"max_ratio": worst, "samples": count, "worst": [worst_at.x, worst_at.y]})


def _check_orientation(bundle: CounterexampleBundle, cfg: SweepConfig) -> CheckRecord:
    """det of the radial map's Jacobian stays positive at every sample."""
    worst = math.inf
    worst_at = Point2(0.0, 0.0)
    count = 1
    det0 = bundle.radial.jacobian(Point2(0.0, 0.0)).det
    if det0 < worst:
        worst = det0
    hi = min(cfg.tail_r_max, cfg.sr_span * bundle.profile.r_tail)
    for p in _ring_points(_log_radii(bundle.flat_radius * 1e-6, hi, cfg.orient_radii),
                          cfg.orient_angles):
        count += 1
        det = bundle.radial.jacobian(p).det
        if det < worst:
            worst = det
            worst_at = p
    return CheckRecord(
        name="radial-orientation", passed=worst > 0.0,
        detail=f"min sampled radial Jacobian det {worst!r} over {count} samples",
        data={"min_det": worst, "samples": count, "worst": [worst_at.x, worst_at.y]})


def _check_periodic_orbit(bundle: CounterexampleBundle, cfg: SweepConfig) -> CheckRecord:
    name = "period-4-orbit"
    seed = Point2(bundle.flat_radius / 2.0, 0.0)
    try:
        orbit = find_periodic(bundle.composite, 4, seed,
                              NewtonConfig(tol=cfg.newton_tol,
                                           max_steps=cfg.newton_max_steps))
    except NewtonError as exc:
        return CheckRecord(name=name, passed=False,
                           detail=f"newton search failed: {exc}", data={})
    mults = orbit.multipliers
    gap = min(abs(abs(mults.l1) - 1.0), abs(abs(mults.l2) - 1.0))
    norms = [p.norm() for p in orbit.points]
    in_disc = min(norms) > 0.0 and max(norms) < bundle.flat_radius
    ok = orbit.residual < 1e-10 and gap >= 1e-3 and in_disc
    return CheckRecord(
        name=name, passed=ok,
        detail=(f"residual {orbit.residual!r}, unit-circle gap {gap!r}, "
                f"orbit radii {min(norms)!r}..{max(norms)!r} inside disc of "
                f"{bundle.flat_radius!r}: {in_disc}"),
        data={"points": [[p.x, p.y] for p in orbit.points],
              "residual": orbit.residual,
              "multipliers": [[mults.l1.real, mults.l1.imag],
                              [mults.l2.real, mults.l2.imag]],
              "unit_circle_gap": gap,
              "hyperbolic": orbit.hyperbolic})


def _check_envelope(bundle: CounterexampleBundle, cfg: SweepConfig) -> CheckRecord:
    prof = bundle.profile
    slope_budget = prof.eps / 8.0
    radii = [0.0, prof.R * 0.5, prof.R]
    radii += _log_radii(prof.R * 1e-3, cfg.sr_span * prof.r_tail, cfg.phi_samples)
    radii += [prof.r_tail, prof.r_tail * 10.0, min(cfg.tail_r_max, prof.r_tail * 1e6)]
    radii = sorted(set(radii))
    range_ok = True
    monotone_ok = True
    slope_ok = True
    flat_ok = True
    floor_ok = True
    stretch_ok = True
    max_slope = 0.0
    prev_val = None
    prev_stretch = None
    for r in radii:
        val = phi_eval(prof, r)
        if not prof.floor <= val <= 1.0:
            range_ok = False
        if prev_val is not None and val > prev_val:
            monotone_ok = False
        slope = abs(phi_log_slope(prof, r))
        max_slope = max(max_slope, slope)
        if slope > slope_budget:
            slope_ok = False
        if r <= prof.R and val != 1.0:
            flat_ok = False
        if r >= prof.r_tail and val != prof.floor:
            floor_ok = False
        if r > 0.0:
            stretch = val * r  # the radial map sends radius r to this
            if prev_stretch is not None and not stretch > prev_stretch:
                stretch_ok = False
            prev_stretch = stretch
        prev_val = val
    ok = range_ok and monotone_ok and slope_ok and flat_ok and floor_ok and stretch_ok
    return CheckRecord(
        name="profile-envelope", passed=ok,
        detail=(f"range {range_ok}, monotone {monotone_ok}, slope {slope_ok} "
                f"(max {max_slope!r} vs budget {slope_budget!r}), flat disc {flat_ok}, "
                f"floor tail {floor_ok}, radius stretch strictly increasing {stretch_ok}"),
        data={"samples": len(radii), "max_abs_log_slope": max_slope,
              "slope_budget": slope_budget, "range_ok": range_ok,
              "monotone_ok": monotone_ok, "flat_ok": flat_ok,
              "floor_ok": floor_ok, "stretch_ok": stretch_ok})


def verify_counterexample(bundle: CounterexampleBundle,
                          cfg: SweepConfig | None = None) -> VerificationReport:
    """Re-check the six claims about a built bundle by sampling.

    Failures are verdicts in the report, never exceptions, so a deliberately
    broken bundle yields a failing report rather than a crash.
    """
    cfg = cfg or SweepConfig()
    checks = (
        _check_origin_fixed(bundle),
        _check_sr_bound(bundle, cfg),
        _check_tail_contraction(bundle, cfg),
        _check_orientation(bundle, cfg),
        _check_periodic_orbit(bundle, cfg),
        _check_envelope(bundle, cfg),
    )
    return VerificationReport(
        map_desc=bundle.composite.describe(),
        k=bundle.k, a=bundle.a, c_raw=bundle.c_raw, c_used=bundle.c_used,
        eps=bundle.profile.eps, floor=bundle.profile.floor,
        flat_radius=bundle.flat_radius, tail_radius=bundle.profile.r_tail,
        checks=checks)
