"""Orbit-level analysis.

Four questions about a planar map, answered by finite computation:

- where does an orbit go (``classify_omega``: origin, a cycle, infinity, or
  undecided within budget);
- where exactly is a period-n orbit (``find_periodic``: Newton's method on
  f^n(x) - x with the chain-rule Jacobian along the orbit);
- how strongly does the map pull a large annulus inward
  (``dissipativity_bound``: sampled norm bound M on a ball, then the
  threshold radius 2(MR - alpha R)/(1 - alpha) and contraction factor
  (alpha+1)/2, both verified by sampling);
- is a sampled ray invariant (``verify_invariant_ray``: polyline distance of
  image points to the sampled curve).

``basin_raster`` runs the classifier over a pixel grid and is the one
parallel entry point: rows go to a process pool and are reassembled in row
order, so the raster is a deterministic function of its inputs no matter the
worker count (``DMY_THREADS`` caps it; 0 or unset means one worker per CPU).
"""

from __future__ import annotations

import math
import multiprocessing
import os
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

from .errors import ConvergenceError, NumericOverflowError, ParameterError, SingularSystemError
from .geometry import Mat2, Point2
from .planar import PlanarMap, fd_jacobian, step_function
from .spectral import EigenPair, eig2, operator_norm


class OmegaTag(Enum):
    CONVERGES_TO_ORIGIN = "converges-to-origin"
    PERIODIC = "periodic"
    ESCAPING = "escaping"
    UNDECIDED = "undecided"


@dataclass(frozen=True, slots=True)
class OmegaConfig:
    """Budgets for orbit classification.

    An orbit converges when it stays inside the origin ball for ``window``
    consecutive iterates, cycles when it revisits one of the last ``window``
    iterates within relative tolerance, and escapes when its norm passes
    ``escape_radius`` (non-finite counts as escaped).
    """

    max_iter: int = 10_000
    origin_tol: float = 1e-9
    escape_radius: float = 1e9
    window: int = 64
    cycle_rel_tol: float = 1e-7

    def __post_init__(self):
        if self.max_iter < 1:
            raise ParameterError(f"iteration budget must be >= 1, got {self.max_iter!r}")
        if self.window < 1:
            raise ParameterError(f"cycle window must be >= 1, got {self.window!r}")
        for name in ("origin_tol", "escape_radius", "cycle_rel_tol"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ParameterError(f"{name} must be positive and finite, got {v!r}")


@dataclass(frozen=True, slots=True)
class OmegaVerdict:
    """Outcome of one classification run.

    ``iterations`` is the number of map applications performed when the tag
    was decided (the first escaping index for ESCAPING, the full budget for
    UNDECIDED).  ``period`` and ``representative`` are set only for PERIODIC;
    the period is the smallest lag at which the tail revisited itself.
    """

    tag: OmegaTag
    iterations: int
    final_norm: float
    period: int | None = None
    representative: Point2 | None = None


def classify_omega(m: PlanarMap, p: Point2, cfg: OmegaConfig | None = None) -> OmegaVerdict:
    cfg = cfg or OmegaConfig()
    step = step_function(m)
    x, y = p.x, p.y
    nn = math.hypot(x, y)
    if not (nn <= cfg.escape_radius):
        return OmegaVerdict(OmegaTag.ESCAPING, 0, nn)
    tail = deque(maxlen=cfg.window)  # (x, y, norm) of recent iterates
    tail.append((x, y, nn))
    origin_run = 1 if nn <= cfg.origin_tol else 0
    tol = cfg.cycle_rel_tol
    for i in range(1, cfg.max_iter + 1):
        try:
            x, y = step(x, y)
        except (ArithmeticError, ValueError):
            # raw steps only raise once values leave the doubles entirely
            return OmegaVerdict(OmegaTag.ESCAPING, i, math.inf)
        nn = math.hypot(x, y)
        if not (nn <= cfg.escape_radius):  # also catches nan
            return OmegaVerdict(OmegaTag.ESCAPING, i, nn if math.isfinite(nn) else math.inf)
        if nn <= cfg.origin_tol:
            origin_run += 1
            if origin_run >= cfg.window:
                return OmegaVerdict(OmegaTag.CONVERGES_TO_ORIGIN, i, nn)
        else:
            origin_run = 0
            # smallest matching lag = minimal period; norm gap prefilters the
            # distance test since | |p|-|q| | <= |p-q|
            for lag in range(1, len(tail) + 1):
                bx, by, bn = tail[-lag]
                scale = nn if nn >= bn else bn
                if abs(nn - bn) > tol * scale:
                    continue
                if math.hypot(x - bx, y - by) <= tol * scale:
                    return OmegaVerdict(OmegaTag.PERIODIC, i, nn, lag, Point2(x, y))
        tail.append((x, y, nn))
    return OmegaVerdict(OmegaTag.UNDECIDED, cfg.max_iter, nn)


@dataclass(frozen=True, slots=True)
class NewtonConfig:
    tol: float = 1e-12
    max_steps: int = 50

    def __post_init__(self):
        if not (math.isfinite(self.tol) and self.tol > 0.0):
            raise ParameterError(f"tolerance must be positive and finite, got {self.tol!r}")
        if self.max_steps < 1:
            raise ParameterError(f"step budget must be >= 1, got {self.max_steps!r}")


_UNIT_CIRCLE_TOL = 1e-6


@dataclass(frozen=True, slots=True)
class PeriodicOrbit:
    """A numerically closed period-n orbit.

    ``points`` are consecutive images p0, f(p0), ..., f^{n-1}(p0), so the
    cycle property holds by construction up to the closure residual
    |f^n(p0) - p0|.  Multipliers are the eigenvalues of the chain-rule
    product of Jacobians along the orbit; the orbit is hyperbolic when both
    moduli are outside [1 - 1e-6, 1 + 1e-6].
    """

    period: int
    points: tuple[Point2, ...]
    residual: float
    multipliers: EigenPair
    hyperbolic: bool


def orbit_multipliers(m: PlanarMap, points) -> EigenPair:
    """Eigenvalues of the ordered Jacobian product along an orbit."""
    pts = tuple(points)
    if not pts:
        raise ParameterError("orbit must have at least one point")
    jac = Mat2.identity()
    for p in pts:
        jac = m.jacobian(p) @ jac
    return eig2(jac)


def _orbit_segment(m: PlanarMap, p0: Point2, n: int):
    pts = []
    cur = p0
    for _ in range(n):
        pts.append(cur)
        cur = m.eval(cur)
    return pts, cur


def _chain_jacobian(m: PlanarMap, pts, analytic: bool) -> Mat2:
    jac = Mat2.identity()
    for p in pts:
        jm = m.jacobian(p) if analytic else fd_jacobian(m, p, 1e-6)
        jac = jm @ jac
    return jac


def _newton_delta(m: PlanarMap, pts, gx: float, gy: float, analytic: bool):
    a = _chain_jacobian(m, pts, analytic) - Mat2.identity()
    det = a.det
    if abs(det) < 1e-14:
        kind = "analytic" if analytic else "finite-difference"
        raise SingularSystemError(
            f"newton system for {m.describe()} is singular ({kind} chain, |det| = {abs(det)!r})")
    return ((-gx * a.a22 + gy * a.a12) / det,
            (-gy * a.a11 + gx * a.a21) / det)


def find_periodic(m: PlanarMap, n: int, seed: Point2,
                  cfg: NewtonConfig | None = None) -> PeriodicOrbit:
    """Newton search for a period-n orbit from the given seed.

    Raises SingularSystemError when the Newton matrix D(f^n) - I is singular
    even after one finite-difference retry, and ConvergenceError (carrying
    the last iterate) when the step budget runs out.
    """
    cfg = cfg or NewtonConfig()
    if n < 1:
        raise ParameterError(f"period must be >= 1, got {n!r}")
    x = seed
    res = math.inf
    for attempt in range(cfg.max_steps + 1):
        try:
            pts, end = _orbit_segment(m, x, n)
        except NumericOverflowError as exc:
            raise ConvergenceError(f"orbit left the doubles during the newton search: {exc}",
                                   last_iterate=x, residual=res) from exc
        gx, gy = end.x - x.x, end.y - x.y
        res = math.hypot(gx, gy)
        if res < cfg.tol:
            mults = orbit_multipliers(m, pts)
            hyp = (abs(abs(mults.l1) - 1.0) > _UNIT_CIRCLE_TOL
                   and abs(abs(mults.l2) - 1.0) > _UNIT_CIRCLE_TOL)
            return PeriodicOrbit(period=n, points=tuple(pts), residual=res,
                                 multipliers=mults, hyperbolic=hyp)
        if attempt == cfg.max_steps:
            break
        try:
            dx, dy = _newton_delta(m, pts, gx, gy, analytic=True)
        except SingularSystemError:
            dx, dy = _newton_delta(m, pts, gx, gy, analytic=False)
        try:
            x = Point2(x.x + dx, x.y + dy)
        except ParameterError as exc:
            raise ConvergenceError(f"newton step diverged: {exc}",
                                   last_iterate=x, residual=res) from exc
    raise ConvergenceError(
        f"newton did not close a period-{n} orbit of {m.describe()} in "
        f"{cfg.max_steps} steps (last residual {res!r})",
        last_iterate=x, residual=res)


@dataclass(frozen=True, slots=True)
class DissipativitySampling:
    ball_radii: int = 64
    ball_span: float = 1e48  # ball sweep covers [radius/span, radius]
    angles: int = 16
    outer_radii: int = 48
    outer_span: float = 100.0  # contraction sweep covers [s0, span*s0]

    def __post_init__(self):
        if self.ball_radii < 1 or self.outer_radii < 2 or self.angles < 1:
            raise ParameterError("sampling resolution too small")
        if not (self.ball_span > 1.0 and self.outer_span > 1.0):
            raise ParameterError("sampling spans must exceed 1")


@dataclass(frozen=True, slots=True)
class DissipativityBound:
    """Sampled certificate that a map is eventually norm-contracting.

    From the sampled Jacobian norm bound on the ball (``norm_sup``, floored
    at 1 as ``norm_sup_used``), the threshold radius is

        2 * (norm_sup_used * R - alpha * R) / (1 - alpha)

    and the contraction factor is (alpha + 1) / 2.  ``hypothesis_ok`` records
    the sampled check |Df(p) p| < alpha |p| outside the ball; ``contraction_ok``
    records |f(p)| <= factor * |p| on [threshold, outer_span * threshold].
    """

    ball_radius: float
    alpha: float
    norm_sup: float
    norm_sup_used: float
    threshold_radius: float
    contraction_factor: float
    hypothesis_ok: bool
    hypothesis_max_ratio: float
    hypothesis_worst_at: Point2 | None
    contraction_ok: bool
    contraction_max_ratio: float
    contraction_worst_at: Point2 | None
    sample_count: int

    @property
    def passed(self) -> bool:
        return self.hypothesis_ok and self.contraction_ok


def _log_radii(lo: float, hi: float, n: int):
    if n == 1:
        return [hi]
    llo, lhi = math.log(lo), math.log(hi)
    return [math.exp(((n - 1 - i) * llo + i * lhi) / (n - 1)) for i in range(n)]


def _ring_points(radii, angles: int):
    for r in radii:
        for j in range(angles):
            t = 2.0 * math.pi * j / angles
            yield Point2(r * math.cos(t), r * math.sin(t))


def dissipativity_bound(m: PlanarMap, ball_radius: float, alpha: float,
                        cfg: DissipativitySampling | None = None) -> DissipativityBound:
    cfg = cfg or DissipativitySampling()
    if not (math.isfinite(ball_radius) and ball_radius > 0.0):
        raise ParameterError(f"ball radius must be positive and finite, got {ball_radius!r}")
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"alpha must lie in (0, 1), got {alpha!r}")

    count = 1
    norm_sup = operator_norm(m.jacobian(Point2(0.0, 0.0)))
    ball = _log_radii(ball_radius / cfg.ball_span, ball_radius, cfg.ball_radii)
    for p in _ring_points(ball, cfg.angles):
        count += 1
        norm_sup = max(norm_sup, operator_norm(m.jacobian(p)))
    norm_sup_used = max(norm_sup, 1.0)  # threshold formula needs a bound > alpha
    threshold = 2.0 * (norm_sup_used * ball_radius - alpha * ball_radius) / (1.0 - alpha)
    factor = (alpha + 1.0) / 2.0

    hyp_ratio = 0.0
    hyp_at = None
    for p in _ring_points(_log_radii(ball_radius, cfg.outer_span * threshold,
                                     cfg.outer_radii), cfg.angles):
        count += 1
        pn = p.norm()
        try:
            ratio = m.jacobian(p).apply(p).norm() / pn
        except NumericOverflowError:
            ratio = math.inf
        if ratio > hyp_ratio:
            hyp_ratio = ratio
            hyp_at = p
    con_ratio = 0.0
    con_at = None
    for p in _ring_points(_log_radii(threshold, cfg.outer_span * threshold,
                                     cfg.outer_radii), cfg.angles):
        count += 1
        pn = p.norm()
        try:
            ratio = m.eval(p).norm() / pn
        except NumericOverflowError:
            ratio = math.inf
        if ratio > con_ratio:
            con_ratio = ratio
            con_at = p
    return DissipativityBound(
        ball_radius=ball_radius, alpha=alpha,
        norm_sup=norm_sup, norm_sup_used=norm_sup_used,
        threshold_radius=threshold, contraction_factor=factor,
        hypothesis_ok=hyp_ratio < alpha, hypothesis_max_ratio=hyp_ratio,
        hypothesis_worst_at=hyp_at,
        contraction_ok=con_ratio <= factor, contraction_max_ratio=con_ratio,
        contraction_worst_at=con_at,
        sample_count=count)


@dataclass(frozen=True, slots=True)
class RayVerdict:
    """Outcome of an invariant-ray check.

    ``max_deviation`` is the largest distance from an image point to the
    polyline through the ray samples; ``radius_ok`` records whether every
    image stayed within the sampled radius range.
    """

    passed: bool
    max_deviation: float
    worst_index: int
    radius_ok: bool
    max_image_radius: float
    max_sample_radius: float


def _segment_dist(qx, qy, ax, ay, bx, by):
    vx, vy = bx - ax, by - ay
    wx, wy = qx - ax, qy - ay
    vv = vx * vx + vy * vy
    if vv <= 0.0:
        return math.hypot(wx, wy)
    t = (wx * vx + wy * vy) / vv
    if t <= 0.0:
        return math.hypot(wx, wy)
    if t >= 1.0:
        return math.hypot(qx - bx, qy - by)
    return math.hypot(wx - t * vx, wy - t * vy)


def _polyline_dist(q: Point2, samples) -> float:
    best = math.inf
    for a, b in zip(samples, samples[1:]):
        d = _segment_dist(q.x, q.y, a.x, a.y, b.x, b.y)
        if d < best:
            best = d
    return best


def verify_invariant_ray(m: PlanarMap, samples, tol: float) -> RayVerdict:
    """Check that the map sends a sampled ray into itself.

    The ray is given as points from the origin outward with strictly
    increasing radii.  Each sample's image must lie within ``tol`` of the
    polyline through the samples, and image radii must not exceed the
    sampled range (the polyline only represents the ray that far).
    """
    pts = tuple(samples)
    if len(pts) < 2:
        raise ParameterError("ray needs at least two samples")
    if pts[0].norm() != 0.0:
        raise ParameterError(f"ray must start at the origin, got {pts[0]!r}")
    if not (math.isfinite(tol) and tol >= 0.0):
        raise ParameterError(f"tolerance must be >= 0 and finite, got {tol!r}")
    radii = [p.norm() for p in pts]
    for a, b in zip(radii, radii[1:]):
        if not b > a:
            raise ParameterError(
                f"ray sample radii must increase strictly, got {a!r} then {b!r}")
    max_r = radii[-1]
    worst = -1.0
    worst_idx = 0
    img_max = 0.0
    radius_ok = True
    for i, p in enumerate(pts):
        try:
            q = m.eval(p)
        except NumericOverflowError:
            return RayVerdict(passed=False, max_deviation=math.inf, worst_index=i,
                              radius_ok=False, max_image_radius=math.inf,
                              max_sample_radius=max_r)
        qn = q.norm()
        img_max = max(img_max, qn)
        if qn > max_r * (1.0 + 1e-12):
            radius_ok = False
        d = _polyline_dist(q, pts)
        if d > worst:
            worst = d
            worst_idx = i
    return RayVerdict(passed=radius_ok and worst <= tol,
                      max_deviation=worst, worst_index=worst_idx,
                      radius_ok=radius_ok, max_image_radius=img_max,
                      max_sample_radius=max_r)


_TAG_CODE = {
    OmegaTag.CONVERGES_TO_ORIGIN: 0,
    OmegaTag.PERIODIC: 1,
    OmegaTag.ESCAPING: 2,
    OmegaTag.UNDECIDED: 3,
}

# below this many cells the fork+pickle overhead outweighs the row work
_SERIAL_CELL_LIMIT = 4096


@dataclass(frozen=True, slots=True)
class BasinConfig:
    omega: OmegaConfig = field(default_factory=OmegaConfig)
    workers: int | None = None  # None = one per CPU, still capped by DMY_THREADS

    def __post_init__(self):
        if self.workers is not None and self.workers < 1:
            raise ParameterError(f"worker count must be >= 1, got {self.workers!r}")


@dataclass(frozen=True, slots=True)
class BasinGrid:
    """Row-major cell classification over [-L, L]^2, top row first.

    Codes: 0 origin-basin, 1 periodic, 2 escaping, 3 undecided.
    """

    half_width: float
    width: int
    height: int
    codes: bytes

    def __post_init__(self):
        if not (math.isfinite(self.half_width) and self.half_width > 0.0):
            raise ParameterError(f"half-width must be positive and finite, got {self.half_width!r}")
        if self.width < 1 or self.height < 1:
            raise ParameterError(f"resolution must be >= 1x1, got {self.width}x{self.height}")
        if len(self.codes) != self.width * self.height:
            raise ParameterError(
                f"code buffer has {len(self.codes)} cells for a "
                f"{self.width}x{self.height} grid")

    def counts(self) -> tuple[int, int, int, int]:
        return (self.codes.count(0), self.codes.count(1),
                self.codes.count(2), self.codes.count(3))


def resolve_workers(requested: int | None = None) -> int:
    """Worker count for parallel sweeps: explicit request or one per CPU,
    capped by the DMY_THREADS environment variable (0 or unset = no cap)."""
    chosen = requested if requested is not None else (os.cpu_count() or 1)
    if chosen < 1:
        raise ParameterError(f"worker count must be >= 1, got {requested!r}")
    raw = os.environ.get("DMY_THREADS", "").strip()
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            raise ParameterError(f"DMY_THREADS must be an integer, got {raw!r}") from None
        if cap < 0:
            raise ParameterError(f"DMY_THREADS must be >= 0, got {cap!r}")
        if cap > 0:
            chosen = min(chosen, cap)
    return chosen


def _basin_row(task):
    m, half_width, width, height, omega_cfg, row = task
    y = half_width - (2 * row + 1) * half_width / height
    out = bytearray(width)
    for i in range(width):
        x = -half_width + (2 * i + 1) * half_width / width
        out[i] = _TAG_CODE[classify_omega(m, Point2(x, y), omega_cfg).tag]
    return bytes(out)


def basin_raster(m: PlanarMap, half_width: float, width: int, height: int,
                 cfg: BasinConfig | None = None) -> BasinGrid:
    """Classify every cell center of a width x height grid over [-L, L]^2.

    Deterministic regardless of worker count: rows are computed independently
    and joined in row order, and cell centers depend only on the grid shape.
    """
    cfg = cfg or BasinConfig()
    if not (math.isfinite(half_width) and half_width > 0.0):
        raise ParameterError(f"half-width must be positive and finite, got {half_width!r}")
    if width < 2 or height < 2:
        raise ParameterError(f"raster needs at least 2x2 cells, got {width}x{height}")
    tasks = [(m, half_width, width, height, cfg.omega, j) for j in range(height)]
    workers = resolve_workers(cfg.workers)
    if workers == 1 or width * height <= _SERIAL_CELL_LIMIT:
        rows = [_basin_row(t) for t in tasks]
    else:
        try:
            ctx = multiprocessing.get_context("fork")
        except ValueError:
            ctx = multiprocessing.get_context()
        with ProcessPoolExecutor(max_workers=min(workers, height), mp_context=ctx) as pool:
            rows = list(pool.map(_basin_row, tasks))
    return BasinGrid(half_width=half_width, width=width, height=height,
                     codes=b"".join(rows))
