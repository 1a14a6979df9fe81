"""The planar map family and its Jacobians.

Five variants share one interface: linear maps, the Szlenk cubic map

    F(x, y) = (-k y^3 / (1 + x^2 + y^2),  k x^3 / (1 + x^2 + y^2)),

its damped version F - a*Id, radial squashing by a profile phi, and
composition.  Map objects are immutable and ``eval``/``jacobian`` are pure
functions of their arguments, so instances can be shared freely across
threads or processes.

The damped variant reuses the plain Szlenk arithmetic verbatim and then
subtracts a*(x, y) term by term, so its image and Jacobian are exactly the
undamped ones shifted: same intermediate roundings, then one subtraction.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass

from .errors import NumericOverflowError, ParameterError
from .geometry import Mat2, Point2
from .phi import PhiProfile, phi_deriv, phi_eval

K_MAX = 2.0 / math.sqrt(3.0)  # Szlenk parameter lives in the open interval (1, K_MAX)


def _szlenk_xy(k, x, y):
    d = 1.0 + x * x + y * y
    return -(k * y * y * y) / d, (k * x * x * x) / d


def _szlenk_jac(k, x, y):
    # partials of (-k y^3/d, k x^3/d) with d = 1 + x^2 + y^2:
    #   d/dx(-k y^3/d) =  2 k x y^3 / d^2
    #   d/dy(-k y^3/d) = -k y^2 (3 + 3 x^2 + y^2) / d^2
    #   d/dx( k x^3/d) =  k x^2 (3 + x^2 + 3 y^2) / d^2
    #   d/dy( k x^3/d) = -2 k x^3 y / d^2
    d = 1.0 + x * x + y * y
    d2 = d * d
    return (
        2.0 * k * x * y * y * y / d2,
        -k * y * y * (3.0 + 3.0 * x * x + y * y) / d2,
        k * x * x * (3.0 + x * x + 3.0 * y * y) / d2,
        -2.0 * k * x * x * x * y / d2,
    )


class PlanarMap(ABC):
    """A differentiable self-map of the plane."""

    @abstractmethod
    def eval(self, p: Point2) -> Point2:
        """Image of p; raises NumericOverflowError if a component leaves the doubles."""

    @abstractmethod
    def jacobian(self, p: Point2) -> Mat2:
        """Analytic Jacobian at p."""

    @abstractmethod
    def describe(self) -> str:
        """Short human-readable tag used in reports and error messages."""

    @abstractmethod
    def _step_fn(self):
        """Raw (x, y) -> (x, y) closure for hot loops.

        Skips the finiteness guard for speed; callers must treat non-finite
        output as an escape.  The arithmetic matches ``eval`` operation for
        operation, so both paths produce bitwise-identical orbits.
        """

    def __call__(self, p: Point2) -> Point2:
        return self.eval(p)


def _guard(m: PlanarMap, p: Point2, fx: float, fy: float) -> Point2:
    if not (math.isfinite(fx) and math.isfinite(fy)):
        raise NumericOverflowError(
            f"{m.describe()} overflowed evaluating ({p.x!r}, {p.y!r})")
    return Point2(fx, fy)


def _guard_mat(m: PlanarMap, p: Point2, j11, j12, j21, j22) -> Mat2:
    if not (math.isfinite(j11) and math.isfinite(j12)
            and math.isfinite(j21) and math.isfinite(j22)):
        raise NumericOverflowError(
            f"{m.describe()} Jacobian overflowed at ({p.x!r}, {p.y!r})")
    return Mat2(j11, j12, j21, j22)


@dataclass(frozen=True, slots=True)
class LinearMap(PlanarMap):
    matrix: Mat2

    def eval(self, p):
        m = self.matrix
        return _guard(self, p, m.a11 * p.x + m.a12 * p.y, m.a21 * p.x + m.a22 * p.y)

    def jacobian(self, p):
        return self.matrix

    def describe(self):
        m = self.matrix
        return f"linear[[{m.a11!r},{m.a12!r}],[{m.a21!r},{m.a22!r}]]"

    def _step_fn(self):
        m = self.matrix
        a, b, c, d = m.a11, m.a12, m.a21, m.a22

        def step(x, y):
            return a * x + b * y, c * x + d * y

        return step


@dataclass(frozen=True, slots=True)
class SzlenkMap(PlanarMap):
    k: float

    def __post_init__(self):
        if not (1.0 < self.k < K_MAX):
            raise ParameterError(
                f"szlenk parameter must satisfy 1 < k < 2/sqrt(3) ~= {K_MAX:.10f}, got {self.k!r}")

    def eval(self, p):
        fx, fy = _szlenk_xy(self.k, p.x, p.y)
        return _guard(self, p, fx, fy)

    def jacobian(self, p):
        return _guard_mat(self, p, *_szlenk_jac(self.k, p.x, p.y))

    def describe(self):
        return f"szlenk(k={self.k!r})"

    def _step_fn(self):
        k = self.k

        def step(x, y):
            return _szlenk_xy(k, x, y)

        return step


@dataclass(frozen=True, slots=True)
class DampedSzlenkMap(PlanarMap):
    """Szlenk map minus a times the identity."""

    k: float
    a: float

    def __post_init__(self):
        if not (1.0 < self.k < K_MAX):
            raise ParameterError(
                f"szlenk parameter must satisfy 1 < k < 2/sqrt(3) ~= {K_MAX:.10f}, got {self.k!r}")
        if not (0.0 < self.a < 1.0):
            raise ParameterError(f"damping must satisfy 0 < a < 1, got {self.a!r}")

    def eval(self, p):
        fx, fy = _szlenk_xy(self.k, p.x, p.y)
        return _guard(self, p, fx - self.a * p.x, fy - self.a * p.y)

    def jacobian(self, p):
        j11, j12, j21, j22 = _szlenk_jac(self.k, p.x, p.y)
        return _guard_mat(self, p, j11 - self.a, j12, j21, j22 - self.a)

    def describe(self):
        return f"ga(k={self.k!r}, a={self.a!r})"

    def _step_fn(self):
        k, a = self.k, self.a

        def step(x, y):
            fx, fy = _szlenk_xy(k, x, y)
            return fx - a * x, fy - a * y

        return step


@dataclass(frozen=True, slots=True)
class RadialMap(PlanarMap):
    """Scale p by phi(|p|): identity on the flat disc, times the floor far out."""

    profile: PhiProfile

    def eval(self, p):
        f = phi_eval(self.profile, math.hypot(p.x, p.y))
        # f in [floor, 1] and p is finite, so no overflow is possible
        return Point2(f * p.x, f * p.y)

    def jacobian(self, p):
        r = math.hypot(p.x, p.y)
        if r == 0.0:
            f = phi_eval(self.profile, 0.0)
            return Mat2(f, 0.0, 0.0, f)
        f = phi_eval(self.profile, r)
        fp = phi_deriv(self.profile, r)
        if fp == 0.0:
            # flat zones: exactly f times the identity
            return Mat2(f, 0.0, 0.0, f)
        s = fp / r
        return Mat2(f + s * p.x * p.x, s * p.x * p.y,
                    s * p.x * p.y, f + s * p.y * p.y)

    def describe(self):
        pr = self.profile
        return f"radial(R={pr.R!r}, C={pr.C!r}, eps={pr.eps!r})"

    def _step_fn(self):
        prof = self.profile

        def step(x, y):
            f = phi_eval(prof, math.hypot(x, y))
            return f * x, f * y

        return step


@dataclass(frozen=True, slots=True)
class CompositeMap(PlanarMap):
    """Composition of maps; members apply right to left (members[-1] first)."""

    members: tuple[PlanarMap, ...]

    def __post_init__(self):
        if not self.members:
            raise ParameterError("composite needs at least one member")
        for m in self.members:
            if not isinstance(m, PlanarMap):
                raise ParameterError(f"composite member is not a planar map: {m!r}")

    def eval(self, p):
        for m in reversed(self.members):
            p = m.eval(p)
        return p

    def jacobian(self, p):
        # chain rule: ordered product of member Jacobians at the intermediate points
        jac = None
        cur = p
        for m in reversed(self.members):
            jm = m.jacobian(cur)
            jac = jm if jac is None else jm @ jac
            cur = m.eval(cur)
        return jac

    def describe(self):
        return "compose(" + " o ".join(m.describe() for m in self.members) + ")"

    def _step_fn(self):
        fns = tuple(m._step_fn() for m in reversed(self.members))

        def step(x, y):
            for f in fns:
                x, y = f(x, y)
            return x, y

        return step


def compose(outer: PlanarMap, inner: PlanarMap) -> CompositeMap:
    """outer after inner.  Nested composites flatten into one member tuple,
    which changes nothing observable: evaluation applies the same functions
    in the same order either way."""
    out_m = outer.members if isinstance(outer, CompositeMap) else (outer,)
    in_m = inner.members if isinstance(inner, CompositeMap) else (inner,)
    return CompositeMap(out_m + in_m)


def step_function(m: PlanarMap):
    """Raw float step closure for hot loops; see PlanarMap._step_fn."""
    return m._step_fn()


def fd_jacobian(m: PlanarMap, p: Point2, h: float) -> Mat2:
    """Central-difference Jacobian, the ground-truth oracle for the analytic ones."""
    if not (h > 0.0 and math.isfinite(h)):
        raise ParameterError(f"step must be positive and finite, got {h!r}")
    fxp = m.eval(Point2(p.x + h, p.y))
    fxm = m.eval(Point2(p.x - h, p.y))
    fyp = m.eval(Point2(p.x, p.y + h))
    fym = m.eval(Point2(p.x, p.y - h))
    inv = 1.0 / (2.0 * h)
    return Mat2((fxp.x - fxm.x) * inv, (fyp.x - fym.x) * inv,
                (fxp.y - fxm.y) * inv, (fyp.y - fym.y) * inv)


@dataclass(frozen=True, slots=True)
class Orbit:
    """A finite orbit segment.  ``escaped`` marks early termination, either
    because the norm passed the escape radius (the offending point is kept as
    the last entry) or because the evaluation overflowed (orbit truncated)."""

    points: tuple[Point2, ...]
    escaped: bool

    @property
    def final(self) -> Point2:
        return self.points[-1]


def iterate(m: PlanarMap, p: Point2, n: int, escape_radius: float = 1e9) -> Orbit:
    if n < 0:
        raise ParameterError(f"iteration count must be >= 0, got {n!r}")
    if not escape_radius > 0.0:
        raise ParameterError(f"escape radius must be positive, got {escape_radius!r}")
    pts = [p]
    cur = p
    for _ in range(n):
        try:
            cur = m.eval(cur)
        except NumericOverflowError:
            return Orbit(tuple(pts), True)
        pts.append(cur)
        if cur.norm() > escape_radius:
            return Orbit(tuple(pts), True)
    return Orbit(tuple(pts), False)
