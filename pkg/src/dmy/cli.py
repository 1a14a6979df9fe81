"""Command-line front end.

One executable, eight subcommands:

    dmy {spectrum|orbit|periodic|basin|counterexample|phi|ray|dissipativity}

Maps are selected with ``--map {linear|szlenk|ga|counterexample}`` plus
variant parameters (``--matrix a11,a12,a21,a22``, ``--k``, ``--a``).
Regions are ``xmin:xmax:ymin:ymax``, grids are ``NxM``.  Reports are JSON,
tables are CSV with 17-significant-digit floats, basin images are binary
PGM; every file is written atomically (temporary file, then rename).

Exit codes: 0 all checks passed, 1 a verdict failed or a search did not
converge, 2 usage or parameter error, 3 I/O error.

A ``--config file.json`` supplies defaults for any flag of the subcommand
(keys are flag names with underscores); flags given on the command line win.
Every JSON report embeds the fully resolved configuration under ``config``,
and feeding that object back via ``--config`` reproduces the report.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import tempfile

from .counterexample import build_counterexample, verify_counterexample
from .dynamics import (BasinConfig, BasinGrid, NewtonConfig, OmegaConfig,
                       DissipativitySampling, basin_raster, dissipativity_bound,
                       find_periodic, verify_invariant_ray)
from .errors import NewtonError, NumericOverflowError, ParameterError
from .geometry import Mat2, Point2
from .planar import (DampedSzlenkMap, LinearMap, PlanarMap, SzlenkMap, iterate)
from .spectral import (GridStrategy, RandomStrategy, Rect, SpectrumReport, Verdict,
                       check_ball, check_interval_free, check_real_free,
                       sample_spectrum)

# tokens that begin with a minus and a digit (or a decimal point) are values,
# not flags, so --region -30:30:-30:30 parses without an equals sign
_NEG_VALUE = re.compile(r"^-(\d|\.\d).*$")

_MAP_OPTS = [
    ("map", "--map", "str", None,
     "map variant: linear | szlenk | ga | counterexample"),
    ("matrix", "--matrix", "str", None,
     "entries a11,a12,a21,a22 of the linear map (with --map linear)"),
    ("k", "--k", "float", 1.01,
     "cubic map parameter, in (1, 2/sqrt(3)) (default: 1.01)"),
    ("a", "--a", "float", 0.005,
     "damping subtracted from the identity (default: 0.005)"),
    ("eps_init", "--eps-init", "float", 0.05,
     "starting slope budget when building the counterexample map (default: 0.05)"),
]

_IO_OPTS = [
    ("out", "--out", "str", None,
     "output file (default: JSON/CSV to stdout; required for basin images)"),
    ("config", "--config", "str", None,
     "JSON file with defaults for this subcommand's flags; flags win"),
]

_OPTS = {
    "spectrum": _MAP_OPTS + [
        ("region", "--region", "str", "-30:30:-30:30",
         "sample region xmin:xmax:ymin:ymax (default: -30:30:-30:30)"),
        ("grid", "--grid", "str", "201x201",
         "grid resolution NxM (default: 201x201)"),
        ("random", "--random", "int", 0,
         "sample this many random points instead of the grid (default: 0 = grid)"),
        ("rng_seed", "--rng-seed", "int", 0,
         "seed for --random sampling (default: 0)"),
        ("check", "--check", "multi", [],
         "spectrum verdict, repeatable: ball:RADIUS | interval-free:LO:HI | real-free"),
    ] + _IO_OPTS,
    "orbit": _MAP_OPTS + [
        ("start", "--start", "str", "10,0", "starting point x,y (default: 10,0)"),
        ("steps", "--steps", "int", 100, "iterations to record (default: 100)"),
        ("escape_radius", "--escape-radius", "float", 1e9,
         "stop once the orbit norm passes this (default: 1e9)"),
    ] + _IO_OPTS,
    "periodic": _MAP_OPTS + [
        ("seed", "--seed", "str", "10,0", "newton starting point x,y (default: 10,0)"),
        ("period", "--period", "int", 4, "orbit period to search for (default: 4)"),
        ("tol", "--tol", "float", 1e-12, "closure residual target (default: 1e-12)"),
        ("max_steps", "--max-steps", "int", 50, "newton step budget (default: 50)"),
    ] + _IO_OPTS,
    "basin": _MAP_OPTS + [
        ("L", "--L", "float", 30.0, "window half-width, cells cover [-L,L]^2 (default: 30)"),
        ("grid", "--grid", "str", "256x256", "raster resolution WxH (default: 256x256)"),
        ("max_iter", "--max-iter", "int", 10_000,
         "classification budget per cell (default: 10000)"),
        ("origin_tol", "--origin-tol", "float", 1e-9,
         "origin-ball radius for convergence (default: 1e-9)"),
        ("escape_radius", "--escape-radius", "float", 1e9,
         "norm beyond which a cell escapes (default: 1e9)"),
        ("window", "--window", "int", 64,
         "tail length for cycle detection (default: 64)"),
        ("cycle_tol", "--cycle-tol", "float", 1e-7,
         "relative tolerance for cycle detection (default: 1e-7)"),
        ("workers", "--workers", "int", 0,
         "row workers; 0 = one per CPU; DMY_THREADS caps it (default: 0)"),
    ] + _IO_OPTS,
    "counterexample": [
        ("k", "--k", "float", 1.01, "cubic map parameter (default: 1.01)"),
        ("a", "--a", "float", 0.005, "damping (default: 0.005)"),
        ("eps_init", "--eps-init", "float", 0.05,
         "starting slope budget for the profile search (default: 0.05)"),
    ] + _IO_OPTS,
    "phi": [
        ("R", "--R", "float", 20.0, "inner flat radius (default: 20)"),
        ("C", "--C", "float", 2.0, "Jacobian norm bound; tail value is 1/(2C) (default: 2)"),
        ("eps", "--eps", "float", 0.05, "slope budget, in (0, 1/(8C)) (default: 0.05)"),
        ("log_samples", "--log-samples", "int", 50,
         "data rows, log-spaced from R/10 to 10*r_tail (default: 50)"),
    ] + _IO_OPTS,
    "ray": _MAP_OPTS + [
        ("angle", "--angle", "float", 0.0, "ray direction in degrees (default: 0)"),
        ("radius", "--radius", "float", 100.0, "outer sample radius (default: 100)"),
        ("samples", "--samples", "int", 101, "ray sample count (default: 101)"),
        ("tol", "--tol", "float", 1e-9,
         "max allowed image distance to the ray (default: 1e-9)"),
    ] + _IO_OPTS,
    "dissipativity": _MAP_OPTS + [
        ("radius", "--radius", "str", "20",
         "ball radius for the norm bound; 'tail' uses the built profile's tail "
         "radius (counterexample map only) (default: 20)"),
        ("alpha", "--alpha", "float", 0.5, "hypothesis constant, in (0,1) (default: 0.5)"),
        ("ball_radii", "--ball-radii", "int", 64,
         "radial samples inside the ball (default: 64)"),
        ("angles", "--angles", "int", 16, "angular samples per ring (default: 16)"),
        ("outer_radii", "--outer-radii", "int", 48,
         "radial samples outside the ball (default: 48)"),
    ] + _IO_OPTS,
}

_SUB_HELP = {
    "spectrum": "sweep Jacobian eigenvalues over a region and test bounds",
    "orbit": "iterate a map and write the orbit as CSV",
    "periodic": "newton search for a period-n orbit",
    "basin": "rasterize omega-limit classes over a window into a PGM image",
    "counterexample": "build the squashed damped cubic map and verify its claims",
    "phi": "tabulate a radial squashing profile as CSV",
    "ray": "check that a map sends a sampled ray into itself",
    "dissipativity": "sampled eventual-contraction certificate on large norms",
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dmy",
        description="planar map toolkit: spectra, orbits, basins, and the "
                    "squashed damped cubic construction",
        allow_abbrev=False)
    parser._negative_number_matcher = _NEG_VALUE
    subs = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    for name, opts in _OPTS.items():
        sp = subs.add_parser(name, help=_SUB_HELP[name], description=_SUB_HELP[name],
                             allow_abbrev=False)
        sp._negative_number_matcher = _NEG_VALUE
        for dest, flag, kind, _default, hlp in opts:
            if kind == "multi":
                sp.add_argument(flag, dest=dest, action="append",
                                default=argparse.SUPPRESS, metavar="SPEC", help=hlp)
            elif kind == "int":
                sp.add_argument(flag, dest=dest, type=int,
                                default=argparse.SUPPRESS, help=hlp)
            elif kind == "float":
                sp.add_argument(flag, dest=dest, type=float,
                                default=argparse.SUPPRESS, help=hlp)
            else:
                sp.add_argument(flag, dest=dest, type=str,
                                default=argparse.SUPPRESS, help=hlp)
    return parser


def _coerce(dest: str, kind: str, value):
    if kind == "multi":
        if not (isinstance(value, list) and all(isinstance(v, str) for v in value)):
            raise ParameterError(f"config key {dest!r} must be a list of strings")
        return list(value)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParameterError(f"config key {dest!r} must be an integer, got {value!r}")
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ParameterError(f"config key {dest!r} must be a number, got {value!r}")
        return float(value)
    if isinstance(value, str):
        return value
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return repr(value)  # numeric spellings of string flags are accepted
    raise ParameterError(f"config key {dest!r} must be a string, got {value!r}")


def _merge_config(sub: str, provided: dict) -> dict:
    opts = _OPTS[sub]
    file_values: dict = {}
    path = provided.get("config")
    if path is not None:
        with open(path, "r", encoding="utf-8") as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParameterError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ParameterError(f"config {path} must hold a JSON object")
        cfg_sub = raw.get("subcommand")
        if cfg_sub is not None and cfg_sub != sub:
            raise ParameterError(
                f"config {path} is for subcommand {cfg_sub!r}, not {sub!r}")
        known = {dest for dest, *_ in opts}
        unknown = sorted(set(raw) - known - {"subcommand", "config"})
        if unknown:
            raise ParameterError(f"config {path} has unknown keys: {', '.join(unknown)}")
        file_values = raw
    resolved = {}
    for dest, _flag, kind, default, _hlp in opts:
        if dest in provided:
            resolved[dest] = provided[dest]
        elif dest != "config" and file_values.get(dest) is not None:
            resolved[dest] = _coerce(dest, kind, file_values[dest])
        else:
            resolved[dest] = default
    return resolved


def _embedded_config(sub: str, resolved: dict) -> dict:
    out = {"subcommand": sub}
    for dest, *_ in _OPTS[sub]:
        if dest not in ("out", "config"):
            out[dest] = resolved[dest]
    return out


def _parse_floats(text: str, n: int, what: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != n:
        raise ParameterError(f"{what} needs {n} comma-separated numbers, got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise ParameterError(f"{what} has a non-numeric entry: {text!r}") from None


def _parse_point(text: str, what: str) -> Point2:
    x, y = _parse_floats(text, 2, what)
    return Point2(x, y)


def _parse_region(text: str) -> Rect:
    parts = text.split(":")
    if len(parts) != 4:
        raise ParameterError(f"region must be xmin:xmax:ymin:ymax, got {text!r}")
    try:
        xmin, xmax, ymin, ymax = (float(p) for p in parts)
    except ValueError:
        raise ParameterError(f"region has a non-numeric bound: {text!r}") from None
    return Rect(xmin, xmax, ymin, ymax)


def _parse_grid(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"(\d+)x(\d+)", text)
    if not m:
        raise ParameterError(f"grid must be NxM, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def _make_map(resolved: dict):
    variant = resolved.get("map")
    if variant is None:
        raise ParameterError("--map is required for this subcommand")
    if variant == "linear":
        if resolved.get("matrix") is None:
            raise ParameterError("--map linear needs --matrix a11,a12,a21,a22")
        vals = _parse_floats(resolved["matrix"], 4, "--matrix")
        return LinearMap(Mat2(*vals)), None
    if variant == "szlenk":
        return SzlenkMap(resolved["k"]), None
    if variant == "ga":
        return DampedSzlenkMap(resolved["k"], resolved["a"]), None
    if variant == "counterexample":
        bundle = build_counterexample(resolved["k"], resolved["a"], resolved["eps_init"])
        return bundle.composite, bundle
    raise ParameterError(
        f"unknown map variant {variant!r}; pick linear, szlenk, ga, or counterexample")


def _write_atomic(path: str, data: bytes) -> None:
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target), prefix=".dmy-tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _emit_json(obj: dict, out: str | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        _write_atomic(out, text.encode("utf-8"))


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _emit_csv(header: list[str], rows, out: str | None) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        _write_atomic(out, text.encode("utf-8"))


_PGM_SHADES = b"\xff\xaa\x55\x00"  # codes 0..3, white to black


def render_pgm(grid: BasinGrid) -> bytes:
    table = bytearray(256)
    table[:4] = _PGM_SHADES
    header = f"P5\n{grid.width} {grid.height}\n255\n".encode("ascii")
    return header + grid.codes.translate(bytes(table))


def _point_or_none(p: Point2 | None):
    return None if p is None else [p.x, p.y]


def _verdict_dict(v: Verdict) -> dict:
    return {"name": v.name, "passed": v.passed, "detail": v.detail,
            "witness_value": v.witness_value, "witness_at": _point_or_none(v.witness_at)}


def _run_spectrum_check(report: SpectrumReport, spec: str) -> Verdict:
    head, _, rest = spec.partition(":")
    try:
        if head == "ball":
            return check_ball(report, float(rest))
        if head == "interval-free":
            lo_s, _, hi_s = rest.partition(":")
            return check_interval_free(report, float(lo_s), float(hi_s))
        if head == "real-free":
            if rest:
                raise ParameterError(f"real-free takes no arguments, got {spec!r}")
            return check_real_free(report)
    except ValueError as exc:
        raise ParameterError(f"bad check spec {spec!r}: {exc}") from None
    raise ParameterError(
        f"unknown check {spec!r}; use ball:RADIUS, interval-free:LO:HI, or real-free")


def _run_spectrum(sub: str, resolved: dict) -> int:
    m, _ = _make_map(resolved)
    region = _parse_region(resolved["region"])
    if resolved["random"] > 0:
        strategy = RandomStrategy(resolved["random"], resolved["rng_seed"])
    else:
        nx, ny = _parse_grid(resolved["grid"])
        strategy = GridStrategy(nx, ny)
    report = sample_spectrum(m, region, strategy)
    verdicts = [_run_spectrum_check(report, spec) for spec in resolved["check"]]
    obj = {
        "config": _embedded_config(sub, resolved),
        "map": report.map_desc,
        "strategy": report.strategy,
        "samples": report.sample_count,
        "overflows": report.overflow_count,
        "max_modulus": report.max_modulus,
        "max_modulus_at": _point_or_none(report.max_modulus_at),
        "real_count": report.real_count,
        "min_real": report.min_real,
        "min_real_at": _point_or_none(report.min_real_at),
        "max_real": report.max_real,
        "max_real_at": _point_or_none(report.max_real_at),
        "checks": [_verdict_dict(v) for v in verdicts],
        "passed": all(v.passed for v in verdicts),
    }
    _emit_json(obj, resolved["out"])
    return 0 if obj["passed"] else 1


def _run_orbit(sub: str, resolved: dict) -> int:
    m, _ = _make_map(resolved)
    start = _parse_point(resolved["start"], "--start")
    if resolved["steps"] < 0:
        raise ParameterError(f"--steps must be >= 0, got {resolved['steps']!r}")
    orbit = iterate(m, start, resolved["steps"], resolved["escape_radius"])
    rows = ((i, p.x, p.y, p.norm()) for i, p in enumerate(orbit.points))
    _emit_csv(["step", "x", "y", "norm"], rows, resolved["out"])
    return 0


def _run_periodic(sub: str, resolved: dict) -> int:
    m, _ = _make_map(resolved)
    orbit = find_periodic(m, resolved["period"], _parse_point(resolved["seed"], "--seed"),
                          NewtonConfig(tol=resolved["tol"], max_steps=resolved["max_steps"]))
    mults = orbit.multipliers
    obj = {
        "config": _embedded_config(sub, resolved),
        "map": m.describe(),
        "period": orbit.period,
        "points": [[p.x, p.y] for p in orbit.points],
        "residual": orbit.residual,
        "multipliers": [[mults.l1.real, mults.l1.imag], [mults.l2.real, mults.l2.imag]],
        "hyperbolic": orbit.hyperbolic,
    }
    _emit_json(obj, resolved["out"])
    return 0


def _run_basin(sub: str, resolved: dict) -> int:
    m, _ = _make_map(resolved)
    if resolved["out"] is None:
        raise ParameterError("basin writes a binary PGM image; --out is required")
    width, height = _parse_grid(resolved["grid"])
    omega = OmegaConfig(max_iter=resolved["max_iter"], origin_tol=resolved["origin_tol"],
                        escape_radius=resolved["escape_radius"], window=resolved["window"],
                        cycle_rel_tol=resolved["cycle_tol"])
    workers = resolved["workers"]
    cfg = BasinConfig(omega=omega, workers=None if workers == 0 else workers)
    grid = basin_raster(m, resolved["L"], width, height, cfg)
    _write_atomic(resolved["out"], render_pgm(grid))
    return 0


def _run_counterexample(sub: str, resolved: dict) -> int:
    bundle = build_counterexample(resolved["k"], resolved["a"], resolved["eps_init"])
    report = verify_counterexample(bundle)
    obj = {"config": _embedded_config(sub, resolved)}
    obj.update(report.to_dict())
    _emit_json(obj, resolved["out"])
    return 0 if report.passed else 1


def _run_phi(sub: str, resolved: dict) -> int:
    from .phi import build_phi, phi_eval, phi_log_slope

    profile = build_phi(resolved["R"], resolved["C"], resolved["eps"])
    n = resolved["log_samples"]
    if n < 2:
        raise ParameterError(f"--log-samples must be >= 2, got {n!r}")
    lo, hi = math.log(profile.R / 10.0), math.log(10.0 * profile.r_tail)
    rows = []
    for i in range(n):
        r = math.exp(((n - 1 - i) * lo + i * hi) / (n - 1))
        rows.append((r, phi_eval(profile, r), phi_log_slope(profile, r)))
    _emit_csv(["r", "phi", "phi_prime_times_r"], rows, resolved["out"])
    return 0


def _run_ray(sub: str, resolved: dict) -> int:
    m, _ = _make_map(resolved)
    n = resolved["samples"]
    if n < 2:
        raise ParameterError(f"--samples must be >= 2, got {n!r}")
    if not resolved["radius"] > 0.0:
        raise ParameterError(f"--radius must be positive, got {resolved['radius']!r}")
    t = math.radians(resolved["angle"])
    cx, cy = math.cos(t), math.sin(t)
    pts = [Point2(cx * (i * resolved["radius"] / (n - 1)),
                  cy * (i * resolved["radius"] / (n - 1))) for i in range(n)]
    verdict = verify_invariant_ray(m, pts, resolved["tol"])
    obj = {
        "config": _embedded_config(sub, resolved),
        "map": m.describe(),
        "passed": verdict.passed,
        "max_deviation": verdict.max_deviation,
        "worst_index": verdict.worst_index,
        "radius_ok": verdict.radius_ok,
        "max_image_radius": verdict.max_image_radius,
        "max_sample_radius": verdict.max_sample_radius,
    }
    _emit_json(obj, resolved["out"])
    return 0 if verdict.passed else 1


def _run_dissipativity(sub: str, resolved: dict) -> int:
    m, bundle = _make_map(resolved)
    raw = resolved["radius"]
    if raw == "tail":
        if bundle is None:
            raise ParameterError("--radius tail needs --map counterexample")
        radius = bundle.profile.r_tail
    else:
        try:
            radius = float(raw)
        except ValueError:
            raise ParameterError(f"--radius must be a number or 'tail', got {raw!r}") from None
    sampling = DissipativitySampling(ball_radii=resolved["ball_radii"],
                                     angles=resolved["angles"],
                                     outer_radii=resolved["outer_radii"])
    bound = dissipativity_bound(m, radius, resolved["alpha"], sampling)
    obj = {
        "config": _embedded_config(sub, resolved),
        "map": m.describe(),
        "ball_radius": bound.ball_radius,
        "alpha": bound.alpha,
        "norm_sup": bound.norm_sup,
        "norm_sup_used": bound.norm_sup_used,
        "threshold_radius": bound.threshold_radius,
        "contraction_factor": bound.contraction_factor,
        "hypothesis_ok": bound.hypothesis_ok,
        "hypothesis_max_ratio": bound.hypothesis_max_ratio,
        "hypothesis_worst_at": _point_or_none(bound.hypothesis_worst_at),
        "contraction_ok": bound.contraction_ok,
        "contraction_max_ratio": bound.contraction_max_ratio,
        "contraction_worst_at": _point_or_none(bound.contraction_worst_at),
        "samples": bound.sample_count,
        "passed": bound.passed,
    }
    _emit_json(obj, resolved["out"])
    return 0 if bound.passed else 1


_DISPATCH = {
    "spectrum": _run_spectrum,
    "orbit": _run_orbit,
    "periodic": _run_periodic,
    "basin": _run_basin,
    "counterexample": _run_counterexample,
    "phi": _run_phi,
    "ray": _run_ray,
    "dissipativity": _run_dissipativity,
}


def main(argv=None) -> int:
    try:
        ns = _build_parser().parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        if code is None:
            return 0
        return code if isinstance(code, int) else 2
    sub = ns.subcommand
    provided = {k: v for k, v in vars(ns).items() if k != "subcommand"}
    try:
        resolved = _merge_config(sub, provided)
        return _DISPATCH[sub](sub, resolved)
    except ParameterError as exc:
        print(f"dmy {sub}: {exc}", file=sys.stderr)
        return 2
    except (NewtonError, NumericOverflowError) as exc:
        print(f"dmy {sub}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"dmy {sub}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
