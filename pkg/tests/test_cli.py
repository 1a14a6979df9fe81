import json
import shutil
import subprocess
import sys

import pytest

from dmy import BasinGrid
from dmy.cli import main, render_pgm


def run_json(argv, capsys):
    code = main(argv)
    return code, json.loads(capsys.readouterr().out)


def run_csv(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    assert out.endswith("\n")
    return code, out[:-1].split("\n")


# ---------------------------------------------------------------------- pgm


def test_render_pgm_exact_bytes():
    g = BasinGrid(half_width=1.0, width=2, height=2, codes=bytes([0, 1, 2, 3]))
    assert render_pgm(g) == b"P5\n2 2\n255\n\xff\xaa\x55\x00"
    tiny = BasinGrid(half_width=1.0, width=1, height=1, codes=bytes([3]))
    assert render_pgm(tiny) == b"P5\n1 1\n255\n\x00"


# -------------------------------------------------------------- exit codes


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "SUBCOMMAND" in capsys.readouterr().out
    assert main(["spectrum", "--help"]) == 0
    capsys.readouterr()


def test_usage_errors_exit_two(capsys):
    assert main([]) == 2
    assert main(["no-such-subcommand"]) == 2
    assert main(["orbit", "--no-such-flag", "1"]) == 2
    capsys.readouterr()


def test_parameter_error_exits_two(capsys):
    assert main(["spectrum", "--map", "szlenk", "--k", "2.0"]) == 2
    err = capsys.readouterr().err
    assert err.startswith("dmy spectrum:")


def test_newton_failure_exits_one(capsys):
    code = main(["periodic", "--map", "szlenk", "--seed", "9.5,0.1",
                 "--period", "4", "--max-steps", "1"])
    assert code == 1
    assert capsys.readouterr().err.startswith("dmy periodic:")


def test_unwritable_out_exits_three(capsys):
    code = main(["phi", "--out", "/no-such-dir-anywhere/x.csv"])
    assert code == 3
    capsys.readouterr()


# ----------------------------------------------------------------- spectrum


def test_spectrum_grid_report(capsys):
    code, obj = run_json(["spectrum", "--map", "szlenk", "--grid", "21x21",
                          "--check", "ball:0.9", "--check", "interval-free:0.5:0.9"],
                         capsys)
    assert code == 0
    assert obj["map"] == "szlenk(k=1.01)"
    assert obj["strategy"] == "grid 21x21"
    assert obj["samples"] == 441
    assert obj["real_count"] == 41
    assert obj["min_real"] == 0.0 and obj["max_real"] == 0.0
    assert obj["passed"] is True
    assert [c["passed"] for c in obj["checks"]] == [True, True]
    assert obj["config"]["subcommand"] == "spectrum"


def test_spectrum_failing_check_exits_one(capsys):
    code, obj = run_json(["spectrum", "--map", "szlenk", "--grid", "11x11",
                          "--check", "ball:0.5"], capsys)
    assert code == 1
    assert obj["passed"] is False


def test_spectrum_real_free_fails_on_axes(capsys):
    # the cubic map has nilpotent axis Jacobians, so real spectra exist
    code, obj = run_json(["spectrum", "--map", "szlenk", "--grid", "11x11",
                          "--check", "real-free"], capsys)
    assert code == 1


def test_spectrum_random_strategy(capsys):
    args = ["spectrum", "--map", "szlenk", "--random", "50", "--rng-seed", "7"]
    code, obj = run_json(args, capsys)
    assert code == 0
    assert obj["strategy"] == "random n=50 seed=7"
    assert obj["samples"] == 50
    code2, obj2 = run_json(args, capsys)
    assert obj2 == obj


def test_spectrum_negative_region_tokens(capsys):
    code, obj = run_json(["spectrum", "--map", "linear", "--matrix", "0.5,0,0,0.5",
                          "--region", "-1:1:-1:1", "--grid", "3x3"], capsys)
    assert code == 0
    assert obj["max_modulus"] == 0.5


def test_spectrum_bad_check_spec(capsys):
    assert main(["spectrum", "--map", "szlenk", "--grid", "3x3",
                 "--check", "nonsense:1"]) == 2
    capsys.readouterr()


# -------------------------------------------------------------------- orbit


def test_orbit_csv_axis_cycle(capsys):
    code, lines = run_csv(["orbit", "--map", "szlenk", "--start", "10,0",
                           "--steps", "4"], capsys)
    assert code == 0
    assert lines[0] == "step,x,y,norm"
    assert lines[1] == "0,10,0,10"
    assert lines[2] == "1,-0,10,10"
    assert lines[3] == "2,-10,-0,10"
    assert lines[4] == "3,0,-10,10"
    assert lines[5] == "4,10,0,10"
    assert len(lines) == 6


def test_orbit_escape_truncates(capsys):
    code, lines = run_csv(["orbit", "--map", "szlenk", "--start", "20,0",
                           "--steps", "2000"], capsys)
    assert code == 0
    assert len(lines) == 1 + 1798  # header, start, then 1797 recorded steps
    assert float(lines[-1].split(",")[3]) > 1e9


# ----------------------------------------------------------------- periodic


def test_periodic_json(capsys):
    code, obj = run_json(["periodic", "--map", "szlenk", "--seed", "9.5,0.1",
                          "--period", "4"], capsys)
    assert code == 0
    assert obj["period"] == 4
    assert obj["residual"] < 1e-10
    assert obj["hyperbolic"] is True
    assert len(obj["points"]) == 4
    x0, y0 = obj["points"][0]
    assert abs(x0 - 10.0) < 1e-8 and abs(y0) < 1e-8


# -------------------------------------------------------------------- basin


def test_basin_requires_out(capsys):
    assert main(["basin", "--map", "szlenk"]) == 2
    capsys.readouterr()


def test_basin_pgm_contraction_exact(tmp_path, capsys):
    out = tmp_path / "b.pgm"
    code = main(["basin", "--map", "linear", "--matrix", "0.5,0,0,0.5",
                 "--L", "10", "--grid", "8x8", "--out", str(out)])
    assert code == 0
    assert out.read_bytes() == b"P5\n8 8\n255\n" + b"\xff" * 64
    capsys.readouterr()


def test_basin_runs_are_bitwise_identical(tmp_path, capsys):
    args = ["basin", "--map", "szlenk", "--L", "30", "--grid", "16x16"]
    p1, p2 = tmp_path / "b1.pgm", tmp_path / "b2.pgm"
    assert main(args + ["--out", str(p1)]) == 0
    assert main(args + ["--out", str(p2)]) == 0
    d1 = p1.read_bytes()
    assert d1 == p2.read_bytes()
    assert d1.startswith(b"P5\n16 16\n255\n")
    body = d1[len(b"P5\n16 16\n255\n"):]
    assert len(body) == 256
    assert body.count(b"\xff") == 80 and body.count(b"\x55") == 176
    capsys.readouterr()


# ----------------------------------------------------------- counterexample


def test_counterexample_report(tmp_path, capsys):
    out1, out2 = tmp_path / "r1.json", tmp_path / "r2.json"
    assert main(["counterexample", "--out", str(out1)]) == 0
    assert main(["counterexample", "--out", str(out2)]) == 0
    d1 = out1.read_bytes()
    assert d1 == out2.read_bytes()
    obj = json.loads(d1)
    assert obj["passed"] is True
    assert len(obj["checks"]) == 6
    assert obj["k"] == 1.01 and obj["a"] == 0.005
    capsys.readouterr()


def test_counterexample_config_round_trip(tmp_path, capsys):
    direct = tmp_path / "direct.json"
    assert main(["counterexample", "--out", str(direct)]) == 0
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(json.loads(direct.read_bytes())["config"]))
    replay = tmp_path / "replay.json"
    assert main(["counterexample", "--config", str(cfg_path),
                 "--out", str(replay)]) == 0
    assert replay.read_bytes() == direct.read_bytes()
    capsys.readouterr()


# ---------------------------------------------------------------------- phi


def test_phi_csv_slope_column(capsys):
    code, lines = run_csv(["phi", "--log-samples", "50"], capsys)
    assert code == 0
    assert lines[0] == "r,phi,phi_prime_times_r"
    assert len(lines) == 51
    budget = 0.05 / 8.0
    for line in lines[1:]:
        r, phi, slope = (float(tok) for tok in line.split(","))
        assert 0.0 < phi <= 1.0
        assert abs(slope) <= budget


def test_phi_rejects_tiny_sample_count(capsys):
    assert main(["phi", "--log-samples", "1"]) == 2
    capsys.readouterr()


# ---------------------------------------------------------------------- ray


def test_ray_pass_and_fail(capsys):
    code, obj = run_json(["ray", "--map", "linear", "--matrix", "0.5,0,0,0.5",
                          "--radius", "100", "--samples", "11"], capsys)
    assert code == 0
    assert obj["passed"] is True and obj["max_deviation"] == 0.0

    code, obj = run_json(["ray", "--map", "linear", "--matrix", "0,-1,1,0",
                          "--radius", "100", "--samples", "101"], capsys)
    assert code == 1
    assert obj["max_deviation"] == pytest.approx(100.0, rel=1e-12)
    assert obj["worst_index"] == 100


def test_ray_counterexample_axis_not_invariant(capsys):
    code, obj = run_json(["ray", "--map", "counterexample", "--radius", "15",
                          "--samples", "101"], capsys)
    assert code == 1
    assert obj["max_deviation"] == pytest.approx(15.083151069264147, rel=1e-9)


# ------------------------------------------------------------ dissipativity


def test_dissipativity_exact_expanding_case(capsys):
    code, obj = run_json(["dissipativity", "--map", "linear", "--matrix", "2,0,0,2",
                          "--radius", "20", "--alpha", "0.5"], capsys)
    assert code == 1  # a doubling map is not eventually contracting
    assert obj["threshold_radius"] == 120.0
    assert obj["contraction_factor"] == 0.75
    assert obj["passed"] is False


def test_dissipativity_tail_radius(capsys):
    code, obj = run_json(["dissipativity", "--map", "counterexample",
                          "--radius", "tail", "--alpha", "0.5"], capsys)
    assert code == 0
    assert obj["passed"] is True
    assert obj["contraction_factor"] == 0.75
    assert obj["ball_radius"] == pytest.approx(2.407840247103163e+49, rel=1e-6)


def test_dissipativity_tail_needs_counterexample_map(capsys):
    assert main(["dissipativity", "--map", "szlenk", "--radius", "tail"]) == 2
    capsys.readouterr()


# ------------------------------------------------------------------- config


def test_config_file_supplies_defaults(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"subcommand": "orbit", "map": "szlenk",
                               "start": "10,0", "steps": 3}))
    code, lines = run_csv(["orbit", "--config", str(cfg)], capsys)
    assert code == 0
    assert len(lines) == 5  # header, start, three steps


def test_config_flags_beat_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"subcommand": "orbit", "map": "szlenk",
                               "start": "10,0", "steps": 3}))
    code, lines = run_csv(["orbit", "--config", str(cfg), "--steps", "1"], capsys)
    assert code == 0
    assert len(lines) == 3


def test_config_null_means_default(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"subcommand": "phi", "log_samples": None}))
    code, lines = run_csv(["phi", "--config", str(cfg)], capsys)
    assert code == 0
    assert len(lines) == 51


def test_config_rejections(tmp_path, capsys):
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"subcommand": "phi"}))
    assert main(["orbit", "--map", "szlenk", "--config", str(wrong)]) == 2

    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"subcommand": "orbit", "bogus": 1}))
    assert main(["orbit", "--map", "szlenk", "--config", str(unknown)]) == 2

    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert main(["orbit", "--map", "szlenk", "--config", str(broken)]) == 2

    assert main(["orbit", "--map", "szlenk",
                 "--config", str(tmp_path / "missing.json")]) == 3
    capsys.readouterr()


def test_config_type_errors(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"subcommand": "orbit", "steps": "ten"}))
    assert main(["orbit", "--map", "szlenk", "--config", str(cfg)]) == 2
    capsys.readouterr()


# -------------------------------------------------------------- entry point


def test_installed_entry_point_smoke():
    exe = shutil.which("dmy")
    cmd = [exe] if exe else [sys.executable, "-m", "dmy.cli"]
    proc = subprocess.run(cmd + ["phi", "--log-samples", "2"],
                          capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0
    assert proc.stdout.startswith("r,phi,phi_prime_times_r\n")
