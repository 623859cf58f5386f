import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from abstokes.cli import ConfigError, main, number, parse_scenario, run, sweep_grid

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
PI = math.pi


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


def base(task="stokes_check", **extra):
    cfg = {
        "name": "case",
        "task": task,
        "solenoid": {"R": 1.0, "flux": {"kind": "linear_ramp", "B0": 1.0, "B1": 0.5}},
        "geometry": {"rho0": 2.0, "omega": 1.0},
    }
    cfg.update(extra)
    return cfg


def report(out, name):
    return json.loads((out / f"{name}.report.json").read_text())


def test_stokes_check_scenario(tmp_path):
    status = run(SCENARIOS / "stokes_linear_ramp.json", tmp_path, quiet=True)
    assert status == 0
    rep = report(tmp_path, "stokes_linear_ramp")
    assert rep["status"] == 0 and rep["converged"]
    assert rep["result"]["residual_line_vs_semianalytic"] <= 1e-9
    assert rep["result"]["residual_line_vs_numeric"] <= 1e-6
    assert rep["tool"]["version"]
    assert rep["scenario"]["solenoid"]["flux"]["kind"] == "linear_ramp"


def test_sinc_sweep(tmp_path):
    assert run(SCENARIOS / "sinc_sweep.json", tmp_path, quiet=True) == 0
    raw = (tmp_path / "sinc_sweep.sweep.csv").read_bytes()
    assert b"\r" not in raw
    rows = list(csv.DictReader(raw.decode().splitlines()))
    assert list(rows[0]) == ["param", "phase", "error_estimate"]
    params = [float(r["param"]) for r in rows]
    # 100 evenly spaced points plus pi, 2 pi and 3 pi inserted exactly
    assert len(rows) == 103
    assert params[0] == 0.1 and params[-1] == 10.0
    assert params == sorted(params)
    for k in (1, 2, 3):
        row = rows[params.index(k * PI)]
        assert abs(float(row["phase"])) <= 1e-9
    for r in rows:
        x = float(r["param"])
        assert float(r["phase"]) == pytest.approx(PI * math.sin(x) / x, abs=1e-12)


def test_loop_check(tmp_path):
    assert run(SCENARIOS / "loop_check.json", tmp_path, quiet=True) == 0
    res = report(tmp_path, "loop_check")["result"]
    assert res["closed_loop_abs"] <= 1e-9
    assert res["winding_number"] == 0
    assert res["surface_magnetic_numeric"]["value"] == 0.0


def test_ab_phase_scenario(tmp_path):
    assert run(SCENARIOS / "ab_phase_piecewise.json", tmp_path, quiet=True) == 0
    preds = report(tmp_path, "ab_phase_piecewise")["result"]["predictions"]
    two, avg = preds[0]["phase"], preds[1]["phase"]
    assert two == pytest.approx(avg, abs=1e-9 * (1 + abs(avg)))


@pytest.mark.parametrize(
    "mutate, field",
    [
        (lambda c: c["solenoid"].pop("R"), "solenoid.R"),
        (lambda c: c["solenoid"].update(R=-1.0), "solenoid.R"),
        (lambda c: c["solenoid"]["flux"].update(B1="lots"), "solenoid.flux.B1"),
        (lambda c: c["solenoid"]["flux"].update(kind="wobbly"), "solenoid.flux"),
        (lambda c: c["geometry"].update(rho0=0.5), "geometry.rho0"),
        (lambda c: c["geometry"].update(rho1=0.9), "geometry.rho1"),
        (lambda c: c["geometry"].update(phi_f="7*pi"), "geometry.phi_f"),
        (lambda c: c["geometry"].update(omega=0), "geometry.omega"),
        (lambda c: c.update(task="frobnicate"), "task"),
        (lambda c: c.update(e=-1), "e"),
        (lambda c: c.update(colour="blue"), "<root>.colour"),
        (lambda c: c["geometry"].update(spin=1), "geometry.spin"),
        (lambda c: c.update(quadrature={"abs_tol": 0}), "quadrature"),
    ],
)
def test_config_errors_name_the_field(tmp_path, capsys, mutate, field):
    cfg = base()
    mutate(cfg)
    assert run(write(tmp_path, cfg), tmp_path / "out", quiet=True) == 1
    err = capsys.readouterr().err
    assert field in err
    assert not (tmp_path / "out").exists()


def test_missing_and_invalid_files(tmp_path, capsys):
    assert run(tmp_path / "nope.json", tmp_path) == 1
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(bad, tmp_path) == 1
    assert "invalid JSON" in capsys.readouterr().err


def test_sweep_config_errors():
    cfg = base("sweep", sweep={"parameter": "omega_tf", "from": 0.1, "to": 10, "steps": 10})
    with pytest.raises(ConfigError, match="sinusoidal"):
        parse_scenario(cfg)
    cfg["solenoid"]["flux"] = {"kind": "sinusoidal", "B0": 1, "Omega": 1}
    cfg["sweep"]["steps"] = 0
    with pytest.raises(ConfigError, match="sweep.steps"):
        parse_scenario(cfg)
    with pytest.raises(ConfigError, match="sweep"):
        parse_scenario(base(sweep={"parameter": "t_f"}))


def test_non_convergence_exit_status(tmp_path):
    cfg = base(
        solenoid={"R": 1.0, "flux": {"kind": "sinusoidal", "B0": 1.0, "Omega": 5.0}},
        geometry={"rho0": 2.0, "omega": 0.5},
        quadrature={"max_subdivisions": 1},
    )
    assert run(write(tmp_path, cfg), tmp_path, quiet=True) == 2
    rep = report(tmp_path, "case")
    assert rep["status"] == 2 and rep["converged"] is False
    assert "line_value" in rep["result"]


def test_reports_are_deterministic(tmp_path):
    cfg = write(tmp_path, base())
    run(cfg, tmp_path / "a", quiet=True)
    run(cfg, tmp_path / "b", quiet=True)
    a, b = report(tmp_path / "a", "case"), report(tmp_path / "b", "case")
    a.pop("generated_at"), b.pop("generated_at")
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_numbers_round_trip(tmp_path):
    cfg = base(task="ab_phase", solenoid={"R": 1.0, "flux": {"kind": "sinusoidal", "B0": 1.0, "Omega": 0.7}})
    run(write(tmp_path, cfg), tmp_path, quiet=True)
    text = (tmp_path / "case.report.json").read_text()
    rep = json.loads(text)
    for pred in rep["result"]["predictions"]:
        x = pred["phase"]
        assert float(f"{x:.17g}") == x
        assert json.loads(json.dumps(x)) == x


def test_oracle_flag(tmp_path):
    assert run(SCENARIOS / "loop_check.json", tmp_path, oracle=True, quiet=True) == 0
    oracle = report(tmp_path, "loop_check")["result"]["oracle"]
    assert oracle["all_pass"]
    assert len(oracle["checks"]) >= 5


def test_explicit_time_maps(tmp_path):
    cfg = base()
    cfg["geometry"] = {
        "rho0": 2.0,
        "radial_profile": "quadratic",
        "time_maps": {
            "f": {"kind": "uniform_angular", "omega": 2.0},
            "g": {"kind": "uniform_angular", "omega": 2.0, "t0": "pi", "sign": -1},
        },
    }
    assert run(write(tmp_path, cfg), tmp_path, quiet=True) == 0
    assert report(tmp_path, "case")["result"]["residual_line_vs_semianalytic"] <= 1e-9


def test_bad_seam_is_a_config_error(tmp_path, capsys):
    cfg = base()
    cfg["geometry"] = {
        "rho0": 2.0,
        "time_maps": {"f": {"kind": "uniform_angular", "omega": 1.0}, "g": {"kind": "uniform_angular", "omega": 1.0}},
    }
    assert run(write(tmp_path, cfg), tmp_path, quiet=True) == 1
    assert "geometry" in capsys.readouterr().err


@pytest.mark.parametrize("text, value", [("pi", PI), ("-3*pi/2", -1.5 * PI), ("2", 2.0), (0.25, 0.25)])
def test_number_expressions(text, value):
    assert number(text, "x") == value


@pytest.mark.parametrize("text", ["__import__('os')", "pi**2", True, None, "nan", [1]])
def test_number_rejects(text):
    with pytest.raises(ConfigError):
        number(text, "x")


def test_sweep_grid_inserts_pi_multiples():
    g = sweep_grid(0.1, 10.0, 100, True)
    assert len(g) == 103
    assert PI in g and 2 * PI in g and 3 * PI in g
    assert len(sweep_grid(0.1, 10.0, 100, False)) == 100
    assert list(sweep_grid(2.0, 2.0, 1, False)) == [2.0]


def test_main_and_module_entry_point(tmp_path):
    assert main(["--config", str(SCENARIOS / "stokes_linear_ramp.json"), "--out", str(tmp_path), "--quiet"]) == 0
    proc = subprocess.run(
        [sys.executable, "-m", "abstokes", "--config", str(SCENARIOS / "loop_check.json"), "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "status=0" in proc.stdout
    with pytest.raises(SystemExit):
        main([])
