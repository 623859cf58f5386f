"""
Scenario runner.

    abstokes --config scenario.json [--out DIR] [--oracle] [--quiet]

The scenario file selects one task (stokes_check, ab_phase, loop_check or
sweep). A JSON report is written to ``<out>/<name>.report.json``; sweeps
also write ``<out>/<name>.sweep.csv``. Exit status: 0 on success, 1 on a
configuration error, 2 if any integral failed to converge.

Angles and other numbers may be given as simple expressions in ``pi``,
e.g. ``"pi/2"`` or ``"-3*pi/2"``.
"""

from __future__ import annotations

import argparse
import ast
import csv
import io
import json
import math
import operator
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .abphase import AVERAGED, SINUSOIDAL, TWO_PATH, ab_phase_averaged, ab_phase_sinusoidal, ab_phase_two_path
from .fields import SolenoidField
from .flux import FluxProfile, Sinusoidal, profile_from_dict
from .geometry import (
    TWO_PI,
    Affine,
    SurfacePatch,
    UniformAngular,
    constant_profile,
    outer_loop_paths,
    power_profile,
    standard_patch,
    two_arc_paths,
    winding_number,
)
from .quadrature import QuadratureConfig
from .stokes import (
    SurfacePart,
    lambda_difference,
    oracle_line_checks,
    oracle_surface_checks,
    stokes_check,
    surface_integral,
    surface_integral_semianalytic,
)

TASKS = ("stokes_check", "ab_phase", "loop_check", "sweep")
SWEEP_PARAMETERS = ("omega_tf", "t_f")
SWEEP_METHODS = (SINUSOIDAL, AVERAGED, TWO_PATH)
CSV_HEADER = ("param", "phase", "error_estimate")

EXIT_OK, EXIT_CONFIG, EXIT_NONCONVERGED = 0, 1, 2


class ConfigError(ValueError):
    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


# --------------------------------------------------------------------------
# config parsing

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _eval_expr(node):
    if isinstance(node, ast.Expression):
        return _eval_expr(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_expr(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_expr(node.left), _eval_expr(node.right))
    raise ValueError("unsupported expression")


def number(value, where: str) -> float:
    if isinstance(value, bool):
        raise ConfigError(where, "expected a number")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        try:
            out = _eval_expr(ast.parse(value, mode="eval"))
        except (SyntaxError, ValueError, ZeroDivisionError):
            raise ConfigError(where, f"cannot read {value!r} as a number") from None
    else:
        raise ConfigError(where, f"expected a number, got {type(value).__name__}")
    if not math.isfinite(out):
        raise ConfigError(where, "must be finite")
    return out


def _section(cfg: dict, key: str, where: str, allowed: set, required: bool = True) -> dict:
    value = cfg.get(key)
    path = f"{where}.{key}" if where else key
    if value is None:
        if required:
            raise ConfigError(path, "missing")
        return {}
    if not isinstance(value, dict):
        raise ConfigError(path, "expected an object")
    unknown = sorted(set(value) - allowed)
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}", "unknown field")
    return value


@dataclass
class Scenario:
    name: str
    task: str
    field: SolenoidField
    patch: SurfacePatch
    e: float
    quadrature: QuadratureConfig
    sweep: dict | None
    echo: dict
    geometry: dict = field(default_factory=dict)


def _time_map(entry, where):
    if not isinstance(entry, dict):
        raise ConfigError(where, "expected an object")
    kind = entry.get("kind")
    try:
        if kind == "uniform_angular":
            _reject_unknown(entry, {"kind", "omega", "t0", "sign"}, where)
            sign = int(number(entry.get("sign", 1), f"{where}.sign"))
            return UniformAngular(number(entry.get("omega"), f"{where}.omega"), number(entry.get("t0", 0.0), f"{where}.t0"), sign)
        if kind == "affine":
            _reject_unknown(entry, {"kind", "slope", "intercept"}, where)
            return Affine(number(entry.get("slope"), f"{where}.slope"), number(entry.get("intercept", 0.0), f"{where}.intercept"))
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(where, str(exc)) from None
    raise ConfigError(f"{where}.kind", f"must be 'uniform_angular' or 'affine', got {kind!r}")


def _reject_unknown(entry: dict, allowed: set, where: str):
    unknown = sorted(set(entry) - allowed)
    if unknown:
        raise ConfigError(f"{where}.{unknown[0]}", "unknown field")


def _radial_profile(entry, rho0, where):
    if entry in (None, "linear"):
        return power_profile(rho0, 1.0)
    if entry == "quadratic":
        return power_profile(rho0, 2.0)
    if entry == "constant":
        return constant_profile(rho0)
    if isinstance(entry, dict) and set(entry) == {"power"}:
        n = number(entry["power"], f"{where}.power")
        if not n > 0:
            raise ConfigError(f"{where}.power", "must be positive")
        return power_profile(rho0, n)
    raise ConfigError(where, "expected 'linear', 'quadratic', 'constant' or {\"power\": n}")


def build_patch(geo: dict, R: float, omega_override: float | None = None) -> SurfacePatch:
    rho0 = number(geo.get("rho0"), "geometry.rho0")
    if not rho0 > R:
        raise ConfigError("geometry.rho0", f"must exceed the solenoid radius R={R}")
    rho1 = number(geo.get("rho1", 0.0), "geometry.rho1")
    if rho1 != 0.0 and not R < rho1 < rho0:
        raise ConfigError("geometry.rho1", f"must be 0 or lie strictly between R={R} and rho0={rho0}")
    phi_i = number(geo.get("phi_i", 0.0), "geometry.phi_i")
    phi_f = number(geo.get("phi_f", "pi"), "geometry.phi_f")
    if not phi_i < phi_f < phi_i + TWO_PI:
        raise ConfigError("geometry.phi_f", "must satisfy phi_i < phi_f < phi_i + 2 pi")
    maps = geo.get("time_maps")
    try:
        if maps is not None and omega_override is None:
            if not isinstance(maps, dict):
                raise ConfigError("geometry.time_maps", "expected an object")
            _reject_unknown(maps, {"f", "g"}, "geometry.time_maps")
            if "f" not in maps:
                raise ConfigError("geometry.time_maps.f", "missing")
            f = _time_map(maps["f"], "geometry.time_maps.f")
            if rho1 > 0:
                return SurfacePatch(rho0, phi_i, phi_f, f, _radial_profile(geo.get("radial_profile", "constant"), rho0, "geometry.radial_profile"), rho1=rho1)
            if "g" not in maps:
                raise ConfigError("geometry.time_maps.g", "missing")
            g = _time_map(maps["g"], "geometry.time_maps.g")
            prof = _radial_profile(geo.get("radial_profile"), rho0, "geometry.radial_profile")
            return SurfacePatch(rho0, phi_i, phi_f, f, prof, g, prof)
        omega = omega_override if omega_override is not None else number(geo.get("omega"), "geometry.omega")
        if not omega > 0:
            raise ConfigError("geometry.omega", "must be positive")
        if rho1 > 0:
            if geo.get("radial_profile", "constant") != "constant":
                raise ConfigError("geometry.radial_profile", "a non-encircling loop needs the 'constant' profile")
            return standard_patch(rho0, omega, phi_i, phi_f, rho1=rho1)
        prof = _radial_profile(geo.get("radial_profile"), rho0, "geometry.radial_profile")
        patch = standard_patch(rho0, omega, phi_i, phi_f)
        return SurfacePatch(rho0, phi_i, phi_f, patch.f, prof, patch.g, prof)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("geometry", str(exc)) from None


def parse_scenario(cfg: dict) -> Scenario:
    if not isinstance(cfg, dict):
        raise ConfigError("<root>", "expected a JSON object")
    _reject_unknown(cfg, {"name", "task", "solenoid", "geometry", "e", "quadrature", "sweep"}, "<root>")
    name = cfg.get("name")
    if not isinstance(name, str) or not name or any(c in name for c in "/\\"):
        raise ConfigError("name", "expected a non-empty file-name-safe string")
    task = cfg.get("task")
    if task not in TASKS:
        raise ConfigError("task", f"must be one of {TASKS}, got {task!r}")

    sol = _section(cfg, "solenoid", "", {"R", "flux"})
    R = number(sol.get("R"), "solenoid.R")
    if not R > 0:
        raise ConfigError("solenoid.R", "must be positive")
    flux = sol.get("flux")
    if not isinstance(flux, dict):
        raise ConfigError("solenoid.flux", "expected an object")
    try:
        profile = profile_from_dict({k: (v if k == "kind" else number(v, f"solenoid.flux.{k}")) for k, v in flux.items()})
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("solenoid.flux", str(exc)) from None

    geo = _section(cfg, "geometry", "", {"rho0", "rho1", "phi_i", "phi_f", "omega", "radial_profile", "time_maps"})
    patch = build_patch(geo, R)
    if task == "loop_check" and patch.encircling:
        raise ConfigError("geometry.rho1", "loop_check needs a non-encircling loop (rho1 > R)")
    if task in ("ab_phase", "sweep") and not patch.encircling:
        raise ConfigError("geometry.rho1", f"{task} needs an encircling loop (rho1 = 0)")

    e = number(cfg.get("e", 1.0), "e")
    if not e > 0:
        raise ConfigError("e", "the charge magnitude must be positive")

    q = _section(cfg, "quadrature", "", {"abs_tol", "rel_tol", "max_subdivisions"}, required=False)
    try:
        quad = QuadratureConfig(
            abs_tol=number(q.get("abs_tol", 1e-12), "quadrature.abs_tol"),
            rel_tol=number(q.get("rel_tol", 1e-9), "quadrature.rel_tol"),
            max_subdivisions=int(number(q.get("max_subdivisions", 2000), "quadrature.max_subdivisions")),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("quadrature", str(exc)) from None

    sweep = None
    if task == "sweep":
        s = _section(cfg, "sweep", "", {"parameter", "from", "to", "steps", "method"})
        parameter = s.get("parameter")
        if parameter not in SWEEP_PARAMETERS:
            raise ConfigError("sweep.parameter", f"must be one of {SWEEP_PARAMETERS}")
        method = s.get("method", SINUSOIDAL if parameter == "omega_tf" else AVERAGED)
        if method not in SWEEP_METHODS:
            raise ConfigError("sweep.method", f"must be one of {SWEEP_METHODS}")
        lo, hi = number(s.get("from"), "sweep.from"), number(s.get("to"), "sweep.to")
        steps = s.get("steps")
        if not isinstance(steps, int) or isinstance(steps, bool) or steps < 1:
            raise ConfigError("sweep.steps", "expected a positive integer")
        if steps > 1 and not lo < hi:
            raise ConfigError("sweep.to", "must exceed sweep.from")
        if (parameter == "omega_tf" or method == SINUSOIDAL) and not isinstance(profile, Sinusoidal):
            raise ConfigError("solenoid.flux.kind", f"sweep over {parameter} with {method} needs a sinusoidal flux")
        if parameter == "t_f":
            if lo <= 0:
                raise ConfigError("sweep.from", "t_f must be positive")
            if "time_maps" in geo:
                raise ConfigError("geometry.time_maps", "a t_f sweep derives uniform time maps; remove the override")
        sweep = {"parameter": parameter, "from": lo, "to": hi, "steps": steps, "method": method}
    elif "sweep" in cfg:
        raise ConfigError("sweep", f"only allowed with task 'sweep', not {task!r}")

    return Scenario(name, task, SolenoidField(R, profile), patch, e, quad, sweep, cfg, geo)


# --------------------------------------------------------------------------
# tasks


def sweep_grid(lo: float, hi: float, steps: int, include_pi_multiples: bool) -> np.ndarray:
    """Evenly spaced points with both endpoints; optionally every k*pi in range inserted."""
    grid = np.linspace(lo, hi, steps) if steps > 1 else np.array([lo])
    if include_pi_multiples:
        k_lo, k_hi = math.ceil(lo / math.pi), math.floor(hi / math.pi)
        extra = [k * math.pi for k in range(k_lo, k_hi + 1)]
        grid = np.union1d(grid, np.array(extra, dtype=float))
    return grid


def _sweep_point(sc: Scenario, x: float) -> dict:
    sw = sc.sweep
    profile = sc.field.profile
    if sw["parameter"] == "omega_tf":
        t_f = sc.patch.t_f
        omega_flux = x / t_f
        profile = Sinusoidal(profile.B0, omega_flux)
        patch = sc.patch
    else:
        t_f = x
        span = sc.patch.phi_f - sc.patch.phi_i
        patch = build_patch(sc.geometry, sc.field.R, omega_override=span / t_f)
    field = SolenoidField(sc.field.R, profile)
    if sw["method"] == SINUSOIDAL:
        pred = ab_phase_sinusoidal(field.flux(0.0), profile.Omega, t_f, sc.e)
    elif sw["method"] == AVERAGED:
        pred = ab_phase_averaged(profile, field.R, t_f, sc.e)
    else:
        c1, c2 = two_arc_paths(patch)
        pred = ab_phase_two_path(field, c1, c2, sc.e, sc.quadrature)
    return {"param": float(x), "phase": pred.phase, "error_estimate": pred.error_estimate, "converged": pred.converged, "t_f": t_f}


def run_sweep(sc: Scenario, workers: int | None = None) -> list[dict]:
    sw = sc.sweep
    grid = sweep_grid(sw["from"], sw["to"], sw["steps"], sw["parameter"] == "omega_tf")
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda x: _sweep_point(sc, float(x)), grid))


def _oracle_summary(checks) -> dict:
    return {"all_pass": all(c.passes() for c in checks), "checks": [c.to_dict() for c in checks]}


def execute(sc: Scenario, oracle: bool = False) -> tuple[dict, list[dict] | None, bool]:
    """Run the scenario; returns (result section, sweep rows or None, converged)."""
    if sc.task == "stokes_check":
        rep = stokes_check(sc.field, sc.patch, sc.quadrature, oracle=oracle)
        body = rep.to_dict()
        body["winding_number"] = winding_number(sc.patch.boundary())
        return body, None, rep.converged

    if sc.task == "ab_phase":
        c1, c2 = two_arc_paths(sc.patch)
        preds = [ab_phase_two_path(sc.field, c1, c2, sc.e, sc.quadrature)]
        preds.append(ab_phase_averaged(sc.field.profile, sc.field.R, sc.patch.t_f, sc.e))
        if isinstance(sc.field.profile, Sinusoidal):
            preds.append(ab_phase_sinusoidal(sc.field.flux(0.0), sc.field.profile.Omega, sc.patch.t_f, sc.e))
        body = {"predictions": [p.to_dict() for p in preds], "t_f": sc.patch.t_f}
        if oracle:
            checks = oracle_line_checks(sc.field, c1, sc.quadrature, "c1") + oracle_line_checks(sc.field, c2, sc.quadrature, "c2")
            body["oracle"] = _oracle_summary(checks)
        return body, None, all(p.converged for p in preds)

    if sc.task == "loop_check":
        c1, c2 = outer_loop_paths(sc.patch)
        diff = lambda_difference(sc.field, c1, c2, sc.quadrature)
        el = surface_integral(sc.field, sc.patch, SurfacePart.ELECTRIC, sc.quadrature)
        mag = surface_integral(sc.field, sc.patch, SurfacePart.MAGNETIC, sc.quadrature)
        semi = surface_integral_semianalytic(sc.field, sc.patch, sc.quadrature)
        body = {
            "lambda_difference": diff.to_dict(),
            "closed_loop_abs": abs(diff.value),
            "winding_number": winding_number(c1 + c2.reversed()),
            "surface_electric_numeric": el.to_dict(),
            "surface_magnetic_numeric": mag.to_dict(),
            "surface_value_semianalytic": semi.total.to_dict(),
        }
        if oracle:
            checks = oracle_line_checks(sc.field, c1, sc.quadrature, "c1") + oracle_line_checks(sc.field, c2, sc.quadrature, "c2")
            checks += oracle_surface_checks(sc.field, sc.patch, sc.quadrature)
            body["oracle"] = _oracle_summary(checks)
        return body, None, diff.converged and el.converged and mag.converged and semi.total.converged

    rows = run_sweep(sc)
    body = {"sweep": dict(sc.sweep), "points": rows}
    if oracle:
        body["oracle"] = {"note": "sweep points are checked through the ab_phase task"}
    return body, rows, all(r["converged"] for r in rows)


# --------------------------------------------------------------------------
# output


def _atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sweep_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        writer.writerow([repr(float(r[k])) for k in CSV_HEADER])
    return buf.getvalue()


def build_report(sc: Scenario, body: dict, converged: bool, status: int) -> dict:
    return {
        "tool": {"name": "abstokes", "version": __version__},
        "scenario": sc.echo,
        "task": sc.task,
        "status": status,
        "converged": converged,
        "result": body,
        "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def run(config_path, out_dir="out", oracle: bool = False, quiet: bool = False) -> int:
    try:
        cfg = json.loads(Path(config_path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        print(f"config error: {config_path}: file not found", file=sys.stderr)
        return EXIT_CONFIG
    except json.JSONDecodeError as exc:
        print(f"config error: {config_path}: invalid JSON ({exc})", file=sys.stderr)
        return EXIT_CONFIG
    try:
        sc = parse_scenario(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    body, rows, converged = execute(sc, oracle=oracle)
    status = EXIT_OK if converged else EXIT_NONCONVERGED
    out = Path(out_dir)
    report = build_report(sc, body, converged, status)
    _atomic_write(out / f"{sc.name}.report.json", json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n")
    if rows is not None:
        _atomic_write(out / f"{sc.name}.sweep.csv", sweep_csv(rows))
    if not quiet:
        print(f"{sc.name}: task={sc.task} status={status} report={out / (sc.name + '.report.json')}")
        if status == EXIT_NONCONVERGED:
            print("warning: at least one integral did not converge; the report is partial", file=sys.stderr)
    return status


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="abstokes", description="Time-dependent AB phase and space-time Stokes checks.")
    ap.add_argument("--config", required=True, help="scenario JSON file")
    ap.add_argument("--out", default="out", help="output directory (default ./out)")
    ap.add_argument("--oracle", action="store_true", help="add midpoint-rule cross-checks to the report")
    ap.add_argument("--quiet", action="store_true")
    args = ap.parse_args(argv)
    return run(args.config, args.out, oracle=args.oracle, quiet=args.quiet)


if __name__ == "__main__":
    raise SystemExit(main())
