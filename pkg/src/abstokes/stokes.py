"""
Both sides of the space-time Stokes identity for the solenoid.

    closed loop:  oint A_mu dx^mu = oint (A0 dt - A . dx)
    surface:      1/2 iint F_mu nu dx^mu ^ dx^nu
                  = iint [F_0x c_tx + F_0y c_ty + F_xy c_xy] d rho d phi

The numeric surface route assembles its integrand from ``sector_wedge`` and
the field-strength components; it never uses the reduced closed forms.
The semi-analytic route integrates the reduced per-region expressions in
terms of Btilde(rho, phi) = B(F(rho) f(phi)) (and Bhat with G, g).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .fields import SolenoidField
from .geometry import Sector, SpacetimePath, SurfacePatch, _events_close, crossings, sector_wedge
from .quadrature import (
    ZERO,
    IntegralResult,
    QuadratureConfig,
    integrate_1d,
    integrate_2d,
    riemann_oracle,
    total,
)

ENDPOINT_TOL = 1e-10
ORACLE_PANELS = 200_000


class SurfacePart(enum.Enum):
    ELECTRIC = "electric"
    MAGNETIC = "magnetic"
    BOTH = "both"


# --------------------------------------------------------------------------
# line integrals


@dataclass(frozen=True)
class LinePiece:
    """A 1-D integrand of a path segment with its domain and breakpoints."""

    fn: object
    a: float
    b: float
    breakpoints: tuple[float, ...]


def line_pieces(potential, path: SpacetimePath) -> list[LinePiece]:
    time_kinks = tuple(getattr(potential, "time_kinks", ()))
    radial_kinks = tuple(getattr(potential, "radial_kinks", ()))
    pieces = []
    for seg in path.segments:

        def integrand(s, seg=seg):
            (t, x, y, z), (dt, dx, dy, dz) = seg.coordinates(s)
            a0, ax, ay, az = potential.four_potential(t, x, y, z)
            return a0 * dt - (ax * dx + ay * dy + az * dz)

        a, b = seg.bounds
        pts = tuple(seg.time_breakpoints(time_kinks)) + tuple(seg.radial_breakpoints(radial_kinks))
        pieces.append(LinePiece(integrand, a, b, pts))
    return pieces


def line_integral(potential, path: SpacetimePath, cfg: QuadratureConfig | None = None) -> IntegralResult:
    """oint A_mu dx^mu along ``path`` (no charge factor)."""
    cfg = cfg or QuadratureConfig()
    return total(integrate_1d(p.fn, p.a, p.b, cfg.with_breakpoints(p.breakpoints)) for p in line_pieces(potential, path))


def exterior_arc_reduction(field: SolenoidField, arc, cfg: QuadratureConfig | None = None) -> IntegralResult:
    """-(R^2/2) int B(t(phi)) d phi for an arc outside the solenoid."""
    if arc.rho < field.R:
        raise ValueError("the exterior reduction needs rho >= R")
    cfg = cfg or QuadratureConfig()
    pts = arc.time_breakpoints(field.time_kinks)
    res = integrate_1d(lambda p: field.profile.value(arc.tmap(p)), arc.phi_start, arc.phi_end, cfg.with_breakpoints(pts))
    return res.scaled(-0.5 * field.R**2)


# --------------------------------------------------------------------------
# numeric surface integral


def _surface_integrand(field: SolenoidField, sec: Sector, part: SurfacePart):
    def fn(rho, phi):
        t = sec.F(rho) * sec.tmap(phi)
        x, y = rho * np.cos(phi), rho * np.sin(phi)
        c_tx, c_ty, c_xy = sector_wedge(sec, rho, phi)
        out = np.zeros_like(rho)
        if part is not SurfacePart.MAGNETIC:
            ex, ey, _ = field.electric_field_xyz(t, x, y)
            out = out + ex * c_tx + ey * c_ty
        if part is not SurfacePart.ELECTRIC:
            _, _, bz = field.magnetic_field_xyz(t, x, y)
            out = out + (-bz) * c_xy
        return out

    return fn


def _rho_breakpoints(field: SolenoidField, sec: Sector, rho_lo: float, rho_hi: float):
    kinks = field.time_kinks
    static = [r for r in field.radial_kinks if rho_lo < r < rho_hi]
    if not kinks:
        return static

    def at(phi):
        tphi = float(sec.tmap(phi))
        return static + crossings(lambda r: sec.F(r) * tphi, rho_lo, rho_hi, kinks)

    return at


def _phi_breakpoints(field: SolenoidField, sec: Sector, radii) -> list[float]:
    # phi where the time on one of the given circles hits a kink of B(t)
    out = []
    for r in radii:
        Fr = float(sec.F(r))
        out += crossings(lambda p: Fr * sec.tmap(p), sec.phi_lo, sec.phi_hi, field.time_kinks)
    return sorted(set(out))


def surface_sector_integrals(
    field: SolenoidField, patch: SurfacePatch, part: SurfacePart, cfg: QuadratureConfig | None = None
) -> list[IntegralResult]:
    cfg = cfg or QuadratureConfig()
    results = []
    for sec in patch.sectors():
        radii = [patch.rho0, patch.rho1] + [r for r in field.radial_kinks if patch.rho1 < r < patch.rho0]
        results.append(integrate_2d(
            _surface_integrand(field, sec, part),
            (patch.rho1, patch.rho0),
            (sec.phi_lo, sec.phi_hi),
            cfg,
            rho_breakpoints=_rho_breakpoints(field, sec, patch.rho1, patch.rho0),
            phi_breakpoints=_phi_breakpoints(field, sec, radii),
        ))
    return results


def surface_integral(
    field: SolenoidField, patch: SurfacePatch, part: SurfacePart = SurfacePart.BOTH, cfg: QuadratureConfig | None = None
) -> IntegralResult:
    """1/2 iint F dx^dx over the patch, restricted to the electric or magnetic part if asked."""
    return total(surface_sector_integrals(field, patch, SurfacePart(part), cfg))


# --------------------------------------------------------------------------
# semi-analytic surface integral


@dataclass
class SemiAnalyticResult:
    """
    Per-region values. ``electric`` holds regions i-iv (only "ii" for an
    annular patch); ``interior`` holds the int_0^R rho Btilde pieces of
    regions i and iii; ``magnetic`` holds the two sector totals.
    """

    electric: dict[str, IntegralResult]
    interior: dict[str, IntegralResult]
    magnetic: dict[str, IntegralResult]
    total: IntegralResult
    loop_reduction: IntegralResult

    def to_dict(self) -> dict:
        return {
            "electric": {k: v.to_dict() for k, v in self.electric.items()},
            "interior": {k: v.to_dict() for k, v in self.interior.items()},
            "magnetic": {k: v.to_dict() for k, v in self.magnetic.items()},
            "total": self.total.to_dict(),
            "loop_reduction": self.loop_reduction.to_dict(),
        }


def _btilde(field: SolenoidField, sec: Sector):
    B = field.profile.value
    return lambda rho, phi: B(sec.F(rho) * sec.tmap(phi))


def _boundary_term(field, sec, rho, cfg):
    # int dphi B(F(rho) f(phi)) over the sector
    Fr = float(sec.F(rho))
    pts = crossings(lambda p: Fr * sec.tmap(p), sec.phi_lo, sec.phi_hi, field.time_kinks)
    return integrate_1d(lambda p: field.profile.value(Fr * sec.tmap(p)), sec.phi_lo, sec.phi_hi, cfg.with_breakpoints(pts))


def _interior_phi_outer(field, sec, cfg):
    # int dphi int_0^R rho Btilde(rho, phi) d rho   (electric ordering)
    bt = _btilde(field, sec)
    return integrate_2d(
        lambda r, p: r * bt(r, p),
        (0.0, field.R),
        (sec.phi_lo, sec.phi_hi),
        cfg,
        rho_breakpoints=_rho_breakpoints(field, sec, 0.0, field.R),
        phi_breakpoints=_phi_breakpoints(field, sec, [field.R]),
    )


def _interior_rho_outer(field, sec, cfg):
    # -int_0^R rho d rho int dphi Btilde(rho, phi)   (magnetic ordering)
    B = field.profile.value
    inner_cfg = cfg.tightened(10.0)
    stats = {"evaluations": 0, "converged": True}

    def inner(r):
        Fr = float(sec.F(r))
        pts = crossings(lambda p: Fr * sec.tmap(p), sec.phi_lo, sec.phi_hi, field.time_kinks)
        res = integrate_1d(lambda p: B(Fr * sec.tmap(p)), sec.phi_lo, sec.phi_hi, inner_cfg.with_breakpoints(pts))
        stats["evaluations"] += res.evaluations
        stats["converged"] &= res.converged
        return res.value

    def outer(rs):
        return np.array([r * inner(float(r)) for r in np.ravel(rs)]).reshape(np.shape(rs))

    # rho where the time at the sector's end angles crosses a kink
    ends = [float(sec.tmap(sec.phi_lo)), float(sec.tmap(sec.phi_hi))]
    pts = []
    for te in ends:
        pts += crossings(lambda r: sec.F(r) * te, 0.0, field.R, field.time_kinks)
    res = integrate_1d(outer, 0.0, field.R, cfg.with_breakpoints(sorted(set(pts))))
    return IntegralResult(-res.value, res.error_estimate, stats["evaluations"], res.converged and stats["converged"])


def surface_integral_semianalytic(
    field: SolenoidField, patch: SurfacePatch, cfg: QuadratureConfig | None = None
) -> SemiAnalyticResult:
    cfg = cfg or QuadratureConfig()
    R = field.R
    half_R2 = 0.5 * R**2
    if patch.rho0 <= R:
        raise ValueError("the outer radius must lie outside the solenoid")
    if 0 < patch.rho1 <= R:
        raise ValueError("an annular patch must lie entirely outside the solenoid (rho1 > R)")

    electric, interior, magnetic = {}, {}, {}
    loop_terms = []
    if patch.encircling:
        labels = (("i", "ii"), ("iii", "iv"))
        for (inner_label, outer_label), sec, mag_label in zip(labels, patch.sectors(), ("sector1", "sector2")):
            at_R = _boundary_term(field, sec, R, cfg)
            at_rho0 = _boundary_term(field, sec, patch.rho0, cfg)
            interior[inner_label] = _interior_phi_outer(field, sec, cfg)
            electric[inner_label] = at_R.scaled(-half_R2) + interior[inner_label]
            electric[outer_label] = at_rho0.scaled(-half_R2) + at_R.scaled(half_R2)
            magnetic[mag_label] = _interior_rho_outer(field, sec, cfg)
            loop_terms.append(at_rho0.scaled(-half_R2))
        grand = total([*electric.values(), *magnetic.values()])
    else:
        sec = patch.sectors()[0]
        at_rho1 = _boundary_term(field, sec, patch.rho1, cfg)
        at_rho0 = _boundary_term(field, sec, patch.rho0, cfg)
        electric["ii"] = at_rho0.scaled(-half_R2) + at_rho1.scaled(half_R2)
        # B vanishes identically for rho > R
        magnetic["sector1"] = ZERO
        loop_terms.append(electric["ii"])
        grand = electric["ii"]
    return SemiAnalyticResult(electric, interior, magnetic, grand, total(loop_terms))


# --------------------------------------------------------------------------
# reports


@dataclass
class StokesReport:
    line: IntegralResult
    surface_numeric: IntegralResult
    surface_electric_numeric: IntegralResult
    surface_magnetic_numeric: IntegralResult
    semianalytic: SemiAnalyticResult
    residual_line_vs_numeric: float
    residual_line_vs_semianalytic: float
    interior_cancellation_residual: float
    interior_cancellation_scale: float
    oracle: dict | None = None

    @property
    def converged(self) -> bool:
        parts = [
            self.line,
            self.surface_electric_numeric,
            self.surface_magnetic_numeric,
            self.semianalytic.total,
            *self.semianalytic.interior.values(),
        ]
        return all(p.converged for p in parts)

    def to_dict(self) -> dict:
        return {
            "line_value": self.line.to_dict(),
            "surface_value_numeric": self.surface_numeric.to_dict(),
            "surface_electric_numeric": self.surface_electric_numeric.to_dict(),
            "surface_magnetic_numeric": self.surface_magnetic_numeric.to_dict(),
            "surface_value_semianalytic": self.semianalytic.total.to_dict(),
            "residual_line_vs_numeric": self.residual_line_vs_numeric,
            "residual_line_vs_semianalytic": self.residual_line_vs_semianalytic,
            "interior_cancellation_residual": self.interior_cancellation_residual,
            "interior_cancellation_scale": self.interior_cancellation_scale,
            "regions": self.semianalytic.to_dict(),
            "converged": self.converged,
            "oracle": self.oracle,
        }


def interior_cancellation(semi: SemiAnalyticResult) -> tuple[float, float]:
    """(|sum of interior pieces|, largest |piece|)."""
    pieces = [r.value for r in semi.interior.values()] + [r.value for r in semi.magnetic.values()]
    return abs(float(np.sum(pieces))), max((abs(p) for p in pieces), default=0.0)


def stokes_check(
    field: SolenoidField, patch: SurfacePatch, cfg: QuadratureConfig | None = None, oracle: bool = False
) -> StokesReport:
    cfg = cfg or QuadratureConfig()
    line = line_integral(field, patch.boundary(), cfg)
    el = surface_integral(field, patch, SurfacePart.ELECTRIC, cfg)
    mag = surface_integral(field, patch, SurfacePart.MAGNETIC, cfg)
    numeric = el + mag
    semi = surface_integral_semianalytic(field, patch, cfg)
    residual, scale = interior_cancellation(semi)
    report = StokesReport(
        line=line,
        surface_numeric=numeric,
        surface_electric_numeric=el,
        surface_magnetic_numeric=mag,
        semianalytic=semi,
        residual_line_vs_numeric=abs(line.value - numeric.value),
        residual_line_vs_semianalytic=abs(line.value - semi.total.value),
        interior_cancellation_residual=residual,
        interior_cancellation_scale=scale,
    )
    if oracle:
        report.oracle = oracle_crosscheck(field, patch, cfg)
    return report


# --------------------------------------------------------------------------
# path independence


def lambda_difference(
    field, path_a: SpacetimePath, path_b: SpacetimePath, cfg: QuadratureConfig | None = None
) -> IntegralResult:
    """
    Lambda(x; A) - Lambda(x; B) = int_A A dx - int_B A dx, which is the
    closed-loop integral over A followed by B reversed.
    """
    if not _events_close(path_a.start, path_b.start, ENDPOINT_TOL):
        raise ValueError(f"paths start at different events: {path_a.start} vs {path_b.start}")
    if not _events_close(path_a.end, path_b.end, ENDPOINT_TOL):
        raise ValueError(f"paths end at different events: {path_a.end} vs {path_b.end}")
    a = line_integral(field, path_a, cfg)
    b = line_integral(field, path_b, cfg)
    return IntegralResult(a.value - b.value, a.error_estimate + b.error_estimate, a.evaluations + b.evaluations, a.converged and b.converged)


# --------------------------------------------------------------------------
# midpoint-rule cross-checks


@dataclass
class OracleCheck:
    label: str
    adaptive: float
    oracle: float

    @property
    def deviation(self) -> float:
        return abs(self.adaptive - self.oracle)

    def passes(self, rtol: float = 1e-5) -> bool:
        return self.deviation <= rtol * (1.0 + abs(self.adaptive))

    def to_dict(self):
        return {"label": self.label, "adaptive": self.adaptive, "oracle": self.oracle, "deviation": self.deviation}


def oracle_line_checks(potential, path: SpacetimePath, cfg=None, label="line", n=ORACLE_PANELS) -> list[OracleCheck]:
    cfg = cfg or QuadratureConfig()
    out = []
    for k, p in enumerate(line_pieces(potential, path)):
        res = integrate_1d(p.fn, p.a, p.b, cfg.with_breakpoints(p.breakpoints))
        sign = 1.0 if p.b >= p.a else -1.0
        lo, hi = sorted((p.a, p.b))
        out.append(OracleCheck(f"{label}[{k}]", res.value, sign * riemann_oracle(p.fn, lo, hi, n)))
    return out


def oracle_surface_checks(field, patch: SurfacePatch, cfg=None, n=ORACLE_PANELS, slices: int = 3) -> list[OracleCheck]:
    """
    Midpoint checks of the 1-D integrals behind both surface routes: the
    phi-integrals of B along the circles rho = R, rho0 (and rho1), inner
    rho-slices of rho Btilde, and inner rho-slices of the electric and
    magnetic wedge-product integrands at a few fixed angles.
    """
    cfg = cfg or QuadratureConfig()
    B = field.profile.value
    out = []
    radii = [patch.rho0, patch.rho1] if not patch.encircling else [patch.rho0, field.R]
    for k, sec in enumerate(patch.sectors()):
        for r in radii:
            Fr = float(sec.F(r))
            fn = lambda p, Fr=Fr, sec=sec: B(Fr * sec.tmap(p))
            res = _boundary_term(field, sec, r, cfg)
            out.append(OracleCheck(f"sector{k + 1}:B(rho={r:g})", res.value, riemann_oracle(fn, sec.phi_lo, sec.phi_hi, n)))
        if patch.encircling:
            bt = _btilde(field, sec)
            for phi in np.linspace(sec.phi_lo, sec.phi_hi, slices + 2)[1:-1]:
                fn = lambda r, phi=float(phi), bt=bt: r * bt(r, phi)
                pts = _rho_breakpoints(field, sec, 0.0, field.R)
                pts = pts(float(phi)) if callable(pts) else pts
                res = integrate_1d(fn, 0.0, field.R, cfg.with_breakpoints(pts))
                out.append(OracleCheck(f"sector{k + 1}:rho-slice(phi={phi:.6g})", res.value, riemann_oracle(fn, 0.0, field.R, n)))
        # inner slices of the 2-D wedge-product integrand
        for part in (SurfacePart.ELECTRIC, SurfacePart.MAGNETIC):
            integrand = _surface_integrand(field, sec, part)
            bps = _rho_breakpoints(field, sec, patch.rho1, patch.rho0)
            for phi in np.linspace(sec.phi_lo, sec.phi_hi, slices + 2)[1:-1]:
                fn = lambda r, phi=float(phi), integrand=integrand: integrand(np.asarray(r, dtype=float), phi)
                pts = bps(float(phi)) if callable(bps) else bps
                res = integrate_1d(fn, patch.rho1, patch.rho0, cfg.with_breakpoints(pts))
                label = f"sector{k + 1}:{part.value}-slice(phi={phi:.6g})"
                out.append(OracleCheck(label, res.value, riemann_oracle(fn, patch.rho1, patch.rho0, n)))
    return out


def oracle_crosscheck(field, patch, cfg=None, n=ORACLE_PANELS) -> dict:
    checks = oracle_line_checks(field, patch.boundary(), cfg, "boundary", n) + oracle_surface_checks(field, patch, cfg, n)
    return {
        "panels": n,
        "all_pass": all(c.passes() for c in checks),
        "checks": [c.to_dict() for c in checks],
    }
