"""
Space-time paths in the z = 0 plane and (rho, phi)-parametrised surfaces.

Angles are carried unwrapped. A closed loop around the solenoid is an arc
from phi_i to phi_f (time map f) followed by an arc from phi_f to
phi_i + 2 pi (time map g). The spanning surface puts the event

    t = F(rho) f(phi),   x = rho cos phi,   y = rho sin phi

over the first angular sector and G(rho) g(phi) over the second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import brentq

from .fields import Event

TWO_PI = 2.0 * math.pi
JOIN_TOL = 1e-9
SEAM_TOL = 1e-12
_FD_STEP = 1e-6


def _scalar(v):
    return float(v) if np.ndim(v) == 0 else v


class TimeMap:
    """Monotone assignment t(phi) with exact derivative."""

    def __call__(self, phi):
        raise NotImplementedError

    def derivative(self, phi):
        raise NotImplementedError

    def shifted(self, dphi: float) -> "TimeMap":
        """The map phi -> self(phi + dphi)."""
        return ShiftedMap(self, dphi)

    def to_dict(self) -> dict:
        return {"kind": type(self).__name__}


@dataclass(frozen=True)
class UniformAngular(TimeMap):
    """t(phi) = t0 + sign * phi / omega."""

    omega: float
    t0: float = 0.0
    sign: int = 1

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"angular speed must be positive, got {self.omega}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")

    def __call__(self, phi):
        return _scalar(self.t0 + self.sign * np.asarray(phi, dtype=float) / self.omega)

    def derivative(self, phi):
        return _scalar(np.full(np.shape(phi), self.sign / self.omega))

    def shifted(self, dphi):
        return UniformAngular(self.omega, self.t0 + self.sign * dphi / self.omega, self.sign)

    def to_dict(self):
        return {"kind": "uniform_angular", "omega": self.omega, "t0": self.t0, "sign": self.sign}


@dataclass(frozen=True)
class Affine(TimeMap):
    """t(phi) = slope * phi + intercept. A zero slope gives a constant-time arc."""

    slope: float
    intercept: float = 0.0

    def __call__(self, phi):
        return _scalar(self.slope * np.asarray(phi, dtype=float) + self.intercept)

    def derivative(self, phi):
        return _scalar(np.full(np.shape(phi), float(self.slope)))

    def shifted(self, dphi):
        return Affine(self.slope, self.intercept + self.slope * dphi)

    def to_dict(self):
        return {"kind": "affine", "slope": self.slope, "intercept": self.intercept}


@dataclass(frozen=True)
class MonotoneMap(TimeMap):
    """
    User-supplied monotone map on ``domain``. Monotonicity and the
    derivative are checked by sampling when the map is built.
    """

    fn: Callable
    deriv: Callable
    domain: tuple[float, float]
    label: str = "monotone"

    def __post_init__(self):
        lo, hi = sorted(self.domain)
        phi = np.linspace(lo, hi, 201)
        t = np.asarray(self.fn(phi), dtype=float)
        dt = np.diff(t)
        if not (np.all(dt > 0) or np.all(dt < 0)):
            raise ValueError(f"time map {self.label!r} is not strictly monotone on {self.domain}")
        inner = phi[1:-1]
        fd = (np.asarray(self.fn(inner + _FD_STEP)) - np.asarray(self.fn(inner - _FD_STEP))) / (2 * _FD_STEP)
        d = np.asarray(self.deriv(inner), dtype=float)
        if np.any(np.abs(fd - d) > 1e-6 * (1.0 + np.abs(d))):
            raise ValueError(f"time map {self.label!r}: derivative disagrees with finite differences")

    def __call__(self, phi):
        return _scalar(np.asarray(self.fn(np.asarray(phi, dtype=float)), dtype=float))

    def derivative(self, phi):
        return _scalar(np.asarray(self.deriv(np.asarray(phi, dtype=float)), dtype=float))

    def to_dict(self):
        return {"kind": "monotone", "label": self.label, "domain": list(self.domain)}


@dataclass(frozen=True)
class ShiftedMap(TimeMap):
    base: TimeMap
    dphi: float

    def __call__(self, phi):
        return self.base(np.asarray(phi, dtype=float) + self.dphi)

    def derivative(self, phi):
        return self.base.derivative(np.asarray(phi, dtype=float) + self.dphi)

    def to_dict(self):
        return {"kind": "shifted", "dphi": self.dphi, "base": self.base.to_dict()}


def crossings(fn: Callable, lo: float, hi: float, levels: Sequence[float], samples: int = 65) -> list[float]:
    """
    Parameter values in (lo, hi) where the vectorised ``fn`` crosses any of
    ``levels``. Used to turn time kinks of B(t) into integration breakpoints.
    """
    if not levels or lo == hi:
        return []
    lo, hi = min(lo, hi), max(lo, hi)
    s = np.linspace(lo, hi, samples)
    v = np.asarray(fn(s), dtype=float)
    found = []
    for level in levels:
        d = v - level
        for k in range(samples - 1):
            if d[k] == 0.0:
                found.append(s[k])
            elif d[k] * d[k + 1] < 0:
                found.append(brentq(lambda u: float(fn(u)) - level, s[k], s[k + 1], xtol=1e-15, rtol=1e-15))
    return sorted(p for p in set(found) if lo < p < hi)


# --------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class Arc:
    rho: float
    phi_start: float
    phi_end: float
    tmap: TimeMap
    z: float = 0.0

    @property
    def bounds(self):
        return self.phi_start, self.phi_end

    def event(self, phi: float) -> Event:
        return Event(float(self.tmap(phi)), self.rho * math.cos(phi), self.rho * math.sin(phi), self.z)

    @property
    def start(self) -> Event:
        return self.event(self.phi_start)

    @property
    def end(self) -> Event:
        return self.event(self.phi_end)

    @property
    def delta_phi(self) -> float:
        return self.phi_end - self.phi_start

    def reversed(self) -> "Arc":
        return Arc(self.rho, self.phi_end, self.phi_start, self.tmap, self.z)

    def coordinates(self, phi):
        """(t, x, y, z) and their derivatives along the parameter phi."""
        c, s = np.cos(phi), np.sin(phi)
        t = self.tmap(phi)
        dt = self.tmap.derivative(phi)
        zero = np.zeros_like(c)
        return (t, self.rho * c, self.rho * s, zero + self.z), (dt, -self.rho * s, self.rho * c, zero)

    def time_breakpoints(self, kinks):
        return crossings(self.tmap, self.phi_start, self.phi_end, kinks)

    def radial_breakpoints(self, radii):
        return []

    def to_dict(self):
        return {
            "type": "arc",
            "rho": self.rho,
            "phi_start": self.phi_start,
            "phi_end": self.phi_end,
            "z": self.z,
            "tmap": self.tmap.to_dict(),
        }


@dataclass(frozen=True)
class RadialSegment:
    phi: float
    rho_start: float
    rho_end: float
    t: float
    z: float = 0.0

    @property
    def bounds(self):
        return self.rho_start, self.rho_end

    def event(self, rho: float) -> Event:
        return Event(self.t, rho * math.cos(self.phi), rho * math.sin(self.phi), self.z)

    @property
    def start(self) -> Event:
        return self.event(self.rho_start)

    @property
    def end(self) -> Event:
        return self.event(self.rho_end)

    @property
    def delta_phi(self) -> float:
        return 0.0

    def reversed(self) -> "RadialSegment":
        return RadialSegment(self.phi, self.rho_end, self.rho_start, self.t, self.z)

    def coordinates(self, rho):
        rho = np.asarray(rho, dtype=float)
        c, s = math.cos(self.phi), math.sin(self.phi)
        zero = np.zeros_like(rho)
        return (zero + self.t, rho * c, rho * s, zero + self.z), (zero, zero + c, zero + s, zero)

    def time_breakpoints(self, kinks):
        return []

    def radial_breakpoints(self, radii):
        lo, hi = sorted(self.bounds)
        return [r for r in radii if lo < r < hi]

    def to_dict(self):
        return {
            "type": "radial",
            "phi": self.phi,
            "rho_start": self.rho_start,
            "rho_end": self.rho_end,
            "t": self.t,
            "z": self.z,
        }


def _events_close(a: Event, b: Event, tol: float) -> bool:
    return bool(np.max(np.abs(a.as_array() - b.as_array())) <= tol)


def _spatially_close(a: Event, b: Event, tol: float) -> bool:
    return bool(np.max(np.abs(a.as_array()[1:] - b.as_array()[1:])) <= tol)


@dataclass(frozen=True)
class SpacetimePath:
    segments: tuple

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ValueError("a path needs at least one segment")
        object.__setattr__(self, "segments", segs)
        for k, (a, b) in enumerate(zip(segs, segs[1:])):
            if not _events_close(a.end, b.start, JOIN_TOL):
                raise ValueError(f"segments {k} and {k + 1} do not join: {a.end} vs {b.start}")

    @property
    def start(self) -> Event:
        return self.segments[0].start

    @property
    def end(self) -> Event:
        return self.segments[-1].end

    def reversed(self) -> "SpacetimePath":
        return SpacetimePath(tuple(s.reversed() for s in reversed(self.segments)))

    def __add__(self, other: "SpacetimePath") -> "SpacetimePath":
        return SpacetimePath(self.segments + other.segments)

    def is_closed(self, tol: float = JOIN_TOL) -> bool:
        return _events_close(self.start, self.end, tol)

    def to_dict(self):
        return {"segments": [s.to_dict() for s in self.segments]}


def make_arc_path(rho: float, phi_start: float, phi_end: float, tmap: TimeMap, z: float = 0.0) -> SpacetimePath:
    if not rho > 0:
        raise ValueError(f"arc radius must be positive, got {rho}")
    if isinstance(tmap, MonotoneMap):
        lo, hi = sorted((phi_start, phi_end))
        dlo, dhi = sorted(tmap.domain)
        if lo < dlo - 1e-12 or hi > dhi + 1e-12:
            raise ValueError(f"arc [{phi_start}, {phi_end}] leaves the time map domain {tmap.domain}")
    return SpacetimePath((Arc(rho, phi_start, phi_end, tmap, z),))


def make_radial_path(phi: float, rho_start: float, rho_end: float, t: float, z: float = 0.0) -> SpacetimePath:
    if rho_start < 0 or rho_end < 0:
        raise ValueError("radii must be non-negative")
    return SpacetimePath((RadialSegment(phi, rho_start, rho_end, t, z),))


def winding_number(path: SpacetimePath) -> int:
    """Signed number of turns about the z-axis of a spatially closed path."""
    if not _spatially_close(path.start, path.end, JOIN_TOL):
        raise ValueError("winding number needs a path that is closed in x and y")
    total = math.fsum(s.delta_phi for s in path.segments)
    return int(round(total / TWO_PI))


# --------------------------------------------------------------------------
# surfaces


@dataclass(frozen=True)
class RadialProfile:
    """F(rho) on [0, rho0] with exact derivative and F(rho0) = 1."""

    fn: Callable
    deriv: Callable
    rho0: float
    label: str = "custom"

    def __post_init__(self):
        if abs(float(self.fn(np.array([self.rho0]))[0]) - 1.0) > SEAM_TOL:
            raise ValueError(f"radial profile {self.label!r} must equal 1 at rho0={self.rho0}")

    def __call__(self, rho):
        return _scalar(np.asarray(self.fn(np.asarray(rho, dtype=float)), dtype=float))

    def derivative(self, rho):
        return _scalar(np.asarray(self.deriv(np.asarray(rho, dtype=float)), dtype=float))


def power_profile(rho0: float, n: float = 1.0) -> RadialProfile:
    """(rho/rho0)^n; n = 1 is the default linear interpolation."""
    if n == 1:
        return RadialProfile(lambda r: r / rho0, lambda r: np.full(np.shape(r), 1.0 / rho0), rho0, "linear")
    return RadialProfile(
        lambda r: (r / rho0) ** n,
        lambda r: n * (r / rho0) ** (n - 1) / rho0,
        rho0,
        f"power{n:g}",
    )


def constant_profile(rho0: float) -> RadialProfile:
    return RadialProfile(lambda r: np.ones(np.shape(r)), lambda r: np.zeros(np.shape(r)), rho0, "constant")


@dataclass(frozen=True)
class Sector:
    """One angular sector of a patch: phi in [phi_lo, phi_hi], t = F(rho) tmap(phi)."""

    phi_lo: float
    phi_hi: float
    tmap: TimeMap
    F: RadialProfile


@dataclass(frozen=True)
class SurfacePatch:
    """
    With ``rho1 == 0`` the patch is the disc of radius rho0 split into the
    sectors [phi_i, phi_f] (f, F) and [phi_f, phi_i + 2 pi] (g, G). With
    ``rho1 > 0`` it is the annular sector rho1 <= rho <= rho0,
    phi_i <= phi <= phi_f, bounded by a loop that does not wind around the
    axis; g and G are then unused and F must also equal 1 at rho1.
    """

    rho0: float
    phi_i: float
    phi_f: float
    f: TimeMap
    F: RadialProfile
    g: TimeMap | None = None
    G: RadialProfile | None = None
    rho1: float = 0.0

    def __post_init__(self):
        if not self.rho0 > 0:
            raise ValueError("rho0 must be positive")
        if not 0 <= self.rho1 < self.rho0:
            raise ValueError(f"inner radius must satisfy 0 <= rho1 < rho0, got {self.rho1}")
        if not self.phi_i < self.phi_f:
            raise ValueError("phi_i < phi_f required")
        for prof in (self.F, self.G):
            if prof is not None and prof.rho0 != self.rho0:
                raise ValueError("radial profile built for a different rho0")
        self._check_seams()

    @property
    def encircling(self) -> bool:
        return self.rho1 == 0.0

    @property
    def t_i(self) -> float:
        return float(self.f(self.phi_i))

    @property
    def t_f(self) -> float:
        return float(self.f(self.phi_f))

    def _check_seams(self):
        rho = np.linspace(self.rho1, self.rho0, 100)
        F = np.asarray(self.F(rho))
        if self.encircling:
            if self.g is None or self.G is None:
                raise ValueError("an encircling patch needs g and G")
            if self.phi_f >= self.phi_i + TWO_PI:
                raise ValueError("phi_f must lie below phi_i + 2 pi")
            G = np.asarray(self.G(rho))
            seams = {
                "phi_f": (F * self.f(self.phi_f), G * self.g(self.phi_f)),
                "phi_i": (F * self.f(self.phi_i), G * self.g(self.phi_i + TWO_PI)),
            }
        else:
            # the radial legs of the boundary are constant-time segments
            if abs(float(self.F(self.rho1)) - 1.0) > SEAM_TOL:
                raise ValueError("annular patch needs F(rho1) = 1")
            seams = {
                "phi_f": (F * self.t_f, np.full_like(F, self.t_f)),
                "phi_i": (F * self.t_i, np.full_like(F, self.t_i)),
            }
        for name, (a, b) in seams.items():
            gap = np.max(np.abs(a - b))
            if gap > SEAM_TOL * (1.0 + np.max(np.abs(a))):
                raise ValueError(f"surface is discontinuous along the {name} seam (gap {gap:.3g})")

    def sectors(self) -> list[Sector]:
        out = [Sector(self.phi_i, self.phi_f, self.f, self.F)]
        if self.encircling:
            out.append(Sector(self.phi_f, self.phi_i + TWO_PI, self.g, self.G))
        return out

    def sector_at(self, phi: float) -> Sector:
        for sec in self.sectors():
            if sec.phi_lo <= phi <= sec.phi_hi:
                return sec
        raise ValueError(f"phi={phi} is outside the patch")

    def event(self, rho: float, phi: float) -> Event:
        if not self.rho1 <= rho <= self.rho0:
            raise ValueError(f"rho={rho} is outside the patch")
        sec = self.sector_at(phi)
        return Event(float(sec.F(rho) * sec.tmap(phi)), rho * math.cos(phi), rho * math.sin(phi), 0.0)

    def boundary(self) -> SpacetimePath:
        """Positively oriented boundary (w.r.t. d rho ^ d phi)."""
        outer = Arc(self.rho0, self.phi_i, self.phi_f, self.f)
        if self.encircling:
            return SpacetimePath((outer, Arc(self.rho0, self.phi_f, self.phi_i + TWO_PI, self.g)))
        return SpacetimePath((
            outer,
            RadialSegment(self.phi_f, self.rho0, self.rho1, self.t_f),
            Arc(self.rho1, self.phi_f, self.phi_i, self.f),
            RadialSegment(self.phi_i, self.rho1, self.rho0, self.t_i),
        ))

    def to_dict(self):
        return {
            "rho0": self.rho0,
            "rho1": self.rho1,
            "phi_i": self.phi_i,
            "phi_f": self.phi_f,
            "f": self.f.to_dict(),
            "g": None if self.g is None else self.g.to_dict(),
            "F": self.F.label,
            "G": None if self.G is None else self.G.label,
        }


def sector_wedge(sec: Sector, rho, phi):
    """
    Coefficients of d rho ^ d phi for dt^dx, dt^dy and dx^dy on a sector.
    The dt^dz, dx^dz, dy^dz coefficients vanish on the z = 0 plane.
    """
    F, dF = sec.F(rho), sec.F.derivative(rho)
    f, df = sec.tmap(phi), sec.tmap.derivative(phi)
    c, s = np.cos(phi), np.sin(phi)
    c_tx = -rho * dF * f * s - F * df * c
    c_ty = rho * dF * f * c - F * df * s
    c_xy = rho + 0.0 * c_tx
    return c_tx, c_ty, c_xy


def wedge_measures(patch: SurfacePatch, rho: float, phi: float, order: str = "rho_phi"):
    """
    (c_tx, c_ty, c_xy) at (rho, phi). With ``order="phi_rho"`` the
    coefficients refer to d phi ^ d rho and therefore change sign.
    """
    if not patch.rho1 <= rho <= patch.rho0:
        raise ValueError(f"rho={rho} is outside the patch")
    if order not in ("rho_phi", "phi_rho"):
        raise ValueError(f"order must be 'rho_phi' or 'phi_rho', got {order!r}")
    c_tx, c_ty, c_xy = (float(v) for v in sector_wedge(patch.sector_at(phi), rho, phi))
    if order == "phi_rho":
        return -c_tx, -c_ty, -c_xy
    return c_tx, c_ty, c_xy


def standard_patch(
    rho0: float,
    omega: float,
    phi_i: float = 0.0,
    phi_f: float = math.pi,
    radial_power: float = 1.0,
    rho1: float = 0.0,
) -> SurfacePatch:
    """
    Uniform-speed patch starting at t = 0. On the first sector the particle
    moves at angular speed ``omega``; the second sector's speed is chosen so
    that both arcs reach phi_f at the same time t_f = (phi_f - phi_i)/omega.
    """
    f = UniformAngular(omega, -phi_i / omega, 1)
    if rho1 > 0:
        return SurfacePatch(rho0, phi_i, phi_f, f, constant_profile(rho0), rho1=rho1)
    t_f = (phi_f - phi_i) / omega
    omega2 = (phi_i + TWO_PI - phi_f) / t_f
    g = UniformAngular(omega2, (phi_i + TWO_PI) / omega2, -1)
    prof = power_profile(rho0, radial_power)
    return SurfacePatch(rho0, phi_i, phi_f, f, prof, g, prof)


def two_arc_paths(patch: SurfacePatch) -> tuple[SpacetimePath, SpacetimePath]:
    """
    The interferometer arms of an encircling patch, both running forward
    in time from (phi_i, t_i) to (phi_f, t_f): C1 along phi_i -> phi_f and
    C2 along phi_i -> phi_f - 2 pi.
    """
    if not patch.encircling:
        raise ValueError("two-arc paths need an encircling patch")
    c1 = make_arc_path(patch.rho0, patch.phi_i, patch.phi_f, patch.f)
    c2 = make_arc_path(patch.rho0, patch.phi_i, patch.phi_f - TWO_PI, patch.g.shifted(TWO_PI))
    return c1, c2


def outer_loop_paths(patch: SurfacePatch) -> tuple[SpacetimePath, SpacetimePath]:
    """
    C1 (outer arc) and C2 (in along phi_i, inner arc, out along phi_f) of a
    non-encircling annular patch; both share start and end events.
    """
    if patch.encircling:
        raise ValueError("outer-loop paths need a patch with rho1 > 0")
    c1 = make_arc_path(patch.rho0, patch.phi_i, patch.phi_f, patch.f)
    c2 = SpacetimePath((
        RadialSegment(patch.phi_i, patch.rho0, patch.rho1, patch.t_i),
        Arc(patch.rho1, patch.phi_i, patch.phi_f, patch.f),
        RadialSegment(patch.phi_f, patch.rho1, patch.rho0, patch.t_f),
    ))
    return c1, c2
