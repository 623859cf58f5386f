"""
Potentials and fields of an infinitely long solenoid along the z-axis.

Natural units (hbar = c = 1), metric (+,-,-,-). The scalar potential is
identically zero and the vector potential is azimuthal:

    A = rho B(t)/2 e_phi          (rho <  R)
    A = R^2 B(t)/(2 rho) e_phi    (rho >= R)

The wall rho = R belongs to the exterior branch for both A and B.

A "4-potential" here is any object with a vectorised method
``four_potential(t, x, y, z) -> (A0, Ax, Ay, Az)`` returning the
contravariant components. Optional attributes ``time_kinks`` and
``radial_kinks`` tell the integrators where the potential is non-smooth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .flux import FluxProfile


@dataclass(frozen=True)
class Event:
    t: float
    x: float
    y: float
    z: float = 0.0

    @property
    def rho(self):
        return np.hypot(self.x, self.y)

    @property
    def phi(self):
        return np.arctan2(self.y, self.x)

    def as_array(self) -> np.ndarray:
        return np.array([self.t, self.x, self.y, self.z], dtype=float)


@dataclass(frozen=True)
class FieldStrength:
    """E and B packed as the covariant tensor F_{mu nu}."""

    E: np.ndarray
    B: np.ndarray

    @property
    def F_0x(self):
        return self.E[0]

    @property
    def F_0y(self):
        return self.E[1]

    @property
    def F_0z(self):
        return self.E[2]

    @property
    def F_xy(self):
        return -self.B[2]

    @property
    def F_yz(self):
        return -self.B[0]

    @property
    def F_zx(self):
        return -self.B[1]

    def tensor(self) -> np.ndarray:
        """4x4 antisymmetric matrix in (t, x, y, z) order (scalar events only)."""
        F = np.zeros((4, 4))
        F[0, 1:] = self.E
        F[1, 2], F[2, 3], F[3, 1] = self.F_xy, self.F_yz, self.F_zx
        return F - F.T


@dataclass(frozen=True)
class SolenoidField:
    R: float
    profile: FluxProfile

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"solenoid radius must be positive, got {self.R}")

    @property
    def time_kinks(self) -> tuple[float, ...]:
        return tuple(self.profile.kinks)

    @property
    def radial_kinks(self) -> tuple[float, ...]:
        return (self.R,)

    def flux(self, t):
        return math.pi * self.R**2 * self.profile.value(t)

    def _azimuthal_factor(self, rho):
        # |A| / B(t): rho/2 inside, R^2/(2 rho) outside
        rho = np.asarray(rho, dtype=float)
        outside = rho >= self.R
        safe = np.where(outside, rho, 1.0)
        return np.where(outside, 0.5 * self.R**2 / safe, 0.5 * rho)

    def _along_phi(self, magnitude, x, y):
        # magnitude * e_phi in Cartesian form; magnitude/rho * (-y, x) avoids atan2
        rho = np.hypot(x, y)
        safe = np.where(rho > 0, rho, 1.0)
        scale = np.where(rho > 0, magnitude / safe, 0.0)
        return -scale * y, scale * x

    def vector_potential_xyz(self, t, x, y, z=0.0):
        rho = np.hypot(x, y)
        ax, ay = self._along_phi(self._azimuthal_factor(rho) * self.profile.value(t), x, y)
        return ax, ay, np.zeros_like(ax)

    def electric_field_xyz(self, t, x, y, z=0.0):
        rho = np.hypot(x, y)
        ex, ey = self._along_phi(-self._azimuthal_factor(rho) * self.profile.derivative(t), x, y)
        return ex, ey, np.zeros_like(ex)

    def magnetic_field_xyz(self, t, x, y, z=0.0):
        rho = np.hypot(x, y)
        bz = np.where(rho < self.R, self.profile.value(t), 0.0)
        zero = np.zeros_like(bz)
        return zero, zero, bz

    def four_potential(self, t, x, y, z=0.0):
        ax, ay, az = self.vector_potential_xyz(t, x, y, z)
        return np.zeros_like(ax), ax, ay, az


def vector_potential(field: SolenoidField, ev: Event) -> np.ndarray:
    return np.array(field.vector_potential_xyz(ev.t, ev.x, ev.y, ev.z), dtype=float)


def electric_field(field: SolenoidField, ev: Event) -> np.ndarray:
    return np.array(field.electric_field_xyz(ev.t, ev.x, ev.y, ev.z), dtype=float)


def magnetic_field(field: SolenoidField, ev: Event) -> np.ndarray:
    return np.array(field.magnetic_field_xyz(ev.t, ev.x, ev.y, ev.z), dtype=float)


def field_strength(field: SolenoidField, ev: Event) -> FieldStrength:
    return FieldStrength(E=electric_field(field, ev), B=magnetic_field(field, ev))


class GaugeMismatchError(ValueError):
    """The gradient handed to a GaugeFunction does not match its scalar."""


# deterministic validation grid for gauge functions
_GRID = np.array(np.meshgrid(*[np.linspace(-1.7, 1.9, 4)] * 4, indexing="ij")).reshape(4, -1)
_FD_STEP = 1e-5
GAUGE_CHECK_RTOL = 1e-6


@dataclass(frozen=True)
class GaugeFunction:
    """
    A single-valued scalar chi(t, x, y, z) and its exact 4-gradient.

    ``gradient(t, x, y, z)`` returns (d chi/dt, d chi/dx, d chi/dy, d chi/dz).
    Both callables are vectorised. The pair is checked against central finite
    differences on a fixed grid when the object is built.
    """

    value: Callable
    gradient: Callable
    name: str = "chi"

    def __post_init__(self):
        t, x, y, z = _GRID
        grad = np.broadcast_to(np.asarray(self.gradient(t, x, y, z), dtype=float), (4, t.size))
        for axis in range(4):
            hi, lo = _GRID.copy(), _GRID.copy()
            hi[axis] += _FD_STEP
            lo[axis] -= _FD_STEP
            fd = (np.asarray(self.value(*hi)) - np.asarray(self.value(*lo))) / (2 * _FD_STEP)
            bad = np.abs(fd - grad[axis]) > GAUGE_CHECK_RTOL * (1.0 + np.abs(grad[axis]))
            if np.any(bad):
                k = int(np.argmax(bad))
                raise GaugeMismatchError(
                    f"gauge function {self.name!r}: gradient component {axis} disagrees with "
                    f"finite differences at {tuple(_GRID[:, k])} ({grad[axis][k]} vs {fd[k]})"
                )


def zero_gauge() -> GaugeFunction:
    return GaugeFunction(
        lambda t, x, y, z: 0.0 * t,
        lambda t, x, y, z: (0.0 * t, 0.0 * t, 0.0 * t, 0.0 * t),
        name="zero",
    )


def linear_time_gauge(alpha: float) -> GaugeFunction:
    return GaugeFunction(
        lambda t, x, y, z: alpha * t,
        lambda t, x, y, z: (alpha + 0.0 * t, 0.0 * t, 0.0 * t, 0.0 * t),
        name=f"{alpha}*t",
    )


def bilinear_xy_gauge(beta: float) -> GaugeFunction:
    return GaugeFunction(
        lambda t, x, y, z: beta * x * y,
        lambda t, x, y, z: (0.0 * t, beta * y + 0.0 * t, beta * x + 0.0 * t, 0.0 * t),
        name=f"{beta}*x*y",
    )


def sin_x_cos_t_gauge() -> GaugeFunction:
    return GaugeFunction(
        lambda t, x, y, z: np.sin(x) * np.cos(t),
        lambda t, x, y, z: (
            -np.sin(x) * np.sin(t),
            np.cos(x) * np.cos(t),
            0.0 * t,
            0.0 * t,
        ),
        name="sin(x)*cos(t)",
    )


@dataclass(frozen=True)
class GaugedPotential:
    """A_mu - d_mu chi, i.e. A0' = A0 - dchi/dt and A' = A + grad chi."""

    base: object
    chi: GaugeFunction

    @property
    def time_kinks(self):
        return tuple(getattr(self.base, "time_kinks", ()))

    @property
    def radial_kinks(self):
        return tuple(getattr(self.base, "radial_kinks", ()))

    def four_potential(self, t, x, y, z=0.0):
        a0, ax, ay, az = self.base.four_potential(t, x, y, z)
        dt, dx, dy, dz = self.chi.gradient(t, x, y, z)
        return a0 - dt, ax + dx, ay + dy, az + dz


def apply_gauge(potential, chi: GaugeFunction) -> GaugedPotential:
    return GaugedPotential(potential, chi)
