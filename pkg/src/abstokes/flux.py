"""
Time laws B(t) for the uniform interior field of the solenoid.

Each profile provides the value, the exact derivative and the exact running
integral ``integral(t) = int_0^t B(t') dt'``. The antiderivatives are closed
form on purpose: ``avg_B`` serves as an analytic reference for the
quadrature-based routes and must not share their error sources.

All methods accept floats or numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# below this |Omega t| the sinc ratio switches to its Taylor series
SINC_SERIES_THRESHOLD = 1e-4


def sinc(x):
    """sin(x)/x with the removable singularity filled in."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < SINC_SERIES_THRESHOLD
    safe = np.where(small, 1.0, x)
    x2 = x * x
    out = np.where(small, 1.0 - x2 / 6.0 + x2 * x2 / 120.0, np.sin(safe) / safe)
    return out if out.ndim else float(out)


def _broadcast(c: float, t):
    if np.ndim(t):
        return np.full(np.shape(t), float(c))
    return float(c)


class FluxProfile:
    """Base class; subclasses are frozen dataclasses."""

    kind: str = ""
    # times at which B is continuous but not differentiable
    kinks: tuple[float, ...] = ()

    def value(self, t):
        raise NotImplementedError

    def derivative(self, t):
        raise NotImplementedError

    def integral(self, t):
        """int_0^t B(t') dt'."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __call__(self, t):
        return self.value(t)


@dataclass(frozen=True)
class Constant(FluxProfile):
    B0: float
    kind = "constant"

    def value(self, t):
        return _broadcast(self.B0, t)

    def derivative(self, t):
        return _broadcast(0.0, t)

    def integral(self, t):
        return self.B0 * t

    def to_dict(self):
        return {"kind": self.kind, "B0": self.B0}


@dataclass(frozen=True)
class LinearRamp(FluxProfile):
    B0: float
    B1: float
    kind = "linear_ramp"

    def value(self, t):
        return self.B0 + self.B1 * t

    def derivative(self, t):
        return _broadcast(self.B1, t)

    def integral(self, t):
        return self.B0 * t + 0.5 * self.B1 * t * t

    def to_dict(self):
        return {"kind": self.kind, "B0": self.B0, "B1": self.B1}


@dataclass(frozen=True)
class PiecewiseRamp(FluxProfile):
    """Bi before ti, linear in between, Bf after tf."""

    Bi: float
    Bf: float
    ti: float
    tf: float
    kind = "piecewise_ramp"

    def __post_init__(self):
        if not self.ti < self.tf:
            raise ValueError(f"piecewise ramp needs ti < tf, got ti={self.ti}, tf={self.tf}")

    @property
    def kinks(self):
        return (self.ti, self.tf)

    @property
    def slope(self) -> float:
        return (self.Bf - self.Bi) / (self.tf - self.ti)

    def value(self, t):
        tc = np.clip(t, self.ti, self.tf)
        out = self.Bi + self.slope * (tc - self.ti)
        return out if np.ndim(out) else float(out)

    def derivative(self, t):
        # closed interval: the kinks report the ramp slope
        inside = (np.asarray(t) >= self.ti) & (np.asarray(t) <= self.tf)
        out = np.where(inside, self.slope, 0.0)
        return out if out.ndim else float(out)

    def _antiderivative(self, t):
        # H(t) with H(ti) = Bi*ti; continuous and piecewise polynomial
        t = np.asarray(t, dtype=float)
        before = self.Bi * t
        tr = np.clip(t, self.ti, self.tf) - self.ti
        ramp = self.Bi * self.ti + self.Bi * tr + 0.5 * self.slope * tr * tr
        after = np.maximum(t - self.tf, 0.0) * self.Bf
        return np.where(t <= self.ti, before, ramp + after)

    def integral(self, t):
        out = self._antiderivative(t) - self._antiderivative(0.0)
        return out if np.ndim(out) else float(out)

    def to_dict(self):
        return {"kind": self.kind, "Bi": self.Bi, "Bf": self.Bf, "ti": self.ti, "tf": self.tf}


@dataclass(frozen=True)
class Sinusoidal(FluxProfile):
    """B(t) = B0 cos(Omega t)."""

    B0: float
    Omega: float
    kind = "sinusoidal"

    def value(self, t):
        return self.B0 * np.cos(self.Omega * t)

    def derivative(self, t):
        return -self.B0 * self.Omega * np.sin(self.Omega * t)

    def integral(self, t):
        # B0 sin(Omega t)/Omega written through sinc so Omega = 0 is allowed
        return self.B0 * t * sinc(self.Omega * t)

    def to_dict(self):
        return {"kind": self.kind, "B0": self.B0, "Omega": self.Omega}


PROFILE_KINDS = {
    "constant": Constant,
    "linear_ramp": LinearRamp,
    "piecewise_ramp": PiecewiseRamp,
    "sinusoidal": Sinusoidal,
}


def profile_from_dict(entry: dict) -> FluxProfile:
    """Build a profile from ``{"kind": ..., <parameters>}``."""
    entry = dict(entry)
    kind = entry.pop("kind", None)
    if kind not in PROFILE_KINDS:
        raise ValueError(f"flux.kind must be one of {sorted(PROFILE_KINDS)}, got {kind!r}")
    cls = PROFILE_KINDS[kind]
    try:
        params = {k: float(v) for k, v in entry.items()}
        return cls(**params)
    except TypeError as exc:
        raise ValueError(f"bad parameters for flux kind {kind!r}: {exc}") from None


def eval_B(profile: FluxProfile, t):
    return profile.value(t)


def eval_B_dot(profile: FluxProfile, t):
    return profile.derivative(t)


def avg_B(profile: FluxProfile, t_f: float) -> float:
    """Exact time average of B over [0, t_f]."""
    if not t_f > 0:
        raise ValueError(f"avg_B needs t_f > 0, got {t_f}")
    if isinstance(profile, Constant):
        return float(profile.B0)
    if isinstance(profile, Sinusoidal):
        return float(profile.B0 * sinc(profile.Omega * t_f))
    return float(profile.integral(t_f)) / t_f


def is_finite_profile(profile: FluxProfile) -> bool:
    return all(math.isfinite(v) for v in profile.to_dict().values() if isinstance(v, float))
