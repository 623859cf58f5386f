"""
Observable AB phase: the two-path line-integral route and the closed-form
time-averaged and sinusoidal predictions. Phases are in radians, unreduced;
the particle charge is -e with e > 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .fields import SolenoidField
from .flux import FluxProfile, avg_B, sinc
from .geometry import SpacetimePath
from .quadrature import QuadratureConfig
from .stokes import lambda_difference

TWO_PATH = "two_path_line_integral"
AVERAGED = "averaged_formula"
SINUSOIDAL = "sinusoidal_formula"


@dataclass
class PhasePrediction:
    phase: float
    method: str
    inputs: dict = field(default_factory=dict)
    error_estimate: float = 0.0
    converged: bool = True

    def to_dict(self) -> dict:
        return {
            "phase": self.phase,
            "method": self.method,
            "error_estimate": self.error_estimate,
            "converged": self.converged,
            "inputs": self.inputs,
        }


def ab_phase_two_path(
    field: SolenoidField, c1: SpacetimePath, c2: SpacetimePath, e: float = 1.0, cfg: QuadratureConfig | None = None
) -> PhasePrediction:
    """-e (int_C1 A dx - int_C2 A dx); the paths must share both end events."""
    diff = lambda_difference(field, c1, c2, cfg)
    return PhasePrediction(
        phase=-e * diff.value,
        method=TWO_PATH,
        inputs={"e": e, "R": field.R, "profile": field.profile.to_dict(), "c1": c1.to_dict(), "c2": c2.to_dict()},
        error_estimate=abs(e) * diff.error_estimate,
        converged=diff.converged,
    )


def ab_phase_averaged(profile: FluxProfile, R: float, t_f: float, e: float = 1.0) -> PhasePrediction:
    """e * Phibar(t_f)/t_f with Phibar the running time integral of the flux."""
    if not t_f > 0:
        raise ValueError(f"t_f must be positive, got {t_f}")
    return PhasePrediction(
        phase=e * math.pi * R**2 * avg_B(profile, t_f),
        method=AVERAGED,
        inputs={"e": e, "R": R, "t_f": t_f, "profile": profile.to_dict()},
    )


def ab_phase_sinusoidal(Phi0: float, Omega: float, t_f: float, e: float = 1.0) -> PhasePrediction:
    """e Phi0 sin(Omega t_f)/(Omega t_f), with the static limit e Phi0 at Omega t_f -> 0."""
    if not t_f > 0:
        raise ValueError(f"t_f must be positive, got {t_f}")
    return PhasePrediction(
        phase=e * Phi0 * sinc(Omega * t_f),
        method=SINUSOIDAL,
        inputs={"e": e, "Phi0": Phi0, "Omega": Omega, "t_f": t_f},
    )
