"""Time-dependent Aharonov-Bohm phases and space-time Stokes checks for a solenoid."""

__version__ = "0.1.0"

from .flux import Constant, LinearRamp, PiecewiseRamp, Sinusoidal, avg_B, eval_B, eval_B_dot
from .fields import (
    Event,
    GaugeFunction,
    SolenoidField,
    apply_gauge,
    electric_field,
    field_strength,
    magnetic_field,
    vector_potential,
)
from .geometry import (
    Affine,
    MonotoneMap,
    RadialProfile,
    SpacetimePath,
    SurfacePatch,
    UniformAngular,
    make_arc_path,
    standard_patch,
    wedge_measures,
    winding_number,
)
from .quadrature import IntegralResult, QuadratureConfig, integrate_1d, integrate_2d, riemann_oracle
from .stokes import (
    StokesReport,
    SurfacePart,
    lambda_difference,
    line_integral,
    stokes_check,
    surface_integral,
    surface_integral_semianalytic,
)
from .abphase import PhasePrediction, ab_phase_averaged, ab_phase_sinusoidal, ab_phase_two_path
