import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from abstokes.abphase import (
    AVERAGED,
    SINUSOIDAL,
    TWO_PATH,
    ab_phase_averaged,
    ab_phase_sinusoidal,
    ab_phase_two_path,
)
from abstokes.fields import SolenoidField
from abstokes.flux import Constant, LinearRamp, PiecewiseRamp, Sinusoidal
from abstokes.geometry import MonotoneMap, UniformAngular, make_arc_path, outer_loop_paths, standard_patch, two_arc_paths

PI = math.pi


def arms(omega, rho0=2.0):
    return two_arc_paths(standard_patch(rho0, omega))


def test_two_path_constant_flux():
    field = SolenoidField(1.0, Constant(2.0))
    c1, c2 = arms(1.0)
    pred = ab_phase_two_path(field, c1, c2, e=1.0)
    assert pred.method == TWO_PATH
    assert pred.phase == pytest.approx(2 * PI, abs=1e-9)
    assert pred.converged
    assert pred.inputs["R"] == 1.0


def test_two_path_lower_arm_runs_backwards_in_angle():
    c1, c2 = arms(1.0)
    np.testing.assert_allclose(c2.end.as_array(), c1.end.as_array(), atol=1e-12)
    assert c2.segments[0].phi_end == pytest.approx(-PI)
    assert c2.end.t == pytest.approx(PI)


def test_two_path_identical_paths(profile):
    field = SolenoidField(1.0, profile)
    c1, _ = arms(0.5)
    assert ab_phase_two_path(field, c1, c1).phase == 0.0


def test_two_path_winding_zero_pair(profile):
    field = SolenoidField(1.0, profile)
    c1, c2 = outer_loop_paths(standard_patch(2.0, 1.0, rho1=1.2))
    assert abs(ab_phase_two_path(field, c1, c2).phase) <= 1e-9


def test_sign_reversal_is_exact(profile):
    field = SolenoidField(1.0, profile)
    c1, c2 = arms(2.0)
    assert ab_phase_two_path(field, c2, c1).phase == -ab_phase_two_path(field, c1, c2).phase


def test_two_path_scales_with_charge():
    field = SolenoidField(1.0, LinearRamp(1.0, 0.5))
    c1, c2 = arms(1.0)
    assert ab_phase_two_path(field, c1, c2, e=3.0).phase == pytest.approx(3 * ab_phase_two_path(field, c1, c2).phase)


@pytest.mark.parametrize(
    "prof, t_f, expected",
    [
        (Constant(2.0), 0.7, 2 * PI),
        (Constant(2.0), 50.0, 2 * PI),
        (LinearRamp(1.0, 0.5), 2.0, PI * (1.0 + 0.5 * 2.0 / 2)),
        (LinearRamp(-1.0, 3.0), 0.5, PI * (-1.0 + 3.0 * 0.5 / 2)),
    ],
)
def test_averaged_examples(prof, t_f, expected):
    pred = ab_phase_averaged(prof, 1.0, t_f)
    assert pred.method == AVERAGED
    assert pred.phase == pytest.approx(expected, rel=1e-14)


def test_averaged_continuous_across_kink():
    prof = PiecewiseRamp(0.5, 2.0, 0.3, 1.2)
    lo = ab_phase_averaged(prof, 1.0, 1.2 - 5e-7).phase
    hi = ab_phase_averaged(prof, 1.0, 1.2 + 5e-7).phase
    assert abs(hi - lo) <= 1e-5 * PI * 2.0


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_nonpositive_t_f_rejected(bad):
    with pytest.raises(ValueError):
        ab_phase_averaged(Constant(1.0), 1.0, bad)
    with pytest.raises(ValueError):
        ab_phase_sinusoidal(1.0, 1.0, bad)


@pytest.mark.parametrize(
    "x, expected",
    [(PI, 0.0), (PI / 2, 2 / PI), (2 * PI, 0.0), (1.5 * PI, -2 / (3 * PI)), (1e-9, 1.0), (1e-5, 1.0)],
)
def test_sinusoidal_examples(x, expected):
    pred = ab_phase_sinusoidal(1.0, x, 1.0)
    assert pred.method == SINUSOIDAL
    assert pred.phase == pytest.approx(expected, abs=1e-9)


def test_sinusoidal_static_limit():
    assert ab_phase_sinusoidal(3.0, 0.0, 2.0, e=2.0).phase == 6.0


@given(B0=st.floats(-3, 3), Omega=st.floats(0.0, 20.0), t_f=st.floats(1e-3, 10.0), R=st.floats(0.1, 3.0))
@settings(max_examples=100, deadline=None)
def test_sinusoidal_specialization(B0, Omega, t_f, R):
    avg = ab_phase_averaged(Sinusoidal(B0, Omega), R, t_f).phase
    sin = ab_phase_sinusoidal(PI * R**2 * B0, Omega, t_f).phase
    assert avg == pytest.approx(sin, abs=1e-12 * (1 + abs(sin)))


@pytest.mark.parametrize("omega", [0.3, 1.0, 2.0, 7.0])
def test_routes_agree(profile, omega):
    field = SolenoidField(1.0, profile)
    c1, c2 = arms(omega)
    two = ab_phase_two_path(field, c1, c2).phase
    avg = ab_phase_averaged(profile, 1.0, PI / omega).phase
    assert two == pytest.approx(avg, abs=1e-9 * (1 + abs(avg)))


@pytest.mark.parametrize("omega", [0.1, 1.0, 10.0])
def test_constant_flux_independent_of_schedule(omega):
    field = SolenoidField(1.0, Constant(2.0))
    upper = MonotoneMap(lambda p: (p + 0.5 * np.sin(p)) / omega, lambda p: (1 + 0.5 * np.cos(p)) / omega, (0.0, PI))
    lower = MonotoneMap(lambda p: -(p + 0.5 * np.sin(p)) / omega, lambda p: -(1 + 0.5 * np.cos(p)) / omega, (-PI, 0.0))
    c1 = make_arc_path(2.0, 0.0, PI, upper)
    c2 = make_arc_path(2.0, 0.0, -PI, lower)
    uniform = ab_phase_two_path(field, *arms(omega)).phase
    assert ab_phase_two_path(field, c1, c2).phase == pytest.approx(uniform, abs=1e-9)


def test_to_dict():
    d = ab_phase_averaged(Constant(1.0), 1.0, 1.0).to_dict()
    assert set(d) == {"phase", "method", "error_estimate", "converged", "inputs"}
    assert d["inputs"]["profile"]["kind"]
