import math

import pytest

from abstokes.fields import SolenoidField
from abstokes.flux import Constant, LinearRamp, PiecewiseRamp, Sinusoidal

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


MATRIX_PROFILES = {
    "constant": Constant(2.0),
    "linear_ramp": LinearRamp(1.0, 0.5),
    "piecewise_ramp": PiecewiseRamp(0.5, 2.0, 0.3, 1.2),
    "sinusoidal": Sinusoidal(1.0, 5.0),
}


@pytest.fixture(params=sorted(MATRIX_PROFILES))
def profile(request):
    return MATRIX_PROFILES[request.param]


@pytest.fixture
def unit_solenoid():
    return lambda prof: SolenoidField(1.0, prof)
