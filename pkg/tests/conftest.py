import math

import numpy as np
import pytest
from hypothesis import strategies as st

from rank1_limits.fixtures import fixture
from rank1_limits.moebius import BoundaryPoint, Moebius

# property suites run at least 10^3 cases with derandomized generation
PROPERTY_CASES = 1000

small = st.floats(-2.0, 2.0, allow_nan=False, allow_infinity=False)


@st.composite
def moebius_maps(draw):
    # |a| >= 0.3 and d solved from ad - bc = 1, so no rejection is needed
    mod = draw(st.floats(0.3, 3.0))
    arg = draw(st.floats(-math.pi, math.pi))
    a = complex(mod * math.cos(arg), mod * math.sin(arg))
    b, c = (complex(draw(small), draw(small)) for _ in range(2))
    return Moebius(a, b, c, (1 + b * c) / a)


@st.composite
def boundary_points(draw):
    theta = draw(st.floats(0.0, math.pi))
    phi = draw(st.floats(0.0, 2 * math.pi))
    return BoundaryPoint(math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))


def entry_error(f: Moebius, g: Moebius) -> float:
    """Entrywise distance in PSL(2, C), i.e. up to overall sign."""
    x, y = f.to_array(), g.to_array()
    return float(min(np.abs(x - y).max(), np.abs(x + y).max()))


@pytest.fixture(scope="session")
def schottky():
    return fixture("schottky")


@pytest.fixture(scope="session")
def cusped():
    return fixture("cusped_schottky")


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
