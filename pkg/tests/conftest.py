import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from exnerdg.model import State, SveParams

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", deadline=None, max_examples=1000)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def params():
    return SveParams()


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def random_states(rng, n, h=(0.1, 10.0), v=3.0, b=2.0):
    hh = rng.uniform(*h, n)
    vv = rng.uniform(-v, v, n)
    bb = rng.uniform(-b, b, n)
    return [State(hh[i], hh[i] * vv[i], bb[i]) for i in range(n)]


heights = st.floats(0.1, 10.0)
velocities = st.floats(-3.0, 3.0)
beds = st.floats(-2.0, 2.0)


@st.composite
def states(draw):
    h = draw(heights)
    return State(h, h * draw(velocities), draw(beds))


# -- acceptance report ---------------------------------------------------------

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """``acceptance(n, ok, detail)`` records the PASS/FAIL line of criterion n."""

    def record(n, ok, detail):
        line = f"ACCEPTANCE {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[n] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
