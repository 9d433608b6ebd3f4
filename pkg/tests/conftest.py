import numpy as np
import pytest
from hypothesis import settings, strategies as st

from flapfin.kinematics import LOWER_BOUNDS, UPPER_BOUNDS, TrajectoryParams

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@st.composite
def valid_params(draw, min_thickness=0.5):
    """Trajectory parameters inside the box, with a non-flat path."""
    lo = LOWER_BOUNDS.copy()
    lo[1] = max(lo[1], min_thickness)
    vals = [draw(st.floats(float(a), float(b), allow_nan=False)) for a, b in zip(lo, UPPER_BOUNDS)]
    return TrajectoryParams.from_array(vals)


def random_params(rng, n, min_thickness=0.5):
    lo = LOWER_BOUNDS.copy()
    lo[1] = max(lo[1], min_thickness)
    return [TrajectoryParams.from_array(rng.uniform(lo, UPPER_BOUNDS)) for _ in range(n)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from checks import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
