import sys
import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("ffl", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("ffl")


@pytest.fixture
def rng():
    return np.random.default_rng(20261015)


def opnorm(x):
    """Spectral norm from LAPACK, used as an independent yardstick."""
    return float(np.linalg.norm(x, 2))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.pytest_terminal_lines():
        terminalreporter.write_line(line)
