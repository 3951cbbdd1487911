import numpy as np
import pytest

from contact_thermo.thermo import IdealGasParams, energy_fundamental


@pytest.fixture
def params():
    return IdealGasParams()


@pytest.fixture
def r0(params):
    """Reference state (S, V, N) = (0, 1, 1) with A = 1, C = 3/2."""
    return energy_fundamental(0.0, 1.0, 1.0, params)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
