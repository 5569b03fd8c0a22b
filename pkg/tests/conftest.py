import math

import numpy as np
import pytest

from prens.ensemble import DiscreteEnsemble, PureState
from prens.models import TwoLevelParams, two_level_thermal

G = np.array([1.0, 0.0])
E = np.array([0.0, 1.0])
PLUS = np.array([1.0, 1.0]) / math.sqrt(2)
MINUS = np.array([1.0, -1.0]) / math.sqrt(2)


def proj(v):
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


def energy_ensemble(up, down):
    return DiscreteEnsemble((PureState(G), PureState(E)), np.array([down, up]) / (up + down))


def plus_minus_ensemble():
    return DiscreteEnsemble((PureState(PLUS), PureState(MINUS)), [0.5, 0.5])


@pytest.fixture
def thermal():
    """gamma_up = 1, gamma_down = 2."""
    return two_level_thermal(TwoLevelParams(gamma_up=1.0, gamma_down=2.0))


@pytest.fixture
def infinite_temperature():
    return two_level_thermal(TwoLevelParams(gamma_up=1.0, gamma_down=1.0))


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
