import math

import numpy as np
import pytest

from prens.ensemble import (
    DiscreteEnsemble,
    PureState,
    check_represents,
    ensemble_density,
    trace_distance,
)
from prens.errors import InvalidInput
from prens.lindblad import steady_state
from prens.models import TwoLevelParams, coherent_phase_ensemble, poisson_weights, two_level_thermal

from .conftest import G, energy_ensemble, plus_minus_ensemble, proj


def test_single_state():
    E = DiscreteEnsemble((PureState(G),), [1.0])
    np.testing.assert_array_equal(ensemble_density(E), proj(G))


def test_plus_minus_is_maximally_mixed():
    np.testing.assert_allclose(ensemble_density(plus_minus_ensemble()), np.eye(2) / 2, atol=1e-15)


def test_coherent_phase_mixture_is_poisson():
    E = coherent_phase_ensemble(2.0, 24, 21)
    assert trace_distance(ensemble_density(E), np.diag(poisson_weights(2.0, 21))) <= 1e-6


def test_spectral_ensemble_represents():
    rho = np.array([[0.7, 0.2j], [-0.2j, 0.3]])
    w, v = np.linalg.eigh(rho)
    E = DiscreteEnsemble(tuple(PureState(v[:, i]) for i in range(2)), w)
    ok, dist = check_represents(E, rho)
    assert ok and dist <= 1e-14


def test_energy_ensemble_represents_thermal(thermal):
    ok, _ = check_represents(energy_ensemble(1.0, 2.0), steady_state(thermal))
    assert ok


@pytest.mark.parametrize("up, down", [(1.0, 2.0), (3.0, 0.5)])
def test_plus_minus_does_not_represent_thermal(up, down):
    rho = steady_state(two_level_thermal(TwoLevelParams(up, down)))
    ok, dist = check_represents(plus_minus_ensemble(), rho)
    assert not ok
    assert dist == pytest.approx(0.5 * abs(down - up) / (up + down), abs=1e-12)


def test_dimension_mismatch():
    with pytest.raises(InvalidInput):
        check_represents(plus_minus_ensemble(), np.eye(3) / 3)


@pytest.mark.parametrize(
    "states, weights",
    [
        ((G, G), [0.5, 0.5]),
        ((G, np.array([0.0, 1.0])), [0.6, 0.3]),
        ((G, np.array([0.0, 1.0])), [1.2, -0.2]),
        ((np.array([1.0, 1.0]),), [1.0]),
    ],
)
def test_invalid_ensembles(states, weights):
    with pytest.raises(InvalidInput):
        DiscreteEnsemble(tuple(PureState(s) if np.isclose(np.linalg.norm(s), 1) else s for s in states), weights)


def test_global_phase_duplicate_rejected():
    with pytest.raises(InvalidInput):
        DiscreteEnsemble((PureState(G), PureState(1j * G)), [0.5, 0.5])


def test_trace_distance_orthogonal_states():
    assert trace_distance(proj(G), proj([0, 1])) == pytest.approx(1.0)
    assert math.isclose(trace_distance(proj(G), proj(G)), 0.0, abs_tol=1e-15)
