"""Pure-state ensembles and the test that they represent a given state."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidInput
from .numerics import herm_eigvals


@dataclass(frozen=True)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if a.size == 0 or not np.all(np.isfinite(a)):
            raise InvalidInput("state amplitudes must be a non-empty finite vector")
        if abs(np.linalg.norm(a) - 1.0) > 1e-10:
            raise InvalidInput(f"state norm {np.linalg.norm(a):.12g} is not 1")
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def normalized(cls, vec):
        v = np.asarray(vec, dtype=complex).reshape(-1)
        n = np.linalg.norm(v)
        if n == 0:
            raise InvalidInput("cannot normalise the zero vector")
        return cls(v / n)

    @property
    def dim(self):
        return self.amplitudes.size

    @property
    def projector(self):
        a = self.amplitudes
        return np.outer(a, a.conj())


def projector_distance(a, b):
    """Trace distance between the projectors of two pure states."""
    overlap = abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2
    return float(np.sqrt(max(0.0, 1.0 - overlap)))


@dataclass(frozen=True)
class DiscreteEnsemble:
    states: tuple
    weights: np.ndarray

    def __post_init__(self):
        states = tuple(s if isinstance(s, PureState) else PureState(s) for s in self.states)
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if not states:
            raise InvalidInput("ensemble needs at least one state")
        if w.size != len(states):
            raise InvalidInput(f"{len(states)} states but {w.size} weights")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InvalidInput("weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > 1e-10:
            raise InvalidInput(f"weights sum to {w.sum():.12g}, not 1")
        d = states[0].dim
        if any(s.dim != d for s in states):
            raise InvalidInput("all states must share one dimension")
        for i in range(len(states)):
            for j in range(i + 1, len(states)):
                if projector_distance(states[i], states[j]) <= 1e-8:
                    raise InvalidInput(f"states {i} and {j} coincide")
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.states)

    @property
    def dim(self):
        return self.states[0].dim

    @property
    def projectors(self):
        return [s.projector for s in self.states]


def ensemble_density(E):
    rho = sum(w * P for w, P in zip(E.weights, E.projectors))
    return 0.5 * (rho + rho.conj().T)


def trace_distance(A, B):
    diff = np.asarray(A, dtype=complex) - np.asarray(B, dtype=complex)
    return 0.5 * float(np.sum(np.abs(herm_eigvals(diff))))


class Representation(NamedTuple):
    represents: bool
    distance: float


def check_represents(E, rho_ss, tol=1e-8):
    rho_ss = np.asarray(rho_ss, dtype=complex)
    if rho_ss.shape != (E.dim, E.dim):
        raise InvalidInput(f"state is {rho_ss.shape}, ensemble lives in dimension {E.dim}")
    dist = trace_distance(ensemble_density(E), rho_ss)
    return Representation(dist <= tol, dist)
