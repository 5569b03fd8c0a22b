"""Preset systems: the atom laser (Fock and linearised), the thermal two-level atom.

Also carries the state and ensemble constructors used with them and the
interaction-strength formula for the condensate.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .ensemble import DiscreteEnsemble, PureState
from .errors import InvalidInput, Unsupported
from .lindblad import Lindbladian
from .pr_gaussian import LinearDynamics


@dataclass(frozen=True)
class AtomLaserParams:
    """Atom-laser knobs.

    ``mu`` is the scalar mean occupation. ``nu`` only enters the linearised
    model; the Fock model and the Gaussian model treat it as independent.
    """

    mu: float = 1.0
    kappa: float = 1.0
    chi: float = 0.0
    nu: float = 0.0
    nmax: int | None = None

    def __post_init__(self):
        if not self.mu > 0 or not self.kappa > 0:
            raise InvalidInput("mu and kappa must be positive")
        if self.chi < 0 or self.nu < 0:
            raise InvalidInput("chi and nu must be nonnegative")
        if self.nmax is not None and self.nmax < 1:
            raise InvalidInput("nmax must be at least 1")

    @property
    def truncation(self):
        if self.nmax is not None:
            return int(self.nmax)
        return default_nmax(self.mu)


def default_nmax(mu):
    return int(math.ceil(mu + 8 * math.sqrt(mu)))


@dataclass(frozen=True)
class TwoLevelParams:
    gamma_up: float = 0.0
    gamma_down: float = 1.0

    def __post_init__(self):
        if self.gamma_up < 0 or self.gamma_down <= 0:
            raise InvalidInput("need gamma_up >= 0 and gamma_down > 0")


@dataclass(frozen=True)
class ChiPhysicalParams:
    a_s: float
    m: float
    hbar: float
    kappa: float
    mu: float
    density_integral: float

    def __post_init__(self):
        for name in ("m", "hbar", "kappa", "mu", "density_integral"):
            if not getattr(self, name) > 0:
                raise InvalidInput(f"{name} must be positive")


def atom_laser_linearized(p):
    """Drift and diffusion of the amplitude/phase quadratures, plus ``V = I``.

    ``V = I`` is the coherent-state covariance with hbar = 2.
    """
    k = p.kappa
    K = k * np.array([[1.0, 0.0], [p.chi, 0.0]])
    D = k * np.array([[2.0, 0.0], [0.0, 2.0 + p.nu]])
    return LinearDynamics(K, D), np.eye(2)


def annihilation(d):
    return np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1)


def isometric_raising(d):
    """``sum_n |n+1><n|`` truncated to ``d`` levels."""
    return np.diag(np.ones(d - 1), k=-1)


def atom_laser_fock(p):
    """Ideal-laser gain and loss with the ``a^+2 a^2`` condensate interaction.

    Gain is ``sqrt(kappa mu) E+`` with the isometric raising operator ``E+``,
    so populations follow a birth-death chain with birth ``kappa mu`` and
    death ``kappa n``.
    """
    if p.nu != 0:
        raise Unsupported("excess phase diffusion is only available in the linearised model")
    nmax = p.truncation
    if nmax < math.ceil(p.mu + 6 * math.sqrt(p.mu)):
        warnings.warn(f"nmax={nmax} is small for mu={p.mu}; truncation error may be visible")
    tail = 1.0 - sum(math.exp(-p.mu) * p.mu ** n / math.factorial(n) for n in range(nmax + 1))
    if tail > 1e-10:
        warnings.warn(f"Poisson tail mass beyond nmax={nmax} is {tail:.2e}")
    d = nmax + 1
    a = annihilation(d)
    n = np.arange(d, dtype=float)
    H = np.diag(p.kappa * p.chi / (4 * p.mu) * n * (n - 1))
    jumps = (math.sqrt(p.kappa * p.mu) * isometric_raising(d), math.sqrt(p.kappa) * a)
    return Lindbladian(H, jumps)


def two_level_thermal(p):
    """Thermal atom in the ordered basis (g, e); H = 0."""
    lower = np.array([[0.0, 1.0], [0.0, 0.0]])
    jumps = (math.sqrt(p.gamma_down) * lower, math.sqrt(p.gamma_up) * lower.T)
    return Lindbladian(np.zeros((2, 2)), jumps)


def coherent_state(alpha, d):
    """Truncated coherent state, amplitudes proportional to alpha^n / sqrt(n!)."""
    if d < 1:
        raise InvalidInput("dimension must be positive")
    if abs(alpha) ** 2 > d / 4:
        warnings.warn(f"|alpha|^2={abs(alpha) ** 2:.3g} is large for d={d}")
    amps = np.empty(d, dtype=complex)
    amps[0] = 1.0
    for n in range(1, d):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    return PureState.normalized(amps)


def coherent_phase_ensemble(mu, M=24, d=None):
    """``M`` equally weighted coherent states of amplitude sqrt(mu) on a uniform phase grid."""
    if M < 2:
        raise InvalidInput("need at least two phases")
    if d is None:
        d = default_nmax(mu) + 1
    r = math.sqrt(mu)
    states = [coherent_state(r * np.exp(2j * np.pi * m / M), d) for m in range(M)]
    return DiscreteEnsemble(tuple(states), np.full(M, 1.0 / M))


def poisson_weights(mu, d):
    w = np.array([math.exp(-mu) * mu ** n / math.factorial(n) for n in range(d)])
    return w / w.sum()


def number_poisson_ensemble(mu, d):
    if d < 2:
        raise InvalidInput("need d >= 2")
    if mu < 0:
        raise InvalidInput("mu must be nonnegative")
    basis = np.eye(d, dtype=complex)
    return DiscreteEnsemble(tuple(PureState(b) for b in basis), poisson_weights(mu, d))


def fock_edge_members(E, d, width=2):
    """Indices of ensemble members equal to one of the top ``width`` number states.

    Their generator constraints are distorted by truncation and may be
    excluded from the discrete check.
    """
    out = []
    for k, s in enumerate(E.states):
        top = np.abs(s.amplitudes[d - width:]) ** 2
        if np.any(top > 1 - 1e-12):
            out.append(k)
    return tuple(out)


def chi_parameter(p):
    """Dimensionless interaction ``8 pi mu hbar a_s / (kappa m) * int |psi|^4``."""
    return 8 * math.pi * p.mu * p.hbar * p.a_s / (p.kappa * p.m) * p.density_integral
