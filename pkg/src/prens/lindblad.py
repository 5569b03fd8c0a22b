"""Markovian generators, their steady states and finite-time propagation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, NonUniqueSteadyState, NumericalFailure
from .numerics import as_square, expm, herm_eigvals


@dataclass(frozen=True)
class Lindbladian:
    """Generator ``-i[H, rho] + sum_c (c rho c^+ - {c^+ c, rho}/2)``.

    Rates are absorbed into the jump operators (``c = sqrt(rate) * op``) and
    hbar into the Hamiltonian, which is therefore in units of rate.
    """

    hamiltonian: np.ndarray
    jumps: tuple = field(default_factory=tuple)

    def __post_init__(self):
        H = as_square(self.hamiltonian, dtype=complex, name="hamiltonian")
        scale = max(1.0, float(np.max(np.abs(H))))
        if np.max(np.abs(H - H.conj().T)) > 1e-12 * scale:
            raise InvalidInput("hamiltonian is not Hermitian")
        jumps = []
        for i, c in enumerate(self.jumps):
            c = as_square(c, dtype=complex, name=f"jump {i}")
            if c.shape != H.shape:
                raise InvalidInput(f"jump {i} has shape {c.shape}, expected {H.shape}")
            jumps.append(c)
        object.__setattr__(self, "hamiltonian", H)
        object.__setattr__(self, "jumps", tuple(jumps))

    @property
    def dim(self):
        return self.hamiltonian.shape[0]

    def scaled(self, s):
        """Same generator with every rate multiplied by ``s``."""
        return Lindbladian(s * self.hamiltonian, tuple(np.sqrt(s) * c for c in self.jumps))


def _check_operand(L, rho):
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (L.dim, L.dim):
        raise InvalidInput(f"operand has shape {rho.shape}, generator acts on {L.dim}x{L.dim}")
    return rho


def apply_lindbladian(L, rho):
    rho = _check_operand(L, rho)
    H = L.hamiltonian
    out = -1j * (H @ rho - rho @ H)
    for c in L.jumps:
        cd = c.conj().T
        cdc = cd @ c
        out += c @ rho @ cd - 0.5 * (cdc @ rho + rho @ cdc)
    return out


def superoperator_matrix(L):
    """Matrix of the generator acting on row-major ``vec(rho)``.

    Uses ``vec(A X B) = (A kron B^T) vec(X)``.
    """
    d = L.dim
    ident = np.eye(d)
    H = L.hamiltonian
    S = -1j * (np.kron(H, ident) - np.kron(ident, H.T))
    for c in L.jumps:
        cdc = c.conj().T @ c
        S += np.kron(c, c.conj()) - 0.5 * (np.kron(cdc, ident) + np.kron(ident, cdc.T))
    return S


def _normalize_density(X):
    X = 0.5 * (X + X.conj().T)
    tr = np.trace(X).real
    if abs(tr) < 1e-300:
        raise NumericalFailure("kernel vector has zero trace")
    return X / tr


def steady_state(L, tol=1e-8):
    """Unique density matrix annihilated by the generator.

    The kernel is read off the smallest right singular vector of the
    superoperator. Raises NonUniqueSteadyState when the second-smallest
    singular value does not exceed ``10 * tol``.
    """
    d = L.dim
    S = superoperator_matrix(L)
    _, sv, vh = np.linalg.svd(S)
    if d > 1 and sv[-2] <= 10 * tol:
        raise NonUniqueSteadyState(
            f"second-smallest singular value {sv[-2]:.3e} is not above {10 * tol:.1e}"
        )
    rho = _normalize_density(vh[-1].conj().reshape(d, d))
    residual = float(np.linalg.norm(apply_lindbladian(L, rho)))
    if residual > tol:
        raise NumericalFailure(f"steady-state residual {residual:.3e} exceeds {tol:g}")
    if herm_eigvals(rho)[0] < -1e-8:
        raise NumericalFailure("steady state is not positive semidefinite")
    return rho


def propagator(L, tau):
    """``exp(L tau)`` as a d^2 x d^2 matrix on row-major vectorised operators."""
    if tau < 0:
        raise InvalidInput("tau must be nonnegative")
    return expm(superoperator_matrix(L) * tau)


def propagate(L, rho, tau):
    rho = _check_operand(L, rho)
    if tau < 0:
        raise InvalidInput("tau must be nonnegative")
    if tau == 0:
        return rho.copy()
    d = L.dim
    out = (propagator(L, tau) @ rho.reshape(-1)).reshape(d, d)
    return 0.5 * (out + out.conj().T)
