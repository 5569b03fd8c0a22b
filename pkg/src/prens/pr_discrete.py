"""Physical realizability of a discrete pure-state ensemble.

An ensemble is realizable when the generator moves each member only into
mixtures of other members at nonnegative rates, ``L P_k = sum_j g_kj (P_j - P_k)``,
and the ensemble weights are stationary for the classical chain those rates
define. Both conditions are solved together as one nonnegative least-squares
problem over the rates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .ensemble import check_represents
from .errors import InvalidInput
from .lindblad import apply_lindbladian, propagator
from .numerics import nnls_feasibility

PR = "PR"
NOT_PR = "NOT_PR"
NOT_REPRESENTING = "NOT_REPRESENTING"


@dataclass(frozen=True)
class RateMatrix:
    """Jump rates ``rates[k, j]`` from member k to member j; zero diagonal."""

    rates: np.ndarray

    def __post_init__(self):
        g = np.array(self.rates, dtype=float)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise InvalidInput("rate matrix must be square")
        if not np.all(np.isfinite(g)):
            raise InvalidInput("rates must be finite")
        np.fill_diagonal(g, 0.0)
        if np.any(g < 0):
            raise InvalidInput("rates must be nonnegative")
        g.setflags(write=False)
        object.__setattr__(self, "rates", g)

    @property
    def size(self):
        return self.rates.shape[0]

    def exit_rates(self):
        return self.rates.sum(axis=1)


@dataclass(frozen=True)
class TransitionMatrix:
    """Column-stochastic ``entries[j, k]``: probability of k -> j over ``tau``."""

    entries: np.ndarray
    tau: float

    def __post_init__(self):
        W = np.asarray(self.entries, dtype=float)
        if np.any(W < -1e-10) or np.any(np.abs(W.sum(axis=0) - 1) > 1e-8):
            raise InvalidInput("transition matrix is not column-stochastic")
        object.__setattr__(self, "entries", W)


@dataclass(frozen=True)
class PRVerdict:
    decision: str
    representation_distance: float
    feasibility_residual: float = float("nan")
    stationarity_residual: float = float("nan")
    joint_residual: float = float("nan")
    certificate: RateMatrix | None = None
    excluded_members: tuple = ()
    notes: list = field(default_factory=list)

    def to_dict(self):
        def num(x):
            return None if np.isnan(x) else float(x)

        out = {
            "decision": self.decision,
            "representation_distance": float(self.representation_distance),
            "feasibility_residual": num(self.feasibility_residual),
            "stationarity_residual": num(self.stationarity_residual),
            "joint_residual": num(self.joint_residual),
            "certificate": None if self.certificate is None else self.certificate.rates.tolist(),
            "max_rate": None if self.certificate is None else float(self.certificate.rates.max(initial=0.0)),
            "excluded_members": list(self.excluded_members),
            "notes": list(self.notes),
        }
        return out


def hvec(H):
    """Isometric real vectorisation of a Hermitian matrix.

    Diagonal entries, then sqrt(2)-scaled real and imaginary parts of the
    upper triangle, so the Euclidean norm equals the Frobenius norm.
    """
    H = np.asarray(H, dtype=complex)
    iu = np.triu_indices(H.shape[0], k=1)
    up = H[iu]
    r2 = np.sqrt(2.0)
    return np.concatenate([H.diagonal().real, r2 * up.real, r2 * up.imag])


def _pairs(K):
    return [(k, j) for k in range(K) for j in range(K) if j != k]


def _generator_block(projectors, images, k):
    """Columns hvec(P_j - P_k), j != k, and target hvec(L P_k)."""
    Pk = projectors[k]
    cols = [hvec(Pj - Pk) for j, Pj in enumerate(projectors) if j != k]
    return np.column_stack(cols), hvec(images[k])


def _member_residuals(projectors, images, gamma):
    res = []
    for k, Pk in enumerate(projectors):
        recon = sum(gamma[k, j] * (Pj - Pk) for j, Pj in enumerate(projectors) if j != k)
        target = images[k]
        res.append(np.linalg.norm(target - recon) / (1 + np.linalg.norm(target)))
    return np.array(res)


class JumpRates(NamedTuple):
    rates: RateMatrix
    residual: float
    feasible: bool


def jump_rates(L, E, tol=1e-8):
    """Per-member nonnegative rates reproducing the generator's action on each member."""
    projectors = E.projectors
    images = [apply_lindbladian(L, P) for P in projectors]
    K = len(E)
    if K == 1:
        r = float(np.linalg.norm(images[0]))
        return JumpRates(RateMatrix(np.zeros((1, 1))), r, r <= tol)
    gamma = np.zeros((K, K))
    for k in range(K):
        A, b = _generator_block(projectors, images, k)
        sol = nnls_feasibility(A, b, tol)
        gamma[k, [j for j in range(K) if j != k]] = sol.x
    residual = float(np.max(_member_residuals(projectors, images, gamma)))
    return JumpRates(RateMatrix(gamma), residual, residual <= tol)


def stationarity_residual(gamma, weights):
    """Largest imbalance between probability inflow and outflow over members."""
    g = gamma.rates if isinstance(gamma, RateMatrix) else np.asarray(gamma, dtype=float)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if g.shape != (w.size, w.size):
        raise InvalidInput(f"rates are {g.shape} but there are {w.size} weights")
    g = g - np.diag(g.diagonal())
    inflow = w @ g
    outflow = w * g.sum(axis=1)
    return float(np.max(np.abs(inflow - outflow)))


def _joint_system(projectors, images, weights, excluded, balance=1.0):
    K = len(projectors)
    pairs = _pairs(K)
    col = {p: i for i, p in enumerate(pairs)}
    blocks, targets = [], []
    for k in range(K):
        if k in excluded:
            continue
        A_k, b_k = _generator_block(projectors, images, k)
        full = np.zeros((A_k.shape[0], len(pairs)))
        full[:, [col[(k, j)] for j in range(K) if j != k]] = A_k
        blocks.append(full)
        targets.append(b_k)
    stat = np.zeros((K, len(pairs)))
    for (k, j), i in col.items():
        stat[j, i] += weights[k]
        stat[k, i] -= weights[k]
    blocks.append(balance * stat)
    targets.append(np.zeros(K))
    return np.vstack(blocks), np.concatenate(targets), pairs


def check_pr_discrete(L, E, rho_ss, tol=1e-8, representation_tol=1e-8, exclude=()):
    """Decide realizability of ``E`` as a stationary ensemble of ``L``.

    ``exclude`` lists member indices whose generator constraints are left out
    of the solve (used for states at a Fock truncation edge); they are
    reported in the verdict.
    """
    rep = check_represents(E, rho_ss, representation_tol)
    if not rep.represents:
        return PRVerdict(NOT_REPRESENTING, rep.distance)
    projectors = E.projectors
    images = [apply_lindbladian(L, P) for P in projectors]
    K = len(E)
    excluded = tuple(sorted(set(int(k) for k in exclude)))
    if any(k < 0 or k >= K for k in excluded):
        raise InvalidInput("excluded member index out of range")
    notes = []
    if excluded:
        notes.append(f"generator constraints of members {list(excluded)} excluded (truncation edge)")
    if K == 1:
        r = float(np.linalg.norm(images[0]))
        decision = PR if r <= tol else NOT_PR
        return PRVerdict(decision, rep.distance, r, 0.0, r,
                         RateMatrix(np.zeros((1, 1))) if decision == PR else None, excluded, notes)
    A, b, pairs = _joint_system(projectors, images, E.weights, excluded)
    # unit-norm columns: rates seen only through tiny weights would otherwise
    # fall below the active-set gradient threshold and stay at zero
    scale = np.linalg.norm(A, axis=0)
    scale[scale == 0] = 1.0
    sol = nnls_feasibility(A / scale, b, tol)
    if sol.hit_iteration_cap:
        notes.append("NNLS stopped at its iteration cap")
    gamma = np.zeros((K, K))
    for (k, j), x in zip(pairs, sol.x / scale):
        gamma[k, j] = x
    joint = sol.residual / (1 + float(np.linalg.norm(b)))
    member = _member_residuals(projectors, images, gamma)
    kept = [k for k in range(K) if k not in excluded]
    feas = float(np.max(member[kept])) if kept else 0.0
    stat = stationarity_residual(gamma, E.weights)
    ok = sol.feasible and max(joint, feas, stat) <= tol
    return PRVerdict(
        PR if ok else NOT_PR,
        rep.distance,
        feas,
        stat,
        joint,
        RateMatrix(gamma),
        excluded,
        notes,
    )


def reconstruct_generator_images(E, gamma):
    """``sum_j g_kj (P_j - P_k)`` for each member k."""
    g = gamma.rates
    P = E.projectors
    return [sum(g[k, j] * (P[j] - P[k]) for j in range(len(P)) if j != k) for k in range(len(P))]


def finite_time_transition(L, E, gamma, tau):
    """First-order transition matrix from the rates, and its mismatch with ``exp(L tau)``."""
    g = gamma.rates
    if g.shape[0] != len(E):
        raise InvalidInput("rate matrix does not match the ensemble size")
    if not tau > 0 or tau * float(np.max(g.sum(axis=1), initial=0.0)) > 0.1:
        raise InvalidInput("need tau > 0 and tau * max exit rate <= 0.1")
    W = np.eye(len(E)) - np.diag(g.sum(axis=1)) * tau + g.T * tau
    T = propagator(L, tau)
    d = E.dim
    P = E.projectors
    worst = 0.0
    for k, Pk in enumerate(P):
        evolved = (T @ Pk.reshape(-1)).reshape(d, d)
        mix = sum(W[j, k] * P[j] for j in range(len(P)))
        worst = max(worst, float(np.linalg.norm(evolved - mix)))
    return TransitionMatrix(W, tau), worst
