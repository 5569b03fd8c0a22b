"""Realizability of uniform Gaussian ensembles under linear (Ornstein-Uhlenbeck) dynamics.

A uniform Gaussian ensemble is fixed by the common member covariance ``V``.
It is realizable when the excess diffusion ``B_V = D - K V - V K^T`` left
for the member means is positive semidefinite; when ``K`` is stable the
stationary spread of the means is ``U = V_ss - V``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput, SingularDynamics
from .numerics import as_square, as_symmetric, is_hurwitz, lyapunov_solve, psd_min_eig

PR = "PR"
NOT_PR = "NOT_PR"


@dataclass(frozen=True)
class LinearDynamics:
    """Drift ``K`` and diffusion ``D`` on a 2n-dimensional phase space."""

    K: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        K = as_square(self.K, name="K")
        D = as_symmetric(self.D)
        if K.shape != D.shape:
            raise InvalidInput(f"K is {K.shape} but D is {D.shape}")
        if K.shape[0] % 2:
            raise InvalidInput("phase-space dimension must be even")
        if not psd_min_eig(D, 1e-10)[0]:
            raise InvalidInput("D is not positive semidefinite")
        object.__setattr__(self, "K", K)
        object.__setattr__(self, "D", D)

    @property
    def dim(self):
        return self.K.shape[0]


@dataclass(frozen=True)
class GaussianPRReport:
    B_V: np.ndarray
    min_eig_B: float
    decision: str
    V_ss: np.ndarray | None = None
    U: np.ndarray | None = None
    representable: bool | None = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        def arr(a):
            return None if a is None else np.asarray(a).tolist()

        return {
            "decision": self.decision,
            "min_eig_B": self.min_eig_B,
            "B_V": arr(self.B_V),
            "V_ss": arr(self.V_ss),
            "U": arr(self.U),
            "representable": self.representable,
            "notes": list(self.notes),
        }


def _covariance(dyn, V):
    V = as_symmetric(V)
    if V.shape != dyn.K.shape:
        raise InvalidInput(f"V is {V.shape}, dynamics are {dyn.K.shape}")
    return V


def excess_diffusion(dyn, V):
    V = _covariance(dyn, V)
    K = dyn.K
    B = dyn.D - K @ V - V @ K.T
    return 0.5 * (B + B.T)


def _is_pure(V, tol=1e-8):
    n = V.shape[0] // 2
    return all(abs(np.linalg.det(V[2 * i:2 * i + 2, 2 * i:2 * i + 2]) - 1.0) <= tol for i in range(n))


def weight_covariance(dyn, V):
    """Stationary covariance ``U = V_ss - V`` of the ensemble means.

    Also checked against its Lyapunov form ``K U + U K^T = B_V``.
    """
    V = _covariance(dyn, V)
    V_ss = lyapunov_solve(dyn.K, dyn.D)
    U = V_ss - V
    B = excess_diffusion(dyn, V)
    K = dyn.K
    err = np.linalg.norm(K @ U + U @ K.T - B)
    if err > 1e-9 * (1 + np.linalg.norm(B)):
        raise SingularDynamics(f"Lyapunov consistency failed (residual {err:.2e}); K is ill-conditioned")
    return U


def check_pr_gaussian(dyn, V, tol=1e-10):
    B = excess_diffusion(dyn, V)
    V = _covariance(dyn, V)
    ok, min_eig = psd_min_eig(B, tol)
    notes = []
    if _is_pure(V):
        notes.append("V describes pure Gaussian members (det = 1 per mode)")
    else:
        notes.append("V does not saturate det = 1 per mode; members are mixed")
    report = dict(B_V=B, min_eig_B=min_eig, decision=PR if ok else NOT_PR)
    if is_hurwitz(dyn.K):
        V_ss = lyapunov_solve(dyn.K, dyn.D)
        U = V_ss - V
        report.update(V_ss=V_ss, U=U, representable=psd_min_eig(U, tol)[0])
        if not report["representable"]:
            notes.append("V_ss - V is not PSD: no Gaussian weight distribution represents the steady state")
    else:
        notes.append("K is not Hurwitz: no stationary weight distribution, only B_V was tested")
        if ok:
            notes.append("necessary condition satisfied")
    return GaussianPRReport(notes=notes, **report)


def ou_step_distribution(dyn, V, mu, dt):
    """Mean and covariance of the member displacement after a short step ``dt``."""
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if mu.size != dyn.dim:
        raise InvalidInput(f"mean has length {mu.size}, expected {dyn.dim}")
    if not dt > 0 or dt * np.linalg.norm(dyn.K, 2) > 0.1:
        raise InvalidInput("dt must be positive with dt * ||K|| <= 0.1")
    B = excess_diffusion(dyn, V)
    return mu - dyn.K @ mu * dt, B * dt
