"""Dense matrix kernels used by the realizability checkers.

Everything here works on small dense numpy arrays: symmetric eigensolves by
cyclic Jacobi rotations, a PSD test, the Pade matrix exponential, a
Kronecker-form Lyapunov solver, Lawson-Hanson NNLS and a symmetric square
root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, NotPSD, SingularDynamics

SYMMETRY_TOL = 1e-12
HURWITZ_TOL = 1e-12


def _as_finite(a, name="matrix", dtype=float):
    arr = np.asarray(a, dtype=dtype)
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} has non-finite entries")
    return arr


def as_symmetric(S, tol=SYMMETRY_TOL):
    """Validate ``S`` as a finite real symmetric matrix and return it as float array."""
    S = _as_finite(S, "symmetric matrix")
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] == 0:
        raise InvalidInput(f"expected a non-empty square matrix, got shape {S.shape}")
    scale = max(float(np.max(np.abs(S))), 1.0) if S.size else 1.0
    if np.max(np.abs(S - S.T)) > tol * scale:
        raise InvalidInput("matrix is not symmetric within tolerance")
    return 0.5 * (S + S.T)


def as_square(M, dtype=float, name="matrix"):
    M = _as_finite(M, name, dtype=dtype)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise InvalidInput(f"{name} must be square, got shape {M.shape}")
    return M


def _jacobi(a, max_sweeps=60):
    """Cyclic Jacobi diagonalisation of a symmetric float array.

    Returns (eigenvalues, eigenvectors) with eigenvectors in columns, unsorted.
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return np.zeros(n), v
    eps = np.finfo(float).eps
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(a.diagonal()))
        if off <= eps * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q]
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap = a[p, :].copy()
                aq = a[q, :]
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q]
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    return a.diagonal().copy(), v


def sym_eigh(S):
    """Eigenpairs of a real symmetric matrix, eigenvalues ascending."""
    S = as_symmetric(S)
    w, v = _jacobi(S)
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def sym_eigvals(S):
    """Ascending eigenvalues of a real symmetric matrix."""
    return sym_eigh(S)[0]


def herm_eigvals(H):
    """Ascending eigenvalues of a complex Hermitian matrix.

    Uses the real embedding ``[[Re, -Im], [Im, Re]]`` whose spectrum is that of
    ``H`` with every eigenvalue doubled.
    """
    H = as_square(H, dtype=complex, name="Hermitian matrix")
    H = 0.5 * (H + H.conj().T)
    re, im = H.real, H.imag
    if not np.any(im):
        return sym_eigvals(re)
    big = np.block([[re, -im], [im, re]])
    return sym_eigvals(big)[::2]


def psd_min_eig(S, tol=1e-10):
    """Return ``(is_psd, min_eig)`` with ``is_psd`` true iff ``min_eig >= -tol``."""
    if tol < 0:
        raise InvalidInput("tol must be nonnegative")
    min_eig = float(sym_eigvals(S)[0])
    return min_eig >= -tol, min_eig


def _pade_coefficients(order):
    m = order
    f = math.factorial
    return [f(2 * m - k) * f(m) / (f(2 * m) * f(k) * f(m - k)) for k in range(m + 1)]


def expm(M, order=6):
    """Matrix exponential by scaling and squaring with a diagonal Pade approximant.

    The matrix is scaled by ``2**-s`` until its 1-norm is at most 0.5, the
    ``[order/order]`` Pade approximant is evaluated and the result squared
    ``s`` times.
    """
    M = np.asarray(M)
    dtype = complex if np.iscomplexobj(M) else float
    M = as_square(M, dtype=dtype)
    n = M.shape[0]
    norm = float(np.max(np.sum(np.abs(M), axis=0)))
    s = 0
    if norm > 0.5:
        s = int(math.ceil(math.log2(norm / 0.5)))
    X = M / (2.0 ** s)
    c = _pade_coefficients(order)
    ident = np.eye(n, dtype=dtype)
    even = c[0] * ident
    odd = np.zeros_like(ident)
    power = ident
    for k in range(1, order + 1):
        power = power @ X
        if k % 2 == 0:
            even = even + c[k] * power
        else:
            odd = odd + c[k] * power
    # N(X) = even + odd, D(X) = even - odd
    E = np.linalg.solve(even - odd, even + odd)
    for _ in range(s):
        E = E @ E
    return E


def is_hurwitz(K, tol=HURWITZ_TOL):
    """True when every eigenvalue of ``K`` has real part above ``tol``.

    Sign convention: the drift enters as ``-K mu``, so stability means
    positive real parts.
    """
    K = as_square(K)
    return bool(np.min(np.linalg.eigvals(K).real) > tol)


def lyapunov_solve(K, D):
    """Solve ``K V + V K^T = D`` for symmetric ``V``.

    Dense Kronecker formulation; intended for the small phase-space
    dimensions met in practice.
    """
    K = as_square(K, name="K")
    D = as_symmetric(D)
    n = K.shape[0]
    if D.shape != K.shape:
        raise InvalidInput(f"K is {K.shape} but D is {D.shape}")
    if not is_hurwitz(K):
        raise SingularDynamics("K has an eigenvalue with non-positive real part")
    ident = np.eye(n)
    # row-major vec(A X B) = (A kron B^T) vec(X)
    op = np.kron(K, ident) + np.kron(ident, K)
    V = np.linalg.solve(op, D.reshape(-1)).reshape(n, n)
    return 0.5 * (V + V.T)


@dataclass(frozen=True)
class NNLSResult:
    x: np.ndarray
    residual: float
    feasible: bool
    hit_iteration_cap: bool = False
    iterations: int = 0


def _lawson_hanson(A, b, maxiter):
    m, n = A.shape
    eps = np.finfo(float).eps
    lstol = 10 * eps * max(m, n) * max(1.0, float(np.max(np.abs(A)))) * max(1.0, float(np.max(np.abs(b))))
    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = A.T @ b
    it = 0
    capped = False

    def solve_passive():
        z = np.zeros(n)
        cols = np.flatnonzero(passive)
        if cols.size:
            z[cols] = np.linalg.lstsq(A[:, cols], b, rcond=None)[0]
        return z

    while not passive.all() and np.max(np.where(passive, -np.inf, w)) > lstol:
        if it >= maxiter:
            capped = True
            break
        j = int(np.argmax(np.where(passive, -np.inf, w)))
        passive[j] = True
        z = solve_passive()
        it += 1
        while np.any(z[passive] <= 0.0):
            if it >= maxiter:
                capped = True
                break
            it += 1
            bad = passive & (z <= 0.0)
            alpha = np.min(x[bad] / (x[bad] - z[bad]))
            x = x + alpha * (z - x)
            passive &= x > eps * max(1.0, float(np.max(np.abs(x))))
            x[~passive] = 0.0
            z = solve_passive()
        if capped:
            break
        x = z
        w = A.T @ (b - A @ x)
    return np.maximum(x, 0.0), it, capped


def nnls_feasibility(A, b, tol=1e-8):
    """Nonnegative least squares feasibility test for ``A x = b, x >= 0``.

    Lawson-Hanson active set, capped at ``10 n`` iterations. Tall systems are
    first compressed with a QR factorisation; the reported residual is always
    recomputed against the original ``A`` and ``b``.

    Returns
    -------
    NNLSResult
        ``feasible`` is ``residual <= tol * (1 + ||b||)``. ``hit_iteration_cap``
        flags a solve that stopped early and is then reported infeasible.
    """
    A = _as_finite(A, "A")
    b = _as_finite(b, "b").reshape(-1)
    if A.ndim != 2 or A.shape[0] == 0 or A.shape[1] == 0:
        raise InvalidInput(f"A must be a non-empty 2-D matrix, got shape {A.shape}")
    if A.shape[0] != b.shape[0]:
        raise InvalidInput(f"A has {A.shape[0]} rows but b has length {b.shape[0]}")
    if tol < 0:
        raise InvalidInput("tol must be nonnegative")
    m, n = A.shape
    if m > n:
        Q, R = np.linalg.qr(A, mode="reduced")
        As, bs = R, Q.T @ b
    else:
        As, bs = A, b
    x, it, capped = _lawson_hanson(As, bs, 10 * n)
    residual = float(np.linalg.norm(A @ x - b))
    feasible = (not capped) and residual <= tol * (1.0 + float(np.linalg.norm(b)))
    return NNLSResult(x=x, residual=residual, feasible=feasible, hit_iteration_cap=capped, iterations=it)


def sym_sqrt(S, tol=1e-10):
    """Symmetric square root ``M`` of a PSD matrix, so that ``M M^T = S``."""
    w, v = sym_eigh(S)
    if w[0] < -tol:
        raise NotPSD(f"minimum eigenvalue {w[0]:.3e} below -{tol:g}")
    root = v * np.sqrt(np.clip(w, 0.0, None))
    return root @ v.T
