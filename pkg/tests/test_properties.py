"""Invariants checked over randomly generated instances."""

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from prens.ensemble import DiscreteEnsemble, PureState, check_represents, ensemble_density
from prens.lindblad import Lindbladian, apply_lindbladian, propagate, steady_state
from prens.numerics import expm, lyapunov_solve, nnls_feasibility, psd_min_eig, sym_eigvals
from prens.pr_discrete import PR, check_pr_discrete
from prens.pr_gaussian import LinearDynamics, check_pr_gaussian, excess_diffusion, weight_covariance
from prens.trajectories import SimulationConfig, simulate_diffusion, simulate_jump

PROPS = settings(max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow])
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def rng_of(seed):
    return np.random.default_rng(seed)


def random_hurwitz(rng, n):
    A = rng.normal(size=(n, n))
    shift = max(0.0, np.linalg.eigvals(A).real.max()) + rng.uniform(0.2, 2.0)
    return -(A - shift * np.eye(n))


def random_psd(rng, n, rank=None):
    B = rng.normal(size=(n, rank or n))
    return B @ B.T


def random_lindbladian(rng, d, n_jumps=2):
    H = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    jumps = tuple(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for _ in range(n_jumps))
    return Lindbladian(0.5 * (H + H.conj().T), jumps)


def random_density(rng, d):
    A = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = A @ A.conj().T
    return rho / np.trace(rho).real


def random_ensemble(rng, d, K):
    states = tuple(PureState.normalized(rng.normal(size=d) + 1j * rng.normal(size=d)) for _ in range(K))
    w = rng.uniform(0.1, 1.0, size=K)
    return DiscreteEnsemble(states, w / w.sum())


def chain_model(rng, K):
    """Classical chain on basis states with random rates, as a Lindbladian."""
    g = rng.uniform(0.2, 2.0, size=(K, K))
    np.fill_diagonal(g, 0.0)
    jumps = []
    for k in range(K):
        for j in range(K):
            if k != j:
                op = np.zeros((K, K))
                op[j, k] = np.sqrt(g[k, j])
                jumps.append(op)
    L = Lindbladian(np.diag(rng.normal(size=K)), tuple(jumps))
    rho = steady_state(L)
    E = DiscreteEnsemble(tuple(PureState(v) for v in np.eye(K)), np.clip(np.diag(rho).real, 0, None) / np.trace(rho).real)
    return L, E, rho, g


# numerics


@PROPS
@given(seeds, st.integers(1, 6))
def test_eigenvalues_sum_to_trace(seed, n):
    A = rng_of(seed).normal(size=(n, n))
    S = A + A.T
    assert sum(sym_eigvals(S)) == pytest.approx(np.trace(S), abs=1e-10 * (1 + np.abs(S).sum()))


@PROPS
@given(seeds, st.integers(1, 4))
def test_lyapunov_residual_and_psd(seed, n):
    rng = rng_of(seed)
    K, D = random_hurwitz(rng, n), random_psd(rng, n)
    X = lyapunov_solve(K, D)
    res = np.linalg.norm(K @ X + X @ K.T - D)
    assert res <= 1e-8 * (1 + np.linalg.norm(D)) * (1 + np.linalg.norm(K)) * (1 + np.linalg.norm(X))
    assert psd_min_eig(X)[1] >= -1e-9 * (1 + np.linalg.norm(X))


@PROPS
@given(seeds, st.integers(1, 5), st.floats(0.01, 3.0))
def test_expm_inverse(seed, n, scale):
    M = scale * rng_of(seed).normal(size=(n, n))
    P = expm(M) @ expm(-M)
    assert np.linalg.norm(P - np.eye(n)) <= 1e-10 * np.exp(2 * np.linalg.norm(M, 1))


@PROPS
@given(seeds, st.integers(1, 6), st.integers(1, 5))
def test_nnls_recovers_nonnegative_solution(seed, m, n):
    rng = rng_of(seed)
    A = rng.normal(size=(m + n, n))
    x0 = np.abs(rng.normal(size=n))
    r = nnls_feasibility(A, A @ x0)
    assert np.all(r.x >= 0)
    assert r.feasible and r.residual <= 1e-8 * (1 + np.linalg.norm(A @ x0))


@PROPS
@given(seeds, st.integers(1, 6), st.integers(1, 5))
def test_nnls_solution_is_nonnegative(seed, m, n):
    rng = rng_of(seed)
    r = nnls_feasibility(rng.normal(size=(m, n)), rng.normal(size=m))
    assert np.all(r.x >= 0)


# lindblad


@PROPS
@given(seeds, st.integers(1, 4))
def test_generator_is_traceless(seed, d):
    rng = rng_of(seed)
    L = random_lindbladian(rng, d)
    out = apply_lindbladian(L, random_density(rng, d))
    assert abs(np.trace(out)) <= 1e-10 * (1 + np.abs(out).sum())
    np.testing.assert_allclose(out, out.conj().T, atol=1e-10 * (1 + np.abs(out).max()))


@PROPS
@given(seeds, st.integers(2, 3), st.sampled_from([0.1, 1.0, 10.0]))
def test_steady_state_is_fixed_point(seed, d, tau):
    L = random_lindbladian(rng_of(seed), d)
    rho = steady_state(L)
    np.testing.assert_allclose(propagate(L, rho, tau), rho, atol=1e-7)


@PROPS
@given(seeds, st.integers(1, 3), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_semigroup_law(seed, d, s, t):
    rng = rng_of(seed)
    L = random_lindbladian(rng, d)
    rho = random_density(rng, d)
    np.testing.assert_allclose(propagate(L, propagate(L, rho, s), t), propagate(L, rho, s + t), atol=1e-9)


# ensembles


@PROPS
@given(seeds, st.integers(2, 4), st.integers(1, 5))
def test_density_is_permutation_invariant(seed, d, K):
    rng = rng_of(seed)
    E = random_ensemble(rng, d, K)
    perm = rng.permutation(K)
    Ep = DiscreteEnsemble(tuple(E.states[i] for i in perm), E.weights[perm])
    np.testing.assert_allclose(ensemble_density(Ep), ensemble_density(E), atol=1e-14)


@PROPS
@given(seeds, st.integers(2, 4), st.floats(0.0, 1.0))
def test_density_is_affine_in_weights(seed, d, t):
    rng = rng_of(seed)
    E = random_ensemble(rng, d, 3)
    w2 = rng.dirichlet(np.ones(3))
    mix = DiscreteEnsemble(E.states, t * E.weights + (1 - t) * w2)
    other = DiscreteEnsemble(E.states, w2)
    np.testing.assert_allclose(
        ensemble_density(mix), t * ensemble_density(E) + (1 - t) * ensemble_density(other), atol=1e-14
    )


@PROPS
@given(seeds, st.integers(2, 4), st.integers(1, 5))
def test_ensemble_represents_its_own_density(seed, d, K):
    E = random_ensemble(rng_of(seed), d, K)
    ok, dist = check_represents(E, ensemble_density(E))
    assert ok and dist <= 1e-12


# discrete realizability


@PROPS
@given(seeds, st.integers(2, 3))
def test_classical_chain_is_pr_with_its_rates(seed, K):
    L, E, rho, g = chain_model(rng_of(seed), K)
    v = check_pr_discrete(L, E, rho)
    assert v.decision == PR
    np.testing.assert_allclose(v.certificate.rates, g, atol=1e-7)


@PROPS
@given(seeds, st.integers(2, 3), st.floats(0.1, 10.0))
def test_certificate_scales_with_rates(seed, K, s):
    L, E, rho, _ = chain_model(rng_of(seed), K)
    v = check_pr_discrete(L, E, rho)
    vs = check_pr_discrete(L.scaled(s), E, steady_state(L.scaled(s)))
    assert vs.decision == v.decision == PR
    np.testing.assert_allclose(vs.certificate.rates, s * v.certificate.rates, atol=1e-7 * s)


@PROPS
@given(seeds, st.integers(2, 3), st.floats(0.0, 2 * np.pi))
def test_verdict_invariant_under_relabelling_and_phase(seed, K, phase):
    rng = rng_of(seed)
    L, E, rho, _ = chain_model(rng, K)
    perm = rng.permutation(K)
    Ep = DiscreteEnsemble(
        tuple(PureState(np.exp(1j * phase) * E.states[i].amplitudes) for i in perm), E.weights[perm]
    )
    v, vp = check_pr_discrete(L, E, rho), check_pr_discrete(L, Ep, rho)
    assert v.decision == vp.decision
    np.testing.assert_allclose(vp.certificate.rates, v.certificate.rates[np.ix_(perm, perm)], atol=1e-7)


# gaussian realizability


@PROPS
@given(seeds, st.integers(1, 2))
def test_stationary_covariance_has_zero_excess(seed, modes):
    rng = rng_of(seed)
    n = 2 * modes
    dyn = LinearDynamics(random_hurwitz(rng, n), random_psd(rng, n))
    V_ss = lyapunov_solve(dyn.K, dyn.D)
    B = excess_diffusion(dyn, V_ss)
    assert np.linalg.norm(B) <= 1e-8 * (1 + np.linalg.norm(dyn.D))


@PROPS
@given(seeds, st.integers(1, 2))
def test_constructed_pr_family(seed, modes):
    # D = K V + V K^T + B with B PSD is realizable by construction
    rng = rng_of(seed)
    n = 2 * modes
    K, V, B = random_hurwitz(rng, n), random_psd(rng, n) + 0.1 * np.eye(n), random_psd(rng, n, rank=1)
    D = K @ V + V @ K.T + B
    D = 0.5 * (D + D.T)
    lo = psd_min_eig(D)[1]
    if lo < 0:
        D = D + (1e-9 - lo) * np.eye(n)
        B = D - K @ V - V @ K.T
    r = check_pr_gaussian(LinearDynamics(K, D), V, tol=1e-8 * (1 + np.linalg.norm(D)))
    assert r.decision == PR


@PROPS
@given(seeds, st.floats(0.0, 2 * np.pi))
def test_gaussian_verdict_is_rotation_invariant(seed, theta):
    rng = rng_of(seed)
    K = random_hurwitz(rng, 2)
    V = random_psd(rng, 2) + 0.1 * np.eye(2)
    D = K @ V + V @ K.T + rng.normal() * random_psd(rng, 2, rank=1)
    D = 0.5 * (D + D.T)
    lo = psd_min_eig(D)[1]
    if lo < 0:
        D = D - lo * np.eye(2)
    O = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    r = check_pr_gaussian(LinearDynamics(K, D), V)
    ro = check_pr_gaussian(LinearDynamics(O @ K @ O.T, O @ D @ O.T), O @ V @ O.T)
    assert ro.min_eig_B == pytest.approx(r.min_eig_B, abs=1e-9 * (1 + np.linalg.norm(D)))
    if abs(r.min_eig_B) > 1e-6 * (1 + np.linalg.norm(D)):
        assert r.decision == ro.decision


@PROPS
@given(seeds, st.integers(1, 2))
def test_weight_covariance_relations(seed, modes):
    rng = rng_of(seed)
    n = 2 * modes
    K, D = random_hurwitz(rng, n), random_psd(rng, n) + np.eye(n)
    V = 0.5 * lyapunov_solve(K, D)
    dyn = LinearDynamics(K, D)
    U = weight_covariance(dyn, V)
    B = excess_diffusion(dyn, V)
    scale = 1 + np.linalg.norm(D)
    np.testing.assert_allclose(K @ U + U @ K.T, B, atol=1e-8 * scale)
    np.testing.assert_allclose(U + V, lyapunov_solve(K, D), atol=1e-8 * scale)


# simulation


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_jump_simulation_is_bit_exact(seed):
    cfg = SimulationConfig(seed=seed, t_final=20.0)
    g = [[0, 1.0], [2.0, 0]]
    a, b = simulate_jump(g, [0.5, 0.5], cfg), simulate_jump(g, [0.5, 0.5], cfg)
    assert a.fractions.tobytes() == b.fractions.tobytes() and a.jump_count == b.jump_count


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_diffusion_simulation_is_bit_exact(seed):
    dyn = LinearDynamics(np.diag([1.0, 2.0]), np.diag([3.0, 5.0]))
    cfg = SimulationConfig(seed=seed, t_final=2.0, dt=1e-3, burn_in=0.5)
    a, b = simulate_diffusion(dyn, np.eye(2), cfg), simulate_diffusion(dyn, np.eye(2), cfg)
    assert a.empirical_cov.tobytes() == b.empirical_cov.tobytes()
