"""Stochastic checks that realizability certificates reproduce the ensemble weights.

Two simulators: an exact-event (Gillespie) run of the classical jump chain
defined by a rate certificate, and an Euler-Maruyama run of the mean
displacements of a uniform Gaussian ensemble.

Every trajectory draws from its own Philox stream keyed by
``(seed, trajectory_index)`` so results do not depend on scheduling.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import InvalidInput, SingularDynamics
from .lindblad import apply_lindbladian
from .numerics import is_hurwitz, sym_sqrt
from .pr_discrete import PR, RateMatrix, reconstruct_generator_images
from .pr_gaussian import excess_diffusion

N_BATCHES = 10


@dataclass(frozen=True)
class SimulationConfig:
    seed: int = 0
    t_final: float = 1000.0
    dt: float | None = None
    burn_in: float | None = None
    trajectories: int = 1

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidInput("seed must be a 64-bit unsigned integer")
        if not self.t_final > 0:
            raise InvalidInput("t_final must be positive")
        if self.dt is not None and not self.dt > 0:
            raise InvalidInput("dt must be positive")
        if self.burn_in is not None and not 0 <= self.burn_in < self.t_final:
            raise InvalidInput("burn_in must lie in [0, t_final)")
        if int(self.trajectories) < 1:
            raise InvalidInput("need at least one trajectory")


@dataclass(frozen=True)
class OccupationStats:
    fractions: np.ndarray
    std_errors: np.ndarray
    total_time: float
    jump_count: int
    burn_in: float = 0.0
    absorbing: tuple = ()

    def to_dict(self):
        return {
            "fractions": self.fractions.tolist(),
            "std_errors": self.std_errors.tolist(),
            "total_time": self.total_time,
            "jump_count": self.jump_count,
            "burn_in": self.burn_in,
            "absorbing": list(self.absorbing),
        }


@dataclass(frozen=True)
class DiffusionStats:
    empirical_mean: np.ndarray
    empirical_cov: np.ndarray
    samples: int
    mean_std_error: np.ndarray | None = None
    burn_in: float = 0.0
    dt: float = 0.0

    def to_dict(self):
        return {
            "empirical_mean": self.empirical_mean.tolist(),
            "empirical_cov": self.empirical_cov.tolist(),
            "samples": self.samples,
            "mean_std_error": None if self.mean_std_error is None else self.mean_std_error.tolist(),
            "burn_in": self.burn_in,
            "dt": self.dt,
        }


def stream(seed, index):
    """Independent generator for trajectory ``index`` of run ``seed``."""
    return np.random.Generator(np.random.Philox(key=[int(seed) % 2**64, int(index)]))


def _workers(n):
    cap = os.environ.get("PRENS_THREADS")
    limit = int(cap) if cap and cap.isdigit() and int(cap) > 0 else (os.cpu_count() or 1)
    return max(1, min(n, limit))


def _map_trajectories(fn, n):
    workers = _workers(n)
    if workers == 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(n)))


def _add_occupancy(occ, state, t0, t1, start, width):
    """Spread the interval [t0, t1) over time batches of the given width."""
    last = occ.shape[0] - 1
    while t1 > t0:
        b = min(int((t0 - start) / width), last)
        edge = start + (b + 1) * width
        while b < last and edge <= t0:
            b += 1
            edge = start + (b + 1) * width
        seg_end = t1 if b == last else min(t1, edge)
        occ[b, state] += seg_end - t0
        t0 = seg_end


def _jump_path(gamma, exit_rates, weights, t_final, burn_in, rng):
    K = gamma.shape[0]
    occ = np.zeros((N_BATCHES, K))
    width = (t_final - burn_in) / N_BATCHES
    state = int(rng.choice(K, p=weights))
    t = 0.0
    jumps = 0
    absorbed = set()
    while t < t_final:
        rate = exit_rates[state]
        if rate <= 0:
            absorbed.add(state)
            t_next = t_final
        else:
            t_next = min(t + rng.exponential(1.0 / rate), t_final)
        lo = max(t, burn_in)
        if t_next > lo:
            _add_occupancy(occ, state, lo, t_next, burn_in, width)
        t = t_next
        if t >= t_final:
            break
        state = int(rng.choice(K, p=gamma[state] / rate))
        jumps += 1
    return occ, jumps, absorbed


def default_jump_burn_in(g, t_final):
    """Ten relaxation times of the chain, capped at a tenth of the run."""
    Q = g - np.diag(g.sum(axis=1))
    decay = -np.linalg.eigvals(Q).real
    decay = decay[decay > 1e-12]
    if decay.size == 0:
        return 0.0
    return float(min(10.0 / decay.min(), 0.1 * t_final))


def simulate_jump(gamma, initial_weights, cfg):
    """Time-averaged occupation of each member under the certificate rates.

    Initial members are drawn from ``initial_weights``. Error bars come from
    10 equal-time batch means per trajectory.
    """
    g = gamma.rates if isinstance(gamma, RateMatrix) else RateMatrix(gamma).rates
    w = np.asarray(initial_weights, dtype=float).reshape(-1)
    if w.size != g.shape[0] or np.any(w < 0) or abs(w.sum() - 1) > 1e-10:
        raise InvalidInput("initial_weights must be a distribution over the members")
    w = w / w.sum()
    burn_in = default_jump_burn_in(g, cfg.t_final) if cfg.burn_in is None else float(cfg.burn_in)
    exit_rates = g.sum(axis=1)

    def run(i):
        return _jump_path(g, exit_rates, w, cfg.t_final, burn_in, stream(cfg.seed, i))

    results = _map_trajectories(run, int(cfg.trajectories))
    batches = np.vstack([r[0] for r in results])
    span = cfg.t_final - burn_in
    width = span / N_BATCHES
    batch_fracs = batches / width
    fractions = batches.sum(axis=0) / (span * len(results))
    fractions = fractions / fractions.sum()
    nb = batch_fracs.shape[0]
    std_errors = batch_fracs.std(axis=0, ddof=1) / np.sqrt(nb)
    absorbing = sorted(set().union(*(r[2] for r in results)))
    return OccupationStats(
        fractions=fractions,
        std_errors=std_errors,
        total_time=span * len(results),
        jump_count=int(sum(r[1] for r in results)),
        burn_in=burn_in,
        absorbing=tuple(absorbing),
    )


@numba.njit(cache=True)
def _em_chunk(x, drift, noise, root, first, burn_steps, batch_len, sums, outer, batch_sums, batch_counts):
    n = x.shape[0]
    y = np.empty(n)
    for s in range(noise.shape[0]):
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += drift[i, j] * x[j] + root[i, j] * noise[s, j]
            y[i] = acc
        for i in range(n):
            x[i] = y[i]
        step = first + s + 1
        if step > burn_steps:
            b = (step - burn_steps - 1) // batch_len
            if b >= batch_sums.shape[0]:
                b = batch_sums.shape[0] - 1
            batch_counts[b] += 1
            for i in range(n):
                sums[i] += x[i]
                batch_sums[b, i] += x[i]
                for j in range(n):
                    outer[i, j] += x[i] * x[j]


def _diffusion_path(drift, root, n_steps, burn_steps, x0, rng, chunk=1 << 18):
    n = x0.size
    x = x0.astype(float).copy()
    sums = np.zeros(n)
    outer = np.zeros((n, n))
    batch_sums = np.zeros((N_BATCHES, n))
    batch_counts = np.zeros(N_BATCHES, dtype=np.int64)
    batch_len = max(1, (n_steps - burn_steps) // N_BATCHES)
    done = 0
    while done < n_steps:
        m = min(chunk, n_steps - done)
        noise = rng.standard_normal((m, n))
        _em_chunk(x, drift, noise, root, done, burn_steps, batch_len, sums, outer, batch_sums, batch_counts)
        done += m
    return sums, outer, batch_sums, batch_counts


def simulate_diffusion(dyn, V, cfg, mu0=None):
    """Euler-Maruyama run of ``dmu = -K mu dt + sqrt(B_V) dW``; stationary moments after burn-in."""
    B = excess_diffusion(dyn, V)
    root = sym_sqrt(B)
    K = dyn.K
    if not is_hurwitz(K):
        raise SingularDynamics("stationary statistics need a Hurwitz drift")
    dt = cfg.dt if cfg.dt is not None else 1e-3 / np.linalg.norm(K, 2)
    if dt * np.linalg.norm(K, 2) > 0.1:
        raise InvalidInput("dt must satisfy dt * ||K|| <= 0.1")
    burn_in = cfg.burn_in if cfg.burn_in is not None else 10.0 / float(np.min(np.linalg.eigvals(K).real))
    if burn_in >= cfg.t_final:
        raise InvalidInput("burn_in must be shorter than t_final")
    n_steps = int(round(cfg.t_final / dt))
    burn_steps = int(round(burn_in / dt))
    x0 = np.zeros(dyn.dim) if mu0 is None else np.asarray(mu0, dtype=float).reshape(-1)
    if x0.size != dyn.dim:
        raise InvalidInput("mu0 has the wrong length")
    drift = np.eye(dyn.dim) - K * dt
    scaled_root = np.ascontiguousarray(root * np.sqrt(dt))

    def run(i):
        return _diffusion_path(drift, scaled_root, n_steps, burn_steps, x0, stream(cfg.seed, i))

    results = _map_trajectories(run, int(cfg.trajectories))
    count = sum(int(r[3].sum()) for r in results)
    mean = sum(r[0] for r in results) / count
    second = sum(r[1] for r in results) / count
    cov = second - np.outer(mean, mean)
    cov = 0.5 * (cov + cov.T)
    bmeans = np.vstack([r[2] / np.maximum(r[3], 1)[:, None] for r in results])
    sem = bmeans.std(axis=0, ddof=1) / np.sqrt(bmeans.shape[0])
    return DiffusionStats(mean, cov, count, sem, burn_in, dt)


@dataclass(frozen=True)
class CertificateCheck:
    passed: bool
    fractions: np.ndarray
    weights: np.ndarray
    deviations: np.ndarray
    std_errors: np.ndarray
    exempt: tuple
    generator_residual: float
    stats: OccupationStats = field(repr=False, default=None)

    def to_dict(self):
        return {
            "passed": self.passed,
            "fractions": self.fractions.tolist(),
            "weights": self.weights.tolist(),
            "deviations": self.deviations.tolist(),
            "std_errors": self.std_errors.tolist(),
            "exempt": list(self.exempt),
            "generator_residual": self.generator_residual,
            "jump_count": None if self.stats is None else self.stats.jump_count,
        }


def validate_certificate(L, E, verdict, cfg, rate_scale=1.0, n_sigma=3.0):
    """Compare simulated occupation fractions with the ensemble weights.

    Members with weight below ``5 / (t_final * rate_scale)`` are too rarely
    visited to test and are listed as exempt.
    """
    if verdict.decision != PR or verdict.certificate is None:
        raise InvalidInput("validation needs a PR verdict carrying a rate certificate")
    gamma = verdict.certificate
    images = reconstruct_generator_images(E, gamma)
    gen_res = max(
        float(np.linalg.norm(apply_lindbladian(L, P) - img))
        for k, (P, img) in enumerate(zip(E.projectors, images))
        if k not in verdict.excluded_members
    ) if len(E) > len(verdict.excluded_members) else 0.0
    stats = simulate_jump(gamma, E.weights, cfg)
    dev = np.abs(stats.fractions - E.weights)
    threshold = 5.0 / (cfg.t_final * rate_scale)
    exempt = tuple(int(k) for k in np.flatnonzero(E.weights < threshold))
    tested = np.ones(len(E), dtype=bool)
    tested[list(exempt)] = False
    ok = dev[tested] <= n_sigma * stats.std_errors[tested]
    return CertificateCheck(
        passed=bool(np.all(ok)),
        fractions=stats.fractions,
        weights=E.weights,
        deviations=dev,
        std_errors=stats.std_errors,
        exempt=exempt,
        generator_residual=gen_res,
        stats=stats,
    )
