"""Command-line entry point.

Usage examples::

    prens preset atom-laser --mode gaussian --chi 1 --nu 0 --kappa 1
    prens preset two-level --gamma-up 1 --gamma-down 2 --check discrete
    prens check-discrete model.json --format text
    prens simulate-diffusion gaussian.json --seed 3 --t-final 500

Exit codes: 0 PR / success, 1 NOT_PR, 2 NOT_REPRESENTING, 3 error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .ensemble import DiscreteEnsemble, PureState
from .errors import ConfigError, InvalidInput, IoError, PrensError
from .lindblad import Lindbladian, steady_state
from .models import (
    AtomLaserParams,
    TwoLevelParams,
    atom_laser_fock,
    atom_laser_linearized,
    coherent_phase_ensemble,
    fock_edge_members,
    number_poisson_ensemble,
    two_level_thermal,
)
from .pr_discrete import NOT_PR, NOT_REPRESENTING, PR, check_pr_discrete
from .pr_gaussian import LinearDynamics, check_pr_gaussian
from .trajectories import SimulationConfig, simulate_diffusion, validate_certificate

EXIT_CODES = {PR: 0, NOT_PR: 1, NOT_REPRESENTING: 2}
EXIT_ERROR = 3

DEFAULT_TOLERANCES = {"representation": 1e-8, "feasibility": 1e-8, "psd": 1e-10}
SIMULATION_KEYS = ("seed", "t_final", "dt", "burn_in", "trajectories")


@dataclass
class ParsedConfig:
    model: Lindbladian | None = None
    ensemble: DiscreteEnsemble | None = None
    V: np.ndarray | None = None
    dynamics: LinearDynamics | None = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    simulation: dict = field(default_factory=dict)
    digest: str = ""


@dataclass
class Report:
    command: str
    exit_code: int
    payload: dict
    input_digest: str
    duration_s: float
    tool: str = "prens"
    version: str = __version__

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False)


def _number(x, loc):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError("expected a real number", loc)
    if not np.isfinite(x):
        raise ConfigError("number must be finite", loc)
    return float(x)


def _complex(x, loc):
    if isinstance(x, list):
        if len(x) != 2:
            raise ConfigError("complex numbers are [re, im] pairs", loc)
        return complex(_number(x[0], f"{loc}/0"), _number(x[1], f"{loc}/1"))
    return complex(_number(x, loc))


def _matrix(obj, loc, cplx=False, shape=None):
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ConfigError("expected a non-empty row-major nested array", loc)
    width = len(obj[0])
    conv = _complex if cplx else _number
    rows = []
    for i, row in enumerate(obj):
        if len(row) != width:
            raise ConfigError("ragged matrix rows", f"{loc}/{i}")
        rows.append([conv(v, f"{loc}/{i}/{j}") for j, v in enumerate(row)])
    m = np.array(rows, dtype=complex if cplx else float)
    if shape is not None and m.shape != shape:
        raise ConfigError(f"expected shape {shape}, got {m.shape}", loc)
    return m


def _vector(obj, loc, cplx=False):
    if not isinstance(obj, list) or not obj:
        raise ConfigError("expected a non-empty array", loc)
    conv = _complex if cplx else _number
    return np.array([conv(v, f"{loc}/{i}") for i, v in enumerate(obj)], dtype=complex if cplx else float)


def _wrap(fn, loc):
    try:
        return fn()
    except InvalidInput as exc:
        raise ConfigError(str(exc), loc) from exc


def parse_config_data(data, digest=""):
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object")
    cfg = ParsedConfig(digest=digest)
    if "model" in data:
        m = data["model"]
        if not isinstance(m, dict):
            raise ConfigError("model must be an object", "/model")
        if "dim" not in m or isinstance(m["dim"], bool) or not isinstance(m["dim"], int) or m["dim"] < 1:
            raise ConfigError("dim must be a positive integer", "/model/dim")
        d = m["dim"]
        H = _matrix(m.get("hamiltonian", [[0] * d] * d), "/model/hamiltonian", True, (d, d))
        jumps = m.get("jumps", [])
        if not isinstance(jumps, list):
            raise ConfigError("jumps must be an array of matrices", "/model/jumps")
        J = tuple(_matrix(c, f"/model/jumps/{i}", True, (d, d)) for i, c in enumerate(jumps))
        cfg.model = _wrap(lambda: Lindbladian(H, J), "/model")
    if "ensemble" in data:
        e = data["ensemble"]
        if not isinstance(e, dict):
            raise ConfigError("ensemble must be an object", "/ensemble")
        kind = e.get("type", "discrete" if "states" in e else "gaussian")
        if kind == "discrete":
            if "states" not in e or not isinstance(e["states"], list) or not e["states"]:
                raise ConfigError("discrete ensembles need a non-empty states array", "/ensemble/states")
            states = []
            for i, s in enumerate(e["states"]):
                v = _vector(s, f"/ensemble/states/{i}", True)
                states.append(_wrap(lambda v=v: PureState.normalized(v), f"/ensemble/states/{i}"))
            if "weights" not in e:
                raise ConfigError("missing weights", "/ensemble/weights")
            w = _vector(e["weights"], "/ensemble/weights")
            if np.any(w < 0):
                raise ConfigError("weights must be nonnegative", "/ensemble/weights")
            if abs(w.sum() - 1) > 1e-10:
                raise ConfigError(f"weights must sum to 1 (normalization), got {w.sum():.12g}", "/ensemble/weights")
            cfg.ensemble = _wrap(lambda: DiscreteEnsemble(tuple(states), w), "/ensemble")
            if cfg.model is not None and cfg.ensemble.dim != cfg.model.dim:
                raise ConfigError("ensemble dimension differs from model dimension", "/ensemble/states")
        elif kind == "gaussian":
            if "V" not in e:
                raise ConfigError("gaussian ensembles need V", "/ensemble/V")
            cfg.V = _matrix(e["V"], "/ensemble/V")
        else:
            raise ConfigError("type must be 'discrete' or 'gaussian'", "/ensemble/type")
    if "dynamics" in data:
        dy = data["dynamics"]
        if not isinstance(dy, dict) or "K" not in dy or "D" not in dy:
            raise ConfigError("dynamics needs K and D", "/dynamics")
        K = _matrix(dy["K"], "/dynamics/K")
        D = _matrix(dy["D"], "/dynamics/D")
        cfg.dynamics = _wrap(lambda: LinearDynamics(K, D), "/dynamics")
    # flat gaussian shorthand: {"K":..., "D":..., "V":...}
    if cfg.dynamics is None and "K" in data and "D" in data:
        K = _matrix(data["K"], "/K")
        D = _matrix(data["D"], "/D")
        cfg.dynamics = _wrap(lambda: LinearDynamics(K, D), "/")
    if cfg.V is None and "V" in data:
        cfg.V = _matrix(data["V"], "/V")
    if cfg.V is not None and cfg.dynamics is not None and cfg.V.shape != cfg.dynamics.K.shape:
        raise ConfigError("V does not match the dynamics dimension", "/ensemble/V")
    if "tolerances" in data:
        t = data["tolerances"]
        if not isinstance(t, dict):
            raise ConfigError("tolerances must be an object", "/tolerances")
        for k, v in t.items():
            if k not in DEFAULT_TOLERANCES:
                raise ConfigError("unknown tolerance", f"/tolerances/{k}")
            val = _number(v, f"/tolerances/{k}")
            if val < 0:
                raise ConfigError("tolerances must be nonnegative", f"/tolerances/{k}")
            cfg.tolerances[k] = val
    if "simulation" in data:
        s = data["simulation"]
        if not isinstance(s, dict):
            raise ConfigError("simulation must be an object", "/simulation")
        for k, v in s.items():
            if k not in SIMULATION_KEYS:
                raise ConfigError("unknown simulation key", f"/simulation/{k}")
            cfg.simulation[k] = int(_number(v, f"/simulation/{k}")) if k in ("seed", "trajectories") else _number(v, f"/simulation/{k}")
    if cfg.model is None and cfg.ensemble is None and cfg.dynamics is None:
        raise ConfigError("config defines no model, ensemble or dynamics")
    return cfg


def parse_config(path):
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not raw.strip():
        raise ConfigError("empty configuration file")
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc
    return parse_config_data(data, hashlib.sha256(raw).hexdigest())


def _sim_config(args, base):
    vals = dict(base)
    for k in SIMULATION_KEYS:
        v = getattr(args, k, None)
        if v is not None:
            vals[k] = v
    vals.setdefault("seed", 0)
    return SimulationConfig(**vals)


def _tolerances(args, base):
    tol = dict(base)
    for k in DEFAULT_TOLERANCES:
        v = getattr(args, f"tol_{k}", None)
        if v is not None:
            tol[k] = v
    return tol


def _require(value, what):
    if value is None:
        raise ConfigError(f"this command needs {what}")
    return value


def _discrete(L, E, tol, exclude=(), validate=None):
    rho = steady_state(L)
    verdict = check_pr_discrete(L, E, rho, tol["feasibility"], tol["representation"], exclude)
    payload = {"verdict": verdict.to_dict()}
    if validate is not None and verdict.decision == PR:
        payload["validation"] = validate_certificate(L, E, verdict, validate).to_dict()
    return EXIT_CODES[verdict.decision], payload


def _gaussian(dyn, V, tol, simulate=None):
    report = check_pr_gaussian(dyn, V, tol["psd"])
    payload = {"report": report.to_dict(), "K": dyn.K.tolist(), "D": dyn.D.tolist()}
    if simulate is not None and report.decision == PR and report.V_ss is not None:
        payload["diffusion"] = simulate_diffusion(dyn, V, simulate).to_dict()
    return EXIT_CODES[report.decision], payload


def _run_file(args):
    cfg = parse_config(args.config)
    tol = _tolerances(args, cfg.tolerances)
    cmd = args.command
    if cmd in ("check-discrete", "simulate-jump"):
        L = _require(cfg.model, "a model")
        E = _require(cfg.ensemble, "a discrete ensemble")
        sim = _sim_config(args, cfg.simulation) if cmd == "simulate-jump" else None
        code, payload = _discrete(L, E, tol, validate=sim)
    else:
        dyn = _require(cfg.dynamics, "dynamics K and D")
        V = _require(cfg.V, "a gaussian ensemble covariance V")
        sim = _sim_config(args, cfg.simulation) if cmd == "simulate-diffusion" else None
        code, payload = _gaussian(dyn, V, tol, sim)
    return code, payload, cfg.digest


def _digest_args(args):
    d = {k: v for k, v in vars(args).items() if k not in ("out", "format", "func")}
    return hashlib.sha256(json.dumps(d, sort_keys=True, default=str).encode()).hexdigest()


def _run_preset(args):
    tol = _tolerances(args, DEFAULT_TOLERANCES)
    sim = _sim_config(args, {}) if args.simulate else None
    if args.system == "atom-laser":
        if args.mode == "gaussian":
            p = AtomLaserParams(mu=args.mu or 1.0, kappa=args.kappa, chi=args.chi, nu=args.nu)
            dyn, V = atom_laser_linearized(p)
            code, payload = _gaussian(dyn, V, tol, sim)
        else:
            p = AtomLaserParams(mu=args.mu or 3.0, kappa=args.kappa, chi=args.chi, nu=args.nu, nmax=args.nmax)
            L = atom_laser_fock(p)
            d = L.dim
            if args.ensemble == "number":
                E = number_poisson_ensemble(p.mu, d)
                exclude = fock_edge_members(E, d)
            else:
                E = coherent_phase_ensemble(p.mu, args.phases, d)
                exclude = ()
                if args.tol_representation is None:
                    tol["representation"] = 1e-6
            code, payload = _discrete(L, E, tol, exclude, sim)
    else:
        L = two_level_thermal(TwoLevelParams(args.gamma_up, args.gamma_down))
        if args.ensemble == "plusminus":
            s = 1 / np.sqrt(2)
            E = DiscreteEnsemble((PureState([s, s]), PureState([s, -s])), [0.5, 0.5])
        else:
            w = np.array([args.gamma_down, args.gamma_up]) / (args.gamma_down + args.gamma_up)
            E = DiscreteEnsemble((PureState([1, 0]), PureState([0, 1])), w)
        code, payload = _discrete(L, E, tol, validate=sim)
    return code, payload, _digest_args(args)


def _text(report):
    lines = [f"prens {report.version} :: {report.command} (exit {report.exit_code}, {report.duration_s:.3f} s)"]
    p = report.payload
    if "error" in p:
        e = p["error"]
        lines.append(f"error [{e['type']}] {e['message']}")
    if "verdict" in p:
        v = p["verdict"]
        lines.append(f"decision: {v['decision']}")
        lines.append(f"representation distance: {v['representation_distance']:.3e}")
        for k in ("joint_residual", "feasibility_residual", "stationarity_residual"):
            if v[k] is not None:
                lines.append(f"{k.replace('_', ' ')}: {v[k]:.3e}")
        if v["certificate"] is not None and len(v["certificate"]) <= 6:
            lines.append("rates (row = from, column = to):")
            lines.extend("  " + " ".join(f"{x:10.6g}" for x in row) for row in v["certificate"])
        lines.extend(f"note: {n}" for n in v["notes"])
    if "validation" in p:
        val = p["validation"]
        lines.append(f"ergodic check: {'pass' if val['passed'] else 'FAIL'} (exempt members {val['exempt']})")
    if "report" in p:
        r = p["report"]
        lines.append(f"decision: {r['decision']}")
        lines.append(f"min eigenvalue of B_V: {r['min_eig_B']:.6g}")
        lines.append("B_V: " + json.dumps(r["B_V"]))
        if r["U"] is not None:
            lines.append("U = V_ss - V: " + json.dumps(r["U"]) + f" (representable: {r['representable']})")
        lines.extend(f"note: {n}" for n in r["notes"])
    if "diffusion" in p:
        lines.append("empirical covariance: " + json.dumps(p["diffusion"]["empirical_cov"]))
    return "\n".join(lines)


def _add_common(p):
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--tol-representation", type=float)
    p.add_argument("--tol-feasibility", type=float)
    p.add_argument("--tol-psd", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--t-final", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--burn-in", type=float)
    p.add_argument("--trajectories", type=int)


def build_parser():
    ap = argparse.ArgumentParser(prog="prens", description="Physical realizability of stationary pure-state ensembles.")
    ap.add_argument("--version", action="version", version=f"prens {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("check-discrete", "check-gaussian", "simulate-jump", "simulate-diffusion"):
        p = sub.add_parser(name)
        p.add_argument("config", help="JSON configuration file")
        _add_common(p)
    p = sub.add_parser("preset", help="run a built-in system")
    p.add_argument("system", choices=("atom-laser", "two-level"))
    p.add_argument("--mode", choices=("gaussian", "fock"), default="gaussian")
    p.add_argument("--chi", type=float, default=0.0)
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--mu", type=float)
    p.add_argument("--nmax", type=int)
    p.add_argument("--phases", type=int, default=24)
    p.add_argument("--ensemble", choices=("coherent", "number", "energy", "plusminus"))
    p.add_argument("--gamma-up", type=float, default=0.0)
    p.add_argument("--gamma-down", type=float, default=1.0)
    p.add_argument("--check", choices=("discrete",), default="discrete",
                   help="two-level presets only support the discrete check")
    p.add_argument("--simulate", action="store_true", help="also run the stochastic validation")
    _add_common(p)
    return ap


def run(args):
    """Execute parsed arguments; returns a Report."""
    t0 = time.perf_counter()
    digest = ""
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            if args.command == "preset":
                if args.system == "atom-laser" and args.ensemble is None:
                    args.ensemble = "coherent"
                if args.system == "two-level" and args.ensemble is None:
                    args.ensemble = "energy"
                code, payload, digest = _run_preset(args)
            else:
                code, payload, digest = _run_file(args)
        if caught:
            payload["warnings"] = [str(w.message) for w in caught]
    except PrensError as exc:
        code = EXIT_ERROR
        payload = {"error": {"type": type(exc).__name__, "message": str(exc),
                             "location": getattr(exc, "location", None)}}
    return Report(args.command, code, payload, digest, time.perf_counter() - t0)


def main(argv=None):
    args = build_parser().parse_args(argv)
    report = run(args)
    text = report.to_json() if args.format == "json" else _text(report)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")
    return report.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
