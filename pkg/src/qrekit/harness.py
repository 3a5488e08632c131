"""Seeded experiment suites with machine-readable reports.

A suite turns an :class:`ExperimentConfig` into an :class:`ExperimentReport`
whose ``results`` payload depends only on the config, so two runs with the
same seed serialise to identical bytes (``wall_time`` aside). Every check is
recorded as an :class:`Assertion` carrying the measured value, its bound and
the margin between them.

Report schema (JSON)::

    {"suite": str, "config": {...}, "results": {...},
     "assertions": [{"name", "measured", "bound", "margin", "relation", "passed"}],
     "passed": bool, "wall_time": float}
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import blind, hamiltonian, nocloning, qre, schemes, verify
from .kernels import GOLDEN, mix64

SUITES = ("verify-tc", "verify-qre", "noclone", "blind-attack", "bfk-demo", "all")
MASK64 = (1 << 64) - 1
EXACT_TOL = 1e-8
MC_SIGMAS = 5.0


class ConfigError(ValueError):
    pass


def derive_trial_seed(master: int, index: int) -> int:
    """Seed of trial ``index`` under ``master``: ``splitmix64(master + (index+1)·γ)``.

    The finaliser is a bijection on 64-bit words and ``γ`` is odd, so the
    map is injective in ``index`` (for fixed master) and in ``master`` (for
    fixed index).
    """
    z = (int(master) + (int(index) + 1) * int(GOLDEN)) & MASK64
    return int(mix64(np.uint64(z)))


def _plain(obj):
    """Convert numpy scalars, arrays and tuples into JSON-ready Python values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


# --------------------------------------------------------------------------
# config and report types
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    suite: str
    seed: int
    parameters: dict = field(default_factory=dict)
    output_path: str | None = None

    def __post_init__(self):
        if self.suite not in SUITES:
            raise ConfigError(f"unknown suite {self.suite!r}; choose one of {', '.join(SUITES)}")
        if self.seed is None:
            raise ConfigError("missing required field 'seed'")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)):
            raise ConfigError(f"field 'seed' must be an integer, got {self.seed!r}")
        if not 0 <= int(self.seed) <= MASK64:
            raise ConfigError("field 'seed' must fit in 64 unsigned bits")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "parameters", dict(self.parameters or {}))

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        for name in ("suite", "seed"):
            if name not in d:
                raise ConfigError(f"missing required field {name!r}")
        unknown = set(d) - {"suite", "seed", "parameters", "output_path"}
        if unknown:
            raise ConfigError(f"unknown config fields: {', '.join(sorted(unknown))}")
        return cls(d["suite"], d["seed"], d.get("parameters") or {}, d.get("output_path"))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {"suite": self.suite, "seed": self.seed, "parameters": _plain(self.parameters),
                "output_path": self.output_path}


@dataclass(frozen=True)
class Assertion:
    name: str
    measured: float
    bound: float
    relation: str = "<="

    @property
    def margin(self) -> float:
        """Distance to the bound, positive when the assertion passes with room."""
        if self.relation == "<=":
            return self.bound - self.measured
        if self.relation == ">=":
            return self.measured - self.bound
        raise ValueError(f"unknown relation {self.relation!r}")

    @property
    def passed(self) -> bool:
        return self.margin >= 0

    def to_dict(self) -> dict:
        return {"name": self.name, "measured": float(self.measured), "bound": float(self.bound),
                "margin": float(self.margin), "relation": self.relation, "passed": self.passed}

    @classmethod
    def from_dict(cls, d: dict) -> "Assertion":
        return cls(d["name"], float(d["measured"]), float(d["bound"]), d.get("relation", "<="))


@dataclass(frozen=True)
class ExperimentReport:
    suite: str
    config: dict
    results: dict
    assertions: tuple[Assertion, ...]
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    @property
    def failures(self) -> list[Assertion]:
        return [a for a in self.assertions if not a.passed]

    def payload(self) -> dict:
        """Everything except wall time."""
        return {"suite": self.suite, "config": self.config, "results": self.results,
                "assertions": [a.to_dict() for a in self.assertions], "passed": self.passed}

    def payload_json(self) -> str:
        return json.dumps(self.payload(), sort_keys=True)

    def to_dict(self) -> dict:
        return dict(self.payload(), wall_time=self.wall_time)

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=indent)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(d["suite"], d["config"], d["results"],
                   tuple(Assertion.from_dict(a) for a in d["assertions"]), float(d.get("wall_time", 0.0)))

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")


# --------------------------------------------------------------------------
# parameter helpers
# --------------------------------------------------------------------------

def _specs(params: dict, default_names) -> list[tuple[str, hamiltonian.HamiltonianSpec]]:
    if params.get("spec-path"):
        path = Path(params["spec-path"])
        try:
            return [(path.stem, hamiltonian.HamiltonianSpec.load(path))]
        except (OSError, KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read Hamiltonian spec {str(path)!r}: {exc}") from exc
    names = params.get("instances", default_names)
    if isinstance(names, str):
        names = [names]
    try:
        return [(name, hamiltonian.instance(name).spec) for name in names]
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc


_SIZED_SCHEMES = {
    "identity": lambda n: schemes.identity_scheme(n),
    "noisy": lambda n: schemes.noisy_scheme(n),
    "noisy-junk": lambda n: schemes.noisy_scheme(n, junk_qubits=1),
    "noisy-exact-sim": lambda n: schemes.noisy_scheme(n, simulator="noise"),
}


def resolve_scheme(name: str, n: int | None = None) -> qre.QreScheme:
    """Scheme by registry name (sized to ``n`` qubits where that makes sense) or JSON file."""
    if name in _SIZED_SCHEMES:
        return _SIZED_SCHEMES[name](2 if n is None else n)
    if name in schemes.scheme_names():
        return schemes.get_scheme(name)
    path = Path(name)
    if path.exists():
        try:
            return qre.load_scheme(path)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read scheme file {name!r}: {exc}") from exc
    known = dict.fromkeys(list(_SIZED_SCHEMES) + schemes.scheme_names())
    raise ConfigError(f"unknown scheme {name!r}; known: {', '.join(known)}")


def _int_param(params, key, default, lo=1):
    val = params.get(key, default)
    if isinstance(val, bool) or not isinstance(val, (int, np.integer)) or val < lo:
        raise ConfigError(f"parameter {key!r} must be an integer >= {lo}, got {val!r}")
    return int(val)


def _mode(params) -> str:
    mode = params.get("mode", "exact")
    if mode not in ("exact", "mc"):
        raise ConfigError(f"parameter 'mode' must be 'exact' or 'mc', got {mode!r}")
    return mode


def _mc_bound(p_exact: float, trials: int) -> float:
    return MC_SIGMAS * math.sqrt(max(p_exact * (1 - p_exact), 0.0) / trials) + 1.0 / trials


# --------------------------------------------------------------------------
# suites
# --------------------------------------------------------------------------

def _suite_verify_tc(params: dict, seed: int):
    mode, trials = _mode(params), _int_param(params, "trials", 100_000)
    strategies = params.get("strategies", params.get("strategy", ["honest", "uniform", "wrong-basis"]))
    if isinstance(strategies, str):
        strategies = [strategies]
    rows, checks = [], []
    index = 0
    for name, spec in _specs(params, [n for n in hamiltonian.instance_names()
                                     if hamiltonian.instance(n).spec.n <= verify.EXACT_MAX_QUBITS]):
        e0 = hamiltonian.ground(spec).energy
        for text in strategies:
            try:
                strat = verify.parse_strategy(text, spec)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            exact = verify.acceptance_exact(spec, strat) if spec.n <= verify.EXACT_MAX_QUBITS else None
            if mode == "mc":
                res = verify.acceptance_mc(spec, strat, trials, derive_trial_seed(seed, index))
            else:
                if exact is None:
                    raise ConfigError(f"exact mode needs N <= {verify.EXACT_MAX_QUBITS}, got {spec.n}")
                res = exact
            index += 1
            rows.append({"instance": name, "spec-hash": spec.digest(), "strategy": text, "p_acc": res.probability,
                         "method": res.method, "trials": res.trials, "std_error": res.std_error,
                         "ground_energy": e0})
            tag = f"{name}/{text}"
            slack = _mc_bound(exact.probability if exact else res.probability, trials) if mode == "mc" else EXACT_TOL
            if text == "honest":
                checks.append(Assertion(f"completeness {tag}: |p_acc - (1 - E0)|",
                                        abs(res.probability - (1 - e0)), slack))
            else:
                checks.append(Assertion(f"soundness {tag}: p_acc <= 1 - E0", res.probability, 1 - e0 + slack))
            if mode == "mc" and exact is not None:
                checks.append(Assertion(f"monte-carlo {tag}: |p_mc - p_exact|",
                                        abs(res.probability - exact.probability), slack))
    return {"runs": rows}, checks


def _malicious_strategies(n: int, junk: int = 0):
    """Fixed cheating provers; wrong-basis needs exactly ``n`` received qubits, so it is skipped with junk."""
    out = [("uniform", verify.ProverStrategy.uniform()), ("fixed-ones", verify.ProverStrategy.fixed([1] * n, [1] * n))]
    if not junk:
        out.append(("wrong-basis", verify.ProverStrategy.wrong_basis()))
    return out


def _suite_verify_qre(params: dict, seed: int):
    mode, trials = _mode(params), _int_param(params, "trials", 100_000)
    scheme_name = params.get("scheme", "noisy")
    rows, checks = [], []
    index = 0
    for name, spec in _specs(params, [n for n in hamiltonian.instance_names()
                                     if hamiltonian.instance(n).spec.n == 2]):
        s = resolve_scheme(scheme_name, spec.n)
        p = qre.measure_params(s)
        ground = hamiltonian.ground(spec)
        row = {"instance": name, "spec-hash": spec.digest(), "scheme": s.name, "params": p.to_dict()}

        ident = schemes.identity_scheme(spec.n)
        honest = verify.ProverStrategy.honest(ground.state)
        diffs = [abs(qre.protocol_two_run(ident, spec, st).probability - verify.acceptance_exact(spec, st).probability)
                 for st in [honest] + [x for _, x in _malicious_strategies(spec.n)]]
        checks.append(Assertion(f"equivalence {name}: identity encoding matches plain protocol", max(diffs), 1e-9))

        cmp = qre.honest_comparison(s, spec, ground.state)
        row["honest"] = cmp.to_dict()
        checks.append(Assertion(f"completeness {name}/{s.name}: |p_encoded - p_plain|", cmp.difference,
                                cmp.bound + EXACT_TOL))
        row["malicious"] = {}
        for label, strat in _malicious_strategies(spec.n, s.junk_qubits):
            mc = qre.malicious_comparison(s, spec, strat)
            row["malicious"][label] = mc.to_dict()
            checks.append(Assertion(f"soundness {name}/{s.name}/{label}: |p_encoded - p_simulated|",
                                    mc.difference, mc.bound + EXACT_TOL))
        # library thresholds sit at the ground energy itself, so α = β = E0
        gap = qre.completeness_soundness_gap(p, ground.energy, ground.energy)
        row["gap"] = gap.to_dict()
        if mode == "mc":
            est = qre.protocol_two_run(s, spec, honest, mode="mc", trials=trials, seed=derive_trial_seed(seed, index))
            index += 1
            row["honest_mc"] = {"p_acc": est.probability, "std_error": est.std_error, "trials": est.trials}
            checks.append(Assertion(f"monte-carlo {name}/{s.name}: |p_mc - p_exact|",
                                    abs(est.probability - cmp.encoded), _mc_bound(cmp.encoded, trials)))
        rows.append(row)
    return {"runs": rows}, checks


def _suite_noclone(params: dict, seed: int):
    names = params.get("schemes", params.get("scheme", list(schemes.CLASSICAL_ZOO)))
    if isinstance(names, str):
        names = [names]
    ks = params.get("k", [1, 2, 3])
    ks = [ks] if isinstance(ks, int) else list(ks)
    for k in ks:
        if isinstance(k, bool) or not isinstance(k, int) or k < 1:
            raise ConfigError(f"parameter 'k' must hold positive integers, got {k!r}")
    grid = params.get("a-grid")
    results, checks = {}, []
    for name in names:
        s = resolve_scheme(name)
        p = qre.measure_params(s)
        entry = {"params": p.to_dict(), "reports": []}
        for k in ks:
            try:
                rep = nocloning.verify_clone_bound(s, k, grid, p)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            entry["reports"].append(rep.to_dict())
            checks.append(Assertion(f"clone bound {s.name} k={k}: max lhs <= min rhs",
                                    max(rep.lhs), min(rep.rhs_statistical) + EXACT_TOL))
            checks.append(Assertion(f"fidelity bound {s.name} k={k}: min fidelity >= max floor",
                                    min(rep.fidelities), max(rep.fidelity_floors) - EXACT_TOL, ">="))
        if p.classical:
            a_grid = grid or nocloning.default_a_grid(p.delta_hat)
            masses = [[nocloning.gap_set_mass(s, i, a, p) for a in a_grid] for i in range(len(s.family))]
            worst = max(m - p.delta_hat / a for row in masses for m, a in zip(row, a_grid))
            entry["gap_set_mass"] = {"a_grid": list(a_grid), "mass": masses}
            checks.append(Assertion(f"markov {s.name}: max(mass - delta/a)", worst, EXACT_TOL))
            try:
                chain = nocloning.chain_inequality_check(s, p)
            except ValueError:
                chain = None
            if chain is not None:
                entry["chain"] = chain.to_dict()
                checks.append(Assertion(f"chain {s.name}: sqrt(3/4) - sqrt(1/2) <= rhs", chain.lhs,
                                        chain.rhs + EXACT_TOL))
        results[s.name] = entry
    return results, checks


def _suite_blind_attack(params: dict, seed: int):
    backends = params.get("backends", params.get("backend", ["bfk", "mf"]))
    if isinstance(backends, str):
        backends = [backends]
    xi = float(params.get("xi", math.pi / 2))
    trials = _int_param(params, "trials", 20)
    results, checks = {}, []
    expected = abs(math.sin(xi)) / 2
    for bi, backend in enumerate(backends):
        if backend not in blind.BACKENDS:
            raise ConfigError(f"unknown backend {backend!r}; choose bfk or mf")
        rep = blind.blindness_gap_report(backend, xi, derive_trial_seed(seed, bi))
        fids = []
        for t in range(trials):
            rng = np.random.default_rng(derive_trial_seed(derive_trial_seed(seed, bi), t))
            for program in (blind.PROGRAM_I, blind.PROGRAM_X):
                fids.append(blind.run(backend, program, 3, rng, xi).fidelity_to_deviated_target)
        results[backend] = dict(rep.to_dict(), trials=trials, min_fidelity=min(fids))
        checks.append(Assertion(f"blindness gap {backend}: |g - |sin xi|/2|", abs(rep.gap - expected), 1e-9))
        checks.append(Assertion(f"attack {backend}: min fidelity to U e^(i xi Z/2)|+>", min(fids), 1 - 1e-9, ">="))
    return {"xi": xi, "expected_gap": expected, "backends": results}, checks


def _suite_bfk_demo(params: dict, seed: int):
    angles = params.get("angles", [2, 5])
    n = _int_param(params, "n", len(angles) + 1, lo=2)
    xi = float(params.get("xi", 0.0))
    try:
        res = blind.bfk_run([int(a) for a in angles], n, np.random.default_rng(derive_trial_seed(seed, 0)), xi)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    out = {"angles": [int(a) % 16 for a in angles], "n": n, "xi": xi, "transcript": res.transcript,
           "fidelity_to_intended": res.fidelity_to_intended,
           "fidelity_to_deviated_target": res.fidelity_to_deviated_target}
    return out, [Assertion("bfk-demo: fidelity to target", res.fidelity_to_deviated_target, 1 - 1e-9, ">=")]


_RUNNERS = {
    "verify-tc": _suite_verify_tc,
    "verify-qre": _suite_verify_qre,
    "noclone": _suite_noclone,
    "blind-attack": _suite_blind_attack,
    "bfk-demo": _suite_bfk_demo,
}


def _suite_all(params: dict, seed: int):
    results, checks = {}, []
    for i, name in enumerate(_RUNNERS):
        sub_params = params.get(name, {})
        r, c = _RUNNERS[name](sub_params, derive_trial_seed(seed, i))
        results[name] = r
        checks += [Assertion(f"[{name}] {a.name}", a.measured, a.bound, a.relation) for a in c]
    return results, checks


def run_suite(config: ExperimentConfig) -> ExperimentReport:
    start = time.perf_counter()
    runner = _suite_all if config.suite == "all" else _RUNNERS[config.suite]
    results, checks = runner(config.parameters, config.seed)
    report = ExperimentReport(config.suite, config.to_dict(), _plain(results), tuple(checks),
                              time.perf_counter() - start)
    if config.output_path:
        report.save(config.output_path)
    return report
