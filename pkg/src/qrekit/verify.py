"""BB84-state verification of quantum computing with a trusted center.

The center (or, in the two-round variant, the verifier itself) picks a
uniformly random basis bit ``h`` and bit string ``m`` and hands the prover
``⊗_j H^h|m_j⟩``. The prover answers with two bit strings ``(x, z)``. The
verifier corrects ``m`` by ``z`` (Hadamard basis) or ``x`` (computational
basis), samples a Hamiltonian term and accepts when the corrected bits have
the sign the term penalises least.

Outcomes are indexed ``o = x * 2**N + z`` with ``x`` and ``z`` read as
big-endian integers, matching the qubit order used everywhere else.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable

import numpy as np

from . import kernels
from .hamiltonian import HamiltonianSpec, ground
from .qcore import H, DensityMatrix, Povm, PureState, as_density, int_to_bits, kron_all
from .qcore.linalg import bits_to_int

EXACT_MAX_QUBITS = 4
MC_MAX_QUBITS = 6

STRATEGY_KINDS = ("honest-teleport", "fixed-report", "uniform-random-report", "wrong-basis-measure", "custom-povm")


# --------------------------------------------------------------------------
# messages
# --------------------------------------------------------------------------

def bb84_state(h: int, m) -> PureState:
    m = tuple(int(b) for b in m)
    if h not in (0, 1) or any(b not in (0, 1) for b in m):
        raise ValueError("h and m must be bits")
    u = kron_all([H] * len(m)) if h else None
    psi = PureState.basis(m)
    return psi.evolve(u) if h else psi


@dataclass(frozen=True, eq=False)
class CenterSample:
    h: int
    m: tuple[int, ...]
    state: PureState

    @classmethod
    def draw(cls, n: int, rng: np.random.Generator) -> "CenterSample":
        h = int(rng.integers(2))
        m = tuple(int(b) for b in rng.integers(2, size=n))
        return cls(h, m, bb84_state(h, m))


@dataclass(frozen=True)
class ProverReport:
    x: tuple[int, ...]
    z: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(int(b) for b in self.x))
        object.__setattr__(self, "z", tuple(int(b) for b in self.z))
        if len(self.x) != len(self.z):
            raise ValueError(f"x and z lengths differ: {len(self.x)} vs {len(self.z)}")

    @property
    def index(self) -> int:
        n = len(self.x)
        return (bits_to_int(self.x) << n) | bits_to_int(self.z)

    @classmethod
    def from_index(cls, o: int, n: int) -> "ProverReport":
        return cls(int_to_bits(o >> n, n), int_to_bits(o & ((1 << n) - 1), n))


# --------------------------------------------------------------------------
# prover strategies
# --------------------------------------------------------------------------

def _popcount_parity(a: np.ndarray) -> np.ndarray:
    a = a.copy()
    parity = np.zeros_like(a)
    while np.any(a):
        parity ^= a & 1
        a >>= 1
    return parity


def teleport_vectors(psi: PureState) -> np.ndarray:
    """Rows ``(⊗ Z^z X^x)|ψ⟩`` for every outcome ``o = x·2^N + z``."""
    n, d = psi.qubits, psi.dim
    k = np.arange(d)
    x = np.arange(d)[:, None]
    z = np.arange(d)[:, None]
    shifted = psi.amplitudes[k[None, :] ^ x]  # [x, k]
    signs = 1 - 2 * _popcount_parity(k[None, :] & z)  # [z, k]
    return (shifted[:, None, :] * signs[None, :, :]).reshape(d * d, d)


def honest_povm(psi: PureState) -> Povm:
    """The teleportation measurement as a POVM on the received register alone.

    Bell-measuring qubit j of the received state together with qubit j of
    ``|ψ⟩`` gives outcome (x, z) with probability ``2^-N ⟨φ*|ρ|φ*⟩`` where
    ``φ = (⊗ Z^z X^x)ψ``.
    """
    n = psi.qubits
    phi = np.conj(teleport_vectors(psi))
    effects = np.einsum("oi,oj->oij", phi, np.conj(phi)) / (1 << n)
    labels = tuple((int_to_bits(o >> n, n), int_to_bits(o & ((1 << n) - 1), n)) for o in range(1 << (2 * n)))
    return Povm(labels, effects)


@dataclass(frozen=True, eq=False)
class ProverStrategy:
    kind: str
    resource: PureState | None = None
    report: ProverReport | None = None
    povm: Povm | None = None
    name: str = ""

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.kind == "honest-teleport" and self.resource is None:
            raise ValueError("honest-teleport needs a resource state")
        if self.kind == "fixed-report" and self.report is None:
            raise ValueError("fixed-report needs a report")
        if self.kind == "custom-povm":
            if self.povm is None:
                raise ValueError("custom-povm needs a Povm")
            _povm_order(self.povm)
        if not self.name:
            object.__setattr__(self, "name", self.kind)

    @classmethod
    def honest(cls, psi: PureState) -> "ProverStrategy":
        return cls("honest-teleport", resource=psi, name="honest")

    @classmethod
    def fixed(cls, x, z) -> "ProverStrategy":
        rep = ProverReport(x, z)
        tag = "".join(map(str, rep.x)) + "," + "".join(map(str, rep.z))
        return cls("fixed-report", report=rep, name=f"fixed:{tag}")

    @classmethod
    def uniform(cls) -> "ProverStrategy":
        return cls("uniform-random-report", name="uniform")

    @classmethod
    def wrong_basis(cls) -> "ProverStrategy":
        return cls("wrong-basis-measure", name="wrong-basis")

    @classmethod
    def custom(cls, povm: Povm, name: str = "custom") -> "ProverStrategy":
        return cls("custom-povm", povm=povm, name=name)

    @property
    def report_qubits(self) -> int | None:
        """Length of the reported strings when the strategy fixes it."""
        if self.kind == "honest-teleport":
            return self.resource.qubits
        if self.kind == "fixed-report":
            return len(self.report.x)
        if self.kind == "custom-povm":
            return len(self.povm.labels[0][0])
        return None


def _povm_order(p: Povm) -> np.ndarray:
    """Map effect positions to outcome indices; labels must cover every (x, z)."""
    try:
        n = len(p.labels[0][0])
        order = np.array([ProverReport(*lab).index for lab in p.labels])
    except (TypeError, IndexError, ValueError):
        raise ValueError("custom POVM labels must be (x_bits, z_bits) pairs") from None
    if sorted(order.tolist()) != list(range(1 << (2 * n))):
        raise ValueError(f"custom POVM labels must enumerate all (x, z) in {{0,1}}^{2 * n}")
    return order


def outcome_distribution(strategy: ProverStrategy, rho, n: int) -> np.ndarray:
    """Exact ``P(x, z)`` over outcome indices for a prover holding ``rho``."""
    rho = as_density(rho)
    d = 1 << n
    kind = strategy.kind
    if kind == "uniform-random-report":
        return np.full(d * d, 1.0 / (d * d))
    if kind == "fixed-report":
        if len(strategy.report.x) != n:
            raise ValueError(f"fixed report has length {len(strategy.report.x)}, expected {n}")
        out = np.zeros(d * d)
        out[strategy.report.index] = 1.0
        return out
    if kind == "custom-povm":
        if strategy.report_qubits != n:
            raise ValueError(f"custom POVM reports {strategy.report_qubits} bits, expected {n}")
        if strategy.povm.qubits != rho.qubits:
            raise ValueError(f"custom POVM acts on {strategy.povm.qubits} qubits, state has {rho.qubits}")
        raw = np.real(np.einsum("kij,ji->k", strategy.povm.effects, rho.matrix))
        out = np.zeros(d * d)
        out[_povm_order(strategy.povm)] = raw
        return np.clip(out, 0.0, None)
    if rho.qubits != n:
        raise ValueError(f"received state has {rho.qubits} qubits, expected {n}")
    if kind == "wrong-basis-measure":
        out = np.zeros(d * d)
        out[np.arange(d) * d] = np.real(np.diag(rho.matrix))
        return np.clip(out, 0.0, None)
    psi = strategy.resource
    if psi.qubits != n:
        raise ValueError(f"resource state has {psi.qubits} qubits, expected {n}")
    phi = teleport_vectors(psi)
    vals = np.real(np.einsum("ok,kl,ol->o", np.conj(phi), rho.matrix.T, phi)) / d
    return np.clip(vals, 0.0, None)


def honest_prover_respond(received, e0: PureState, rng: np.random.Generator) -> ProverReport:
    rho = as_density(received)
    if rho.qubits != e0.qubits:
        raise ValueError(f"received {rho.qubits} qubits but resource has {e0.qubits}")
    return sample_report(outcome_distribution(ProverStrategy.honest(e0), rho, e0.qubits), e0.qubits, rng)


def sample_report(dist: np.ndarray, n: int, rng: np.random.Generator) -> ProverReport:
    p = np.asarray(dist, dtype=float)
    p = np.where(p < 1e-12, 0.0, p)
    return ProverReport.from_index(int(rng.choice(p.size, p=p / p.sum())), n)


# --------------------------------------------------------------------------
# verifier
# --------------------------------------------------------------------------

def corrected_bits(h: int, m, report: ProverReport) -> tuple[int, ...]:
    key = report.z if h else report.x
    return tuple(int(a) ^ int(b) for a, b in zip(m, key))


def verifier_decide(h: int, m, report: ProverReport, term) -> int:
    """Accept iff ``(-1)^{m'_i} (-1)^{m'_j} = -s`` for the sampled term ``(i, j, s)``."""
    i, j, s = term[0], term[1], term[-1]
    if len(m) != len(report.x):
        raise ValueError("m and report lengths differ")
    if not (1 <= i < j <= len(m)):
        raise ValueError(f"term indices ({i}, {j}) out of range")
    mp = corrected_bits(h, m, report)
    return int((-1) ** (mp[i - 1] + mp[j - 1]) == -s)


def acceptance_table(spec: HamiltonianSpec) -> np.ndarray:
    """``P_V(acc | c)`` for every corrected bit string ``c``, terms marginalised."""
    n = spec.n
    c = np.arange(1 << n)
    acc = np.zeros(1 << n)
    for t in spec.terms:
        parity = ((c >> (n - t.i)) ^ (c >> (n - t.j))) & 1
        acc += t.p * (parity == (1 if t.s == 1 else 0))
    return acc


def _term_arrays(spec: HamiltonianSpec):
    w = np.array([t.p for t in spec.terms])
    cum = np.cumsum(w)
    cum /= cum[-1]
    cum[-1] = 1.0
    ti = np.array([t.i - 1 for t in spec.terms], dtype=np.int64)
    tj = np.array([t.j - 1 for t in spec.terms], dtype=np.int64)
    tpar = np.array([1 if t.s == 1 else 0 for t in spec.terms], dtype=np.int64)
    return cum, ti, tj, tpar


# --------------------------------------------------------------------------
# acceptance probability
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class AcceptanceResult:
    probability: float
    method: str
    trials: int = 0
    std_error: float = 0.0

    def __post_init__(self):
        if not -1e-12 <= self.probability <= 1 + 1e-12:
            raise ValueError(f"probability {self.probability} outside [0, 1]")
        object.__setattr__(self, "probability", min(max(float(self.probability), 0.0), 1.0))
        if self.method not in ("exact", "monte-carlo"):
            raise ValueError(f"unknown method {self.method!r}")


Preparer = Callable[[int, tuple], DensityMatrix]


def bb84_preparer(h: int, m: tuple) -> DensityMatrix:
    return bb84_state(h, m).density()


def outcome_table(n: int, strategy: ProverStrategy, prepare: Preparer = bb84_preparer) -> np.ndarray:
    """``probs[h, m, o]``: prover outcome distribution for every center setting."""
    d = 1 << n
    probs = np.zeros((2, d, d * d))
    for h in (0, 1):
        for mi in range(d):
            probs[h, mi] = outcome_distribution(strategy, prepare(h, int_to_bits(mi, n)), n)
    return probs


def acceptance_from_table(spec: HamiltonianSpec, probs: np.ndarray) -> float:
    return float(kernels.expected_acceptance(np.ascontiguousarray(probs), acceptance_table(spec), spec.n))


def acceptance_exact(spec: HamiltonianSpec, strategy: ProverStrategy, prepare: Preparer = bb84_preparer) -> AcceptanceResult:
    if spec.n > EXACT_MAX_QUBITS:
        raise ValueError(f"exact mode is limited to N <= {EXACT_MAX_QUBITS}, got {spec.n}")
    p = acceptance_from_table(spec, outcome_table(spec.n, strategy, prepare))
    return AcceptanceResult(p, "exact")


def mc_from_table(spec: HamiltonianSpec, probs: np.ndarray, trials: int, seed: int) -> AcceptanceResult:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    n, d = spec.n, 1 << spec.n
    cum = np.cumsum(probs.reshape(2 * d, d * d), axis=1)
    cum /= cum[:, -1:]
    cum[:, -1] = 1.0
    term_cum, ti, tj, tpar = _term_arrays(spec)
    master = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
    hits = int(kernels.mc_acceptance(master, int(trials), n, np.ascontiguousarray(cum), term_cum, ti, tj, tpar))
    p = hits / trials
    return AcceptanceResult(p, "monte-carlo", int(trials), float(np.sqrt(p * (1 - p) / trials)))


def acceptance_mc(spec: HamiltonianSpec, strategy: ProverStrategy, trials: int, seed: int,
                  prepare: Preparer = bb84_preparer) -> AcceptanceResult:
    """Monte Carlo estimate; each trial draws (h, m), outcome and term from its own counter-derived seed."""
    if spec.n > MC_MAX_QUBITS:
        raise ValueError(f"Monte Carlo mode is limited to N <= {MC_MAX_QUBITS}, got {spec.n}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    return mc_from_table(spec, outcome_table(spec.n, strategy, prepare), trials, seed)


def soundness_ceiling(spec: HamiltonianSpec) -> float:
    """Best acceptance any prover can reach: 1 minus the ground energy."""
    return 1.0 - ground(spec).energy


# --------------------------------------------------------------------------
# single protocol execution
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Message:
    step: int
    sender: str
    receiver: str
    content: dict


@dataclass(frozen=True, eq=False)
class ProtocolTranscript:
    messages: tuple[Message, ...]
    term: tuple[int, int]
    accepted: bool
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "messages": [m.__dict__ for m in self.messages],
            "term": list(self.term),
            "accepted": self.accepted,
        }


def run_once(spec: HamiltonianSpec, strategy: ProverStrategy, rng: np.random.Generator,
             trusted_center: bool = True) -> ProtocolTranscript:
    """One run of the protocol, logging every classical message.

    With ``trusted_center`` the center prepares the state and tells the
    verifier ``(h, m)``; otherwise the verifier prepares the state itself.
    """
    n = spec.n
    sample = CenterSample.draw(n, rng)
    source = "center" if trusted_center else "verifier"
    msgs = [Message(1, source, "prover", {"qubits": n})]
    if trusted_center:
        msgs.append(Message(1, "center", "verifier", {"h": sample.h, "m": list(sample.m)}))
    report = sample_report(outcome_distribution(strategy, sample.state.density(), n), n, rng)
    msgs.append(Message(2, "prover", "verifier", {"x": list(report.x), "z": list(report.z)}))
    weights = np.array([t.p for t in spec.terms])
    t = spec.terms[int(rng.choice(len(weights), p=weights / weights.sum()))]
    ok = bool(verifier_decide(sample.h, sample.m, report, (t.i, t.j, t.s)))
    return ProtocolTranscript(tuple(msgs), (t.i, t.j), ok)


def enumerate_acceptance(spec: HamiltonianSpec, strategy: ProverStrategy) -> float:
    """Reference evaluation: loops over every (h, m, x, z, term) with ``verifier_decide``."""
    n = spec.n
    total = 0.0
    for h in (0, 1):
        for m in product((0, 1), repeat=n):
            dist = outcome_distribution(strategy, bb84_state(h, m).density(), n)
            for o, p in enumerate(dist):
                if p == 0:
                    continue
                rep = ProverReport.from_index(o, n)
                total += p * sum(t.p * verifier_decide(h, m, rep, (t.i, t.j, t.s)) for t in spec.terms)
    return total / (1 << (n + 1))


def parse_strategy(text: str, spec: HamiltonianSpec) -> ProverStrategy:
    """CLI names: ``honest``, ``uniform``, ``wrong-basis``, ``fixed:XBITS,ZBITS``."""
    if text == "honest":
        return ProverStrategy.honest(ground(spec).state)
    if text == "uniform":
        return ProverStrategy.uniform()
    if text == "wrong-basis":
        return ProverStrategy.wrong_basis()
    if text.startswith("fixed:"):
        try:
            xs, zs = text[len("fixed:"):].split(",")
            strat = ProverStrategy.fixed([int(c) for c in xs], [int(c) for c in zs])
        except ValueError:
            raise ValueError(f"bad fixed strategy {text!r}; expected fixed:XBITS,ZBITS") from None
        if len(strat.report.x) != spec.n or any(b not in (0, 1) for b in strat.report.x + strat.report.z):
            raise ValueError(f"fixed strategy needs {spec.n}-bit strings")
        return strat
    raise ValueError(f"unknown strategy {text!r}; choose honest, uniform, wrong-basis or fixed:XBITS,ZBITS")
