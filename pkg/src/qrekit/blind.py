"""Blind single-qubit computation on a linear graph state, and the key-release attack.

A wire of ``n`` qubits carries one logical qubit starting in ``|+⟩``.
Measuring wire qubit ``k`` in the basis ``|±_φ⟩ = (|0⟩ ± e^{iφ}|1⟩)/√2``
applies ``X^s H diag(1, e^{-iφ})`` to the logical state and moves it one
qubit along. Qubits ``1..n-1`` are measured; qubit ``n`` holds the output.

Pauli byproducts are tracked as a pending ``X^a Z^b``: the next angle is
adapted to ``(-1)^a φ + bπ`` and the byproduct becomes ``X^s Z^a``. What
remains at the end is exactly the one-time-pad key of the output.

In BFK the client hides every angle behind a random ``θ`` and a random
``rπ`` flip; in MF the server ships graph-state qubits to the client, who
measures them. Either way a server that is later handed the key can first
slip ``e^{iξZ/2}`` in front of the computation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .qcore import (
    H,
    DensityMatrix,
    PureState,
    as_density,
    fidelity_with_pure,
    int_to_bits,
    pauli_xz,
    trace_distance,
)
from .qcore.linalg import DimensionError

MAX_GRAPH_QUBITS = 12
MAX_RUN_QUBITS = 8
OCTANTS = 16
MIN_BRANCH_PROB = 1e-12


@dataclass(frozen=True, order=True)
class AngleOctant:
    """An angle ``kπ/8`` with arithmetic mod 2π."""

    value: int

    def __post_init__(self):
        object.__setattr__(self, "value", int(self.value) % OCTANTS)

    @property
    def radians(self) -> float:
        return self.value * np.pi / 8

    def __add__(self, other) -> "AngleOctant":
        return AngleOctant(self.value + AngleOctant.of(other).value)

    def __neg__(self) -> "AngleOctant":
        return AngleOctant(-self.value)

    @classmethod
    def of(cls, a) -> "AngleOctant":
        return a if isinstance(a, AngleOctant) else cls(int(a))


def _radians(a) -> float:
    return a.radians if isinstance(a, AngleOctant) else float(a)


@dataclass(frozen=True)
class OtpKey:
    x: tuple[int, ...]
    z: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(int(b) & 1 for b in self.x))
        object.__setattr__(self, "z", tuple(int(b) & 1 for b in self.z))
        if len(self.x) != len(self.z):
            raise ValueError(f"key halves differ in length: {len(self.x)} vs {len(self.z)}")


# --------------------------------------------------------------------------
# one-time pad
# --------------------------------------------------------------------------

def _check_key(state, key: OtpKey) -> None:
    n = state.qubits
    if len(key.x) != n:
        raise ValueError(f"key covers {len(key.x)} qubits, state has {n}")


def qotp(state, key: OtpKey):
    """Apply ``⊗ X^{x_j} Z^{z_j}``; keeps pure states pure."""
    _check_key(state, key)
    p = pauli_xz(key.x, key.z)
    return state.evolve(p)


def qotp_unlock(state, key: OtpKey):
    """Undo :func:`qotp` by applying ``(⊗ X^x Z^z)^†``."""
    _check_key(state, key)
    p = pauli_xz(key.x, key.z)
    return state.evolve(np.conj(p).T)


def pad_average(state) -> DensityMatrix:
    """Average of the padded state over all keys (the server's view without the key)."""
    rho = as_density(state)
    n = rho.qubits
    acc = np.zeros_like(rho.matrix)
    for xi in range(1 << n):
        for zi in range(1 << n):
            key = OtpKey(int_to_bits(xi, n), int_to_bits(zi, n))
            acc += qotp(rho, key).matrix
    return DensityMatrix(acc / (1 << (2 * n)))


# --------------------------------------------------------------------------
# graph states and single measurement steps
# --------------------------------------------------------------------------

def _cz_chain_signs(n: int) -> np.ndarray:
    idx = np.arange(1 << n)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    parity = np.sum(bits[:, :-1] & bits[:, 1:], axis=1) & 1 if n > 1 else np.zeros(1 << n, dtype=int)
    return 1 - 2 * parity


def _product_state(singles) -> np.ndarray:
    vec = np.ones(1, dtype=np.complex128)
    for s in singles:
        vec = np.kron(vec, s)
    return vec


def linear_graph_state(n: int) -> PureState:
    """``(Π CZ_{i,i+1}) |+⟩^{⊗n}``."""
    return rotated_graph([0.0] * n)


def rotated_graph(thetas) -> PureState:
    """``(Π CZ_{i,i+1}) ⊗_j |+_{θ_j}⟩`` with ``|+_θ⟩ = (|0⟩ + e^{iθ}|1⟩)/√2``.

    Angles are radians unless given as :class:`AngleOctant`.
    """
    n = len(thetas)
    if not 1 <= n <= MAX_GRAPH_QUBITS:
        raise DimensionError(f"graph size must be 1..{MAX_GRAPH_QUBITS}, got {n}")
    singles = [np.array([1, np.exp(1j * _radians(t))]) / np.sqrt(2) for t in thetas]
    return PureState(_product_state(singles) * _cz_chain_signs(n))


def z_rotations(state: PureState, thetas) -> PureState:
    """Apply ``⊗_j e^{-iθ_j Z/2}`` to every qubit."""
    if len(thetas) != state.qubits:
        raise ValueError("one angle per qubit required")
    diag = _product_state([np.array([np.exp(-0.5j * _radians(t)), np.exp(0.5j * _radians(t))]) for t in thetas])
    return PureState(state.amplitudes * diag)


def apply_to_first(state: PureState, u: np.ndarray) -> PureState:
    a = state.amplitudes.reshape(2, -1)
    return PureState((np.asarray(u) @ a).reshape(-1))


def _branches(state: PureState, angle):
    a = state.amplitudes.reshape(2, -1)
    phase = np.exp(-1j * _radians(angle))
    branches = [(a[0] + phase * a[1]) / np.sqrt(2), (a[0] - phase * a[1]) / np.sqrt(2)]
    return branches, np.array([np.vdot(b, b).real for b in branches])


def outcome_probabilities(state: PureState, angle) -> np.ndarray:
    """Born probabilities of measuring qubit 1 in ``|±_angle⟩``."""
    return _branches(state, angle)[1]


def mbqc_step(state: PureState, angle, outcome: int | None = None,
              rng: np.random.Generator | None = None) -> tuple[int, PureState]:
    """Measure qubit 1 in ``|±_angle⟩`` and return the outcome and the state of the remaining qubits."""
    if state.qubits < 2:
        raise DimensionError("need a wire of at least two qubits")
    branches, probs = _branches(state, angle)
    if outcome is None:
        if rng is None:
            raise ValueError("either an outcome or an rng is required")
        p = np.where(probs < MIN_BRANCH_PROB, 0.0, probs)
        outcome = int(rng.choice(2, p=p / p.sum()))
    if outcome not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    if probs[outcome] < MIN_BRANCH_PROB:
        raise ValueError(f"outcome {outcome} has vanishing probability {probs[outcome]:.3g}")
    return outcome, PureState(branches[outcome] / np.sqrt(probs[outcome]))


def step_gate(angle) -> np.ndarray:
    """Logical gate of one error-free step: ``H diag(1, e^{-iφ})``."""
    return H @ np.diag([1.0, np.exp(-1j * _radians(angle))])


def logical_unitary(angles) -> np.ndarray:
    u = np.eye(2, dtype=np.complex128)
    for a in angles:
        u = step_gate(a) @ u
    return u


def adapted_angle(phi: AngleOctant, a: int, b: int) -> AngleOctant:
    """``(-1)^a φ + bπ`` for a pending byproduct ``X^a Z^b``."""
    phi = AngleOctant.of(phi)
    return (-phi if a else phi) + AngleOctant(8 * b)


# --------------------------------------------------------------------------
# protocol runs
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BlindRunResult:
    backend: str
    xi: float
    server_final_state: DensityMatrix
    intended_output: PureState
    unlocked_state: DensityMatrix
    key: OtpKey
    fidelity_to_deviated_target: float
    transcript: dict = field(default_factory=dict)

    @property
    def fidelity_to_intended(self) -> float:
        return fidelity_with_pure(self.intended_output, self.unlocked_state)


def _attack_rotation(xi: float) -> np.ndarray:
    # e^{iξZ/2}
    return np.diag([np.exp(0.5j * xi), np.exp(-0.5j * xi)])


def _check_program(angles, n: int) -> list[AngleOctant]:
    if not 2 <= n <= MAX_RUN_QUBITS:
        raise DimensionError(f"wire length must be 2..{MAX_RUN_QUBITS}, got {n}")
    if len(angles) != n - 1:
        raise ValueError(f"{n}-qubit wire needs {n - 1} measurement angles, got {len(angles)}")
    return [AngleOctant.of(a) for a in angles]


def _finish(backend, xi, angles, wire: PureState, x: int, z: int, transcript) -> BlindRunResult:
    key = OtpKey([x], [z])
    plus = PureState(np.array([1, 1], dtype=complex) / np.sqrt(2))
    u = logical_unitary(angles)
    intended = plus.evolve(u)
    deviated = plus.evolve(u @ _attack_rotation(xi))
    server = wire.density()
    unlocked = qotp_unlock(server, key)
    transcript = dict(transcript, key={"x": [x], "z": [z]})
    return BlindRunResult(backend, float(xi), server, intended, unlocked, key,
                          fidelity_with_pure(deviated, unlocked), transcript)


def bfk_run(angles, n: int, rng: np.random.Generator, xi: float = 0.0) -> BlindRunResult:
    """One BFK run for the program ``angles`` (octants, one per measured qubit).

    Measured qubits are prepared as ``|+_θ⟩`` with ``θ`` uniform over
    ``{kπ/8 : k = 0..7}``. The output qubit uses ``θ ∈ {0, π}`` so its
    rotation is a Pauli ``Z`` and folds into the pad key. A server
    attacking with ``ξ`` measures qubit 1 at ``δ₁ + ξ``.
    """
    phis = _check_program(angles, n)
    thetas = [AngleOctant(int(t)) for t in rng.integers(0, 8, size=n - 1)]
    t_out = int(rng.integers(2))
    rs = [int(r) for r in rng.integers(0, 2, size=n - 1)]
    wire = rotated_graph(thetas + [AngleOctant(8 * t_out)])
    a = b = 0
    deltas, reported = [], []
    for k, phi in enumerate(phis):
        delta = adapted_angle(phi, a, b) + thetas[k] + AngleOctant(8 * rs[k])
        measured = delta.radians + (xi if k == 0 else 0.0)
        s_rep, wire = mbqc_step(wire, measured, rng=rng)
        s = s_rep ^ rs[k]
        deltas.append(delta.value)
        reported.append(s_rep)
        a, b = s, a
    transcript = {"theta": [t.value for t in thetas], "theta_out": 8 * t_out, "r": rs,
                  "delta": deltas, "outcomes": reported}
    return _finish("bfk", xi, phis, wire, a, b ^ t_out, transcript)


def key_averaged_server_state(angles, n: int, xi: float = 0.0) -> DensityMatrix:
    """Exact BFK output-qubit state averaged over all client secrets and outcomes.

    This is what the server holds when the client never releases the key.
    """
    phis = _check_program(angles, n)
    m = n - 1
    acc = np.zeros((2, 2), dtype=np.complex128)
    for thetas in itertools.product(range(8), repeat=m):
        for rs in itertools.product((0, 1), repeat=m):
            for t_out in (0, 1):
                prior = 1.0 / (8 ** m * 2 ** m * 2)
                branches = [(rotated_graph([AngleOctant(t) for t in thetas] + [AngleOctant(8 * t_out)]), 1.0, 0, 0)]
                for k, phi in enumerate(phis):
                    nxt = []
                    for wire, p, a, b in branches:
                        delta = adapted_angle(phi, a, b) + AngleOctant(thetas[k]) + AngleOctant(8 * rs[k])
                        measured = delta.radians + (xi if k == 0 else 0.0)
                        probs = outcome_probabilities(wire, measured)
                        for s_rep in (0, 1):
                            if probs[s_rep] < MIN_BRANCH_PROB:
                                continue
                            _, post = mbqc_step(wire, measured, outcome=s_rep)
                            nxt.append((post, p * probs[s_rep], s_rep ^ rs[k], a))
                    branches = nxt
                for wire, p, _, _ in branches:
                    acc += prior * p * wire.density().matrix
    return DensityMatrix(acc)


def mf_run(angles, n: int, rng: np.random.Generator, xi: float = 0.0) -> BlindRunResult:
    """One MF run: the server prepares ``|G⟩`` and sends qubits ``1..n-1`` to the client.

    A server attacking with ``ξ`` applies ``e^{iξZ/2}`` to qubit 1 before sending it.
    """
    phis = _check_program(angles, n)
    wire = linear_graph_state(n)
    if xi:
        wire = apply_to_first(wire, _attack_rotation(xi))
    a = b = 0
    measured, outcomes = [], []
    for phi in phis:
        angle = adapted_angle(phi, a, b)
        s, wire = mbqc_step(wire, angle, rng=rng)
        measured.append(angle.value)
        outcomes.append(s)
        a, b = s, a
    return _finish("mf", xi, phis, wire, a, b, {"angles": measured, "outcomes": outcomes})


BACKENDS = {"bfk": bfk_run, "mf": mf_run}

# programs whose logical gate sends |+⟩ to |+⟩ up to phase: H·H = I and H·Z·H = X
PROGRAM_I = (AngleOctant(0), AngleOctant(0))
PROGRAM_X = (AngleOctant(0), AngleOctant(8))


def run(backend: str, angles, n: int, rng: np.random.Generator, xi: float = 0.0) -> BlindRunResult:
    try:
        fn = BACKENDS[backend]
    except KeyError:
        raise ValueError(f"backend must be one of {sorted(BACKENDS)}, got {backend!r}") from None
    return fn(angles, n, rng, xi)


@dataclass(frozen=True, eq=False)
class BlindnessGap:
    backend: str
    xi: float
    gap: float
    out_identity: BlindRunResult
    out_x: BlindRunResult

    def to_dict(self) -> dict:
        return {
            "backend": self.backend,
            "xi": self.xi,
            "gap": self.gap,
            "fidelity_identity": self.out_identity.fidelity_to_deviated_target,
            "fidelity_x": self.out_x.fidelity_to_deviated_target,
        }


def blindness_gap_report(backend: str, xi: float, seed: int = 0) -> BlindnessGap:
    """Attack the key-release protocol for ``U = I`` and ``U = X``.

    Both programs map ``|+⟩`` to ``|+⟩``, so any simulator sees the same
    input. Half the trace distance between the two attacked outputs is a lower
    bound on the simulator's error.
    """
    rng = np.random.default_rng(seed)
    out_i = run(backend, PROGRAM_I, 3, rng, xi)
    out_x = run(backend, PROGRAM_X, 3, rng, xi)
    g = 0.5 * trace_distance(out_i.unlocked_state, out_x.unlocked_state)
    return BlindnessGap(backend, float(xi), g, out_i, out_x)


def blindness_gap(backend: str, xi: float, seed: int = 0) -> float:
    return blindness_gap_report(backend, xi, seed).gap


# --------------------------------------------------------------------------
# client-message statistics
# --------------------------------------------------------------------------

def sample_client_messages(angles, n: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    """``δ`` octants for ``trials`` honest BFK runs, shape ``(trials, n-1)``.

    Every XY-plane measurement along a linear-graph wire gives a uniform
    outcome bit, so outcomes are drawn directly instead of simulating the state.
    """
    phis = np.array([p.value for p in _check_program(angles, n)], dtype=np.int64)
    m = n - 1
    theta = rng.integers(0, 8, size=(trials, m))
    r = rng.integers(0, 2, size=(trials, m))
    s_rep = rng.integers(0, 2, size=(trials, m))
    out = np.empty((trials, m), dtype=np.int64)
    a = np.zeros(trials, dtype=np.int64)
    b = np.zeros(trials, dtype=np.int64)
    for k in range(m):
        adapted = np.where(a == 1, -phis[k], phis[k]) + 8 * b
        out[:, k] = (adapted + theta[:, k] + 8 * r[:, k]) % OCTANTS
        s = s_rep[:, k] ^ r[:, k]
        a, b = s, a
    return out


def octant_histogram(deltas: np.ndarray) -> np.ndarray:
    return np.bincount(np.asarray(deltas).ravel(), minlength=OCTANTS)[:OCTANTS]


def total_variation(h1: np.ndarray, h2: np.ndarray) -> float:
    p, q = h1 / h1.sum(), h2 / h2.sum()
    return 0.5 * float(np.abs(p - q).sum())


def uniformity_pvalue(deltas: np.ndarray) -> float:
    from scipy.stats import chisquare

    return float(chisquare(octant_histogram(deltas)).pvalue)

