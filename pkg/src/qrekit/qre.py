"""Restricted quantum randomized encodings and the two-round protocol built on them.

A scheme bundles the target operation ``F``, the encoding ``F̂``, a decoder
``Dec`` with ``Dec∘F̂ ≈ F`` and a simulator ``Sim`` with ``Sim∘F ≈ F̂`` over a
finite family of inputs. :func:`measure_params` reports how good both
approximations really are, as trace distances maximised over the family.

The protocol side replaces the verifier's BB84 challenge ``⊗H^h|m_j⟩`` by the
encoding ``F̂(σ_{h,m})`` of a state that ``F`` maps to that challenge (plus a
fixed junk register). The honest prover decodes and discards the junk
before teleporting; any other prover measures the encoding directly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import verify
from .hamiltonian import HamiltonianSpec
from .qcore import (
    H,
    Channel,
    DensityMatrix,
    as_density,
    int_to_bits,
    kron_all,
    partial_trace,
    tensor,
    trace_distance,
    trace_out_last,
)
from .qcore.linalg import DimensionError

PREMISE_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class QreScheme:
    name: str
    target: Channel
    encode: Channel
    decode: Channel
    simulator: Channel
    family: tuple[DensityMatrix, ...]
    junk_qubits: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", tuple(as_density(r) for r in self.family))
        f, e, d, s = self.target, self.encode, self.decode, self.simulator
        checks = [
            (e.in_qubits == f.in_qubits, "encode input must match F input"),
            (d.in_qubits == e.out_qubits, "decode input must match encode output"),
            (d.out_qubits == f.out_qubits, "decode output must match F output"),
            (s.in_qubits == f.out_qubits, "simulator input must match F output"),
            (s.out_qubits == e.out_qubits, "simulator output must match encode output"),
            (0 <= self.junk_qubits <= f.out_qubits, "junk qubits exceed F output"),
        ]
        for ok, msg in checks:
            if not ok:
                raise DimensionError(f"{self.name}: {msg}")
        for rho in self.family:
            if rho.qubits != f.in_qubits:
                raise DimensionError(f"{self.name}: family state has {rho.qubits} qubits, F takes {f.in_qubits}")

    @property
    def payload_qubits(self) -> int:
        """Qubits of F's output that carry the challenge (everything but the junk)."""
        return self.target.out_qubits - self.junk_qubits


@dataclass(frozen=True)
class SchemeParams:
    delta_hat: float
    eps_hat: float
    classical: bool
    decoder_kraus: int = 0
    decoder_qubits: int = 0

    def __post_init__(self):
        for name in ("delta_hat", "eps_hat"):
            val = getattr(self, name)
            if not -1e-12 <= val <= 1 + 1e-12:
                raise ValueError(f"{name} = {val} outside [0, 1]")
            object.__setattr__(self, name, min(max(float(val), 0.0), 1.0))

    def to_dict(self) -> dict:
        return {
            "delta_hat": self.delta_hat,
            "eps_hat": self.eps_hat,
            "classical": self.classical,
            "decoder_kraus": self.decoder_kraus,
            "decoder_qubits": self.decoder_qubits,
        }


def correctness_errors(s: QreScheme, family=None) -> list[float]:
    fam = s.family if family is None else family
    return [trace_distance(s.decode(s.encode(r)), s.target(r)) for r in fam]


def privacy_errors(s: QreScheme, family=None) -> list[float]:
    fam = s.family if family is None else family
    return [trace_distance(s.encode(r), s.simulator(s.target(r))) for r in fam]


def measure_params(s: QreScheme, family=None) -> SchemeParams:
    """Exact ``(δ̂, ε̂)`` over the family, plus the classical-encoding flag.

    The decoder's Kraus count and width are recorded as a size proxy for its
    complexity.
    """
    fam = s.family if family is None else tuple(as_density(r) for r in family)
    if not fam:
        raise ValueError(f"{s.name}: family is empty")
    return SchemeParams(
        max(correctness_errors(s, fam)),
        max(privacy_errors(s, fam)),
        all(s.encode(r).is_diagonal(1e-9) for r in fam),
        s.decode.count,
        s.decode.in_qubits,
    )


# --------------------------------------------------------------------------
# the two-round protocol on top of a scheme
# --------------------------------------------------------------------------

def sigma_state(h: int, m) -> DensityMatrix:
    """Default input ``⊗ H^{h+1}|m_j⟩``, which ``H^{⊗N}`` conjugation maps to the BB84 challenge."""
    n = len(m)
    psi = verify.bb84_state(0, m)
    if h == 0:
        psi = psi.evolve(kron_all([H] * n))
    return psi.density()


def sigma_family(n: int, sigma=sigma_state) -> tuple[DensityMatrix, ...]:
    return tuple(sigma(h, int_to_bits(mi, n)) for h in (0, 1) for mi in range(1 << n))


def junk_state(s: QreScheme, sigma=sigma_state) -> DensityMatrix | None:
    if s.junk_qubits == 0:
        return None
    rho0 = s.target(sigma(0, (0,) * s.payload_qubits))
    keep = range(s.payload_qubits + 1, s.target.out_qubits + 1)
    return partial_trace(rho0, keep)


def check_premise(s: QreScheme, sigma=sigma_state) -> DensityMatrix | None:
    """Verify ``F(σ_{h,m}) = challenge(h, m) ⊗ η_junk`` for every setting; returns ``η_junk``."""
    n = s.payload_qubits
    if s.target.in_qubits != sigma(0, (0,) * n).qubits:
        raise DimensionError(f"{s.name}: σ states do not fit F's input")
    eta = junk_state(s, sigma)
    for h in (0, 1):
        for mi in range(1 << n):
            m = int_to_bits(mi, n)
            want = verify.bb84_state(h, m).density()
            if eta is not None:
                want = tensor(want, eta)
            got = s.target(sigma(h, m))
            gap = float(np.max(np.abs(got.matrix - want.matrix)))
            if gap > PREMISE_TOL:
                raise ValueError(
                    f"{s.name}: F(σ) is not the BB84 challenge times a fixed junk state at h={h}, m={m} "
                    f"(deviation {gap:.3g})"
                )
    return eta


def _is_honest(strategy: verify.ProverStrategy) -> bool:
    return strategy.kind == "honest-teleport"


def two_round_preparer(s: QreScheme, decode: bool, sigma=sigma_state):
    """What the prover measures in the two-round protocol at setting (h, m)."""
    def prepare(h, m):
        received = s.encode(sigma(h, m))
        if not decode:
            return received
        return trace_out_last(s.decode(received), s.junk_qubits)
    return prepare


def _run(spec, strategy, prepare, mode, trials, seed):
    if mode == "exact":
        return verify.acceptance_exact(spec, strategy, prepare)
    if mode == "mc":
        return verify.acceptance_mc(spec, strategy, trials, seed, prepare)
    raise ValueError(f"mode must be 'exact' or 'mc', got {mode!r}")


def protocol_two_run(s: QreScheme, spec: HamiltonianSpec, strategy: verify.ProverStrategy,
                     mode: str = "exact", trials: int = 100_000, seed: int = 0,
                     decode: bool | None = None, sigma=sigma_state) -> verify.AcceptanceResult:
    """Acceptance of the encoded two-round protocol.

    By default the honest teleporting prover decodes and drops the junk; any
    other strategy measures the raw encoding ``F̂(σ_{h,m})``.
    """
    if spec.n != s.payload_qubits:
        raise DimensionError(f"{s.name}: scheme carries {s.payload_qubits} qubits, Hamiltonian has {spec.n}")
    check_premise(s, sigma)
    decode = _is_honest(strategy) if decode is None else decode
    return _run(spec, strategy, two_round_preparer(s, decode, sigma), mode, trials, seed)


def simulated_prover_preparer(s: QreScheme, eta: DensityMatrix | None):
    """State seen by the simulated prover: ``Sim(challenge ⊗ η_junk)``."""
    def prepare(h, m):
        rho = verify.bb84_state(h, m).density()
        if eta is not None:
            rho = tensor(rho, eta)
        return s.simulator(rho)
    return prepare


@dataclass(frozen=True)
class Comparison:
    encoded: float
    reference: float
    bound: float

    @property
    def difference(self) -> float:
        return abs(self.encoded - self.reference)

    @property
    def margin(self) -> float:
        return self.bound - self.difference

    @property
    def holds(self) -> bool:
        return self.difference <= self.bound + 1e-8

    def to_dict(self) -> dict:
        return {"encoded": self.encoded, "reference": self.reference, "difference": self.difference,
                "bound": self.bound, "margin": self.margin, "holds": self.holds}


def honest_comparison(s: QreScheme, spec: HamiltonianSpec, psi, sigma=sigma_state) -> Comparison:
    """Honest acceptance with the encoding versus the plain BB84 protocol; bound ``2δ̂``."""
    strat = verify.ProverStrategy.honest(psi)
    params = measure_params(s, sigma_family(s.payload_qubits, sigma))
    p2 = protocol_two_run(s, spec, strat, sigma=sigma).probability
    p3 = verify.acceptance_exact(spec, strat).probability
    return Comparison(p2, p3, 2 * params.delta_hat)


def malicious_comparison(s: QreScheme, spec: HamiltonianSpec, strategy: verify.ProverStrategy,
                         sigma=sigma_state) -> Comparison:
    """A measurement on ``F̂(σ)`` versus the same measurement after the simulator; bound ``2ε̂``.

    The reference prover appends ``η_junk`` to its BB84 challenge, applies
    ``Sim`` and then measures, so both sides apply the same POVM to states
    that differ by at most ``ε̂``.
    """
    eta = check_premise(s, sigma)
    params = measure_params(s, sigma_family(s.payload_qubits, sigma))
    encoded = protocol_two_run(s, spec, strategy, decode=False, sigma=sigma).probability
    reference = verify.acceptance_exact(spec, strategy, simulated_prover_preparer(s, eta)).probability
    return Comparison(encoded, reference, 2 * params.eps_hat)


@dataclass(frozen=True)
class GapResult:
    c_prime: float
    s_prime: float

    @property
    def gap(self) -> float:
        return self.c_prime - self.s_prime

    @property
    def positive(self) -> bool:
        return self.gap > 1e-12

    def to_dict(self) -> dict:
        return {"c_prime": self.c_prime, "s_prime": self.s_prime, "gap": self.gap, "positive": self.positive}


def completeness_soundness_gap(params, alpha: float, beta: float) -> GapResult:
    """``c' = 1 − α − 2δ̂`` and ``s' = 1 − β + 2ε̂`` from measured parameters (or a scheme)."""
    if isinstance(params, QreScheme):
        params = measure_params(params)
    return GapResult((1 - alpha) - 2 * params.delta_hat, (1 - beta) + 2 * params.eps_hat)


# --------------------------------------------------------------------------
# JSON files
# --------------------------------------------------------------------------

def _matrix_to_json(m: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(m)]


def _matrix_from_json(rows) -> np.ndarray:
    a = np.asarray(rows, dtype=float)
    if a.ndim != 3 or a.shape[2] != 2:
        raise ValueError("matrices must be nested lists of [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def _channel_to_json(c: Channel) -> dict:
    return {"in_qubits": c.in_qubits, "out_qubits": c.out_qubits, "kraus": [_matrix_to_json(k) for k in c.kraus]}


def _channel_from_json(d: dict, label: str) -> Channel:
    try:
        ks = np.stack([_matrix_from_json(k) for k in d["kraus"]])
        return Channel(int(d["in_qubits"]), int(d["out_qubits"]), ks, label)
    except KeyError as e:
        raise ValueError(f"channel {label!r} missing field {e.args[0]!r}") from None


def scheme_to_dict(s: QreScheme) -> dict:
    return {
        "name": s.name,
        "junk_qubits": s.junk_qubits,
        "target": _channel_to_json(s.target),
        "encode": _channel_to_json(s.encode),
        "decode": _channel_to_json(s.decode),
        "simulator": _channel_to_json(s.simulator),
        "family": [_matrix_to_json(r.matrix) for r in s.family],
    }


def scheme_from_dict(d: dict) -> QreScheme:
    for key in ("name", "target", "encode", "decode", "simulator", "family"):
        if key not in d:
            raise ValueError(f"scheme file missing field {key!r}")
    return QreScheme(
        str(d["name"]),
        _channel_from_json(d["target"], "target"),
        _channel_from_json(d["encode"], "encode"),
        _channel_from_json(d["decode"], "decode"),
        _channel_from_json(d["simulator"], "simulator"),
        tuple(DensityMatrix(_matrix_from_json(r)) for r in d["family"]),
        int(d.get("junk_qubits", 0)),
    )


def save_scheme(s: QreScheme, path) -> None:
    Path(path).write_text(json.dumps(scheme_to_dict(s)))


def load_scheme(path) -> QreScheme:
    return scheme_from_dict(json.loads(Path(path).read_text()))
