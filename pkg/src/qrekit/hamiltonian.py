"""Two-local XX/ZZ Hamiltonians of the BB84 energy test.

Each term (i, j, p, s) contributes

    (p / 2) * [ (I + s X_i X_j) / 2 + (I + s Z_i Z_j) / 2 ]

so the full operator has spectrum inside [0, 1] whenever the weights sum to 1.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .qcore import PureState, X, Z, embed, hermitian_eig

MAX_QUBITS = 8
JACOBI_FALLBACK_QUBITS = 6


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class Term:
    i: int
    j: int
    p: float
    s: int


@dataclass(frozen=True)
class HamiltonianSpec:
    n: int
    terms: tuple[Term, ...]

    def __post_init__(self):
        terms = tuple(t if isinstance(t, Term) else Term(*t) for t in self.terms)
        object.__setattr__(self, "terms", terms)
        if not 1 <= self.n <= MAX_QUBITS:
            raise ValueError(f"n must be in 1..{MAX_QUBITS}, got {self.n}")
        if not terms:
            raise ValueError("at least one term is required")
        for t in terms:
            if not (1 <= t.i < t.j <= self.n):
                raise ValueError(f"term indices must satisfy 1 <= i < j <= n, got ({t.i}, {t.j})")
            if not t.p > 0:
                raise ValueError(f"term weight must be positive, got {t.p}")
            if t.s not in (1, -1):
                raise ValueError(f"term sign must be +1 or -1, got {t.s}")
        total = sum(t.p for t in terms)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"term weights must sum to 1, got {total!r}")

    def to_dict(self) -> dict:
        return {"n": self.n, "terms": [{"i": t.i, "j": t.j, "p": t.p, "s": t.s} for t in self.terms]}

    @classmethod
    def from_dict(cls, d: dict) -> "HamiltonianSpec":
        return cls(int(d["n"]), tuple(Term(int(t["i"]), int(t["j"]), float(t["p"]), int(t["s"])) for t in d["terms"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def load(cls, path) -> "HamiltonianSpec":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class GroundSolution:
    energy: float
    state: PureState
    residual: float


def term_operator(t: Term, n: int) -> np.ndarray:
    d = 1 << n
    xx = embed(np.kron(X, X), [t.i, t.j], n)
    zz = embed(np.kron(Z, Z), [t.i, t.j], n)
    eye = np.eye(d)
    return 0.5 * ((eye + t.s * xx) / 2 + (eye + t.s * zz) / 2)


def build(spec: HamiltonianSpec) -> np.ndarray:
    op = np.zeros((1 << spec.n, 1 << spec.n), dtype=np.complex128)
    for t in spec.terms:
        op += t.p * term_operator(t, spec.n)
    return op


def energy(spec: HamiltonianSpec, psi: PureState) -> float:
    if psi.qubits != spec.n:
        raise ValueError(f"state has {psi.qubits} qubits, Hamiltonian has {spec.n}")
    a = psi.amplitudes
    return float(np.real(np.vdot(a, build(spec) @ a)))


def _residual(hm: np.ndarray, v: np.ndarray, lam: float) -> float:
    return float(np.linalg.norm(hm @ v - lam * v))


def _power_ground(hm: np.ndarray, rng: np.random.Generator, tol: float, max_iter: int):
    d = hm.shape[0]
    shifted = 1.1 * np.eye(d) - hm
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v /= np.linalg.norm(v)
    lam = float(np.real(np.vdot(v, hm @ v)))
    for _ in range(max_iter):
        w = shifted @ v
        v = w / np.linalg.norm(w)
        lam = float(np.real(np.vdot(v, hm @ v)))
        if _residual(hm, v, lam) < tol:
            break
    return lam, v


def ground(spec: HamiltonianSpec, seed: int = 0, tol: float = 1e-10, max_iter: int = 20000) -> GroundSolution:
    """Lowest eigenpair by shifted power iteration, with a dense Jacobi fallback for N <= 6."""
    hm = build(spec)
    lam, v = _power_ground(hm, np.random.default_rng(seed), tol, max_iter)
    res = _residual(hm, v, lam)
    if res > 1e-8:
        if spec.n > JACOBI_FALLBACK_QUBITS:
            raise ConvergenceError(f"ground state residual {res:.3g} after {max_iter} iterations")
        w, vecs = hermitian_eig(hm)
        lam, v = float(w[0]), vecs[:, 0]
        res = _residual(hm, v, lam)
    # fix the global phase: largest-magnitude amplitude real positive
    k = int(np.argmax(np.abs(v)))
    v = v * np.exp(-1j * np.angle(v[k]))
    return GroundSolution(min(max(lam, 0.0), 1.0), PureState.normalized(v), res)


# --------------------------------------------------------------------------
# instance library: thresholds are computed from exact diagonalisation
# --------------------------------------------------------------------------

_LIBRARY = {
    "bell-pair": HamiltonianSpec(2, ((1, 2, 1.0, -1),)),
    "singlet": HamiltonianSpec(2, ((1, 2, 1.0, 1),)),
    "chain3-mixed": HamiltonianSpec(3, ((1, 2, 0.5, -1), (2, 3, 0.5, 1))),
    "triangle-frustrated": HamiltonianSpec(3, ((1, 2, 0.5, 1), (2, 3, 0.25, 1), (1, 3, 0.25, 1))),
    "triangle-weighted": HamiltonianSpec(3, ((1, 2, 0.5, -1), (2, 3, 0.3, 1), (1, 3, 0.2, -1))),
    "ring4": HamiltonianSpec(4, ((1, 2, 0.25, 1), (2, 3, 0.25, 1), (3, 4, 0.25, 1), (1, 4, 0.25, 1))),
}


@dataclass(frozen=True, eq=False)
class Instance:
    name: str
    spec: HamiltonianSpec
    ground_energy: float

    @property
    def alpha(self) -> float:
        """Yes-side threshold: the ground energy is at most this value."""
        return self.ground_energy

    @property
    def beta(self) -> float:
        """No-side threshold: the ground energy is at least this value."""
        return self.ground_energy


def instance_names() -> list[str]:
    return list(_LIBRARY)


def instance(name: str) -> Instance:
    try:
        spec = _LIBRARY[name]
    except KeyError:
        raise KeyError(f"unknown instance {name!r}; known: {', '.join(_LIBRARY)}") from None
    w = hermitian_eig(build(spec))[0]
    return Instance(name, spec, float(max(w[0], 0.0)))
