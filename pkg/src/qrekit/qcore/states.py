"""Pure and mixed qubit states plus the distance measures used throughout."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    DimensionError,
    X,
    Z,
    as_matrix,
    eigvalsh,
    hermiticity_error,
    is_psd,
    qubits_of,
)

MAX_PURE_QUBITS = 16
MAX_DENSITY_QUBITS = 8


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        n = qubits_of(amps.size)
        if n > MAX_PURE_QUBITS:
            raise DimensionError(f"{n} qubits exceeds pure-state cap {MAX_PURE_QUBITS}")
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > 1e-9:
            raise ValueError(f"state is not normalised (|psi|^2 = {norm2:.12g})")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def qubits(self) -> int:
        return qubits_of(self.amplitudes.size)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    @classmethod
    def normalized(cls, amps) -> "PureState":
        amps = np.asarray(amps, dtype=np.complex128).reshape(-1)
        return cls(amps / np.linalg.norm(amps))

    @classmethod
    def basis(cls, bits) -> "PureState":
        bits = [int(b) for b in bits]
        amps = np.zeros(1 << len(bits), dtype=np.complex128)
        idx = 0
        for b in bits:
            idx = (idx << 1) | b
        amps[idx] = 1.0
        return cls(amps)

    def density(self) -> "DensityMatrix":
        a = self.amplitudes
        return DensityMatrix(np.outer(a, np.conj(a)))

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, np.conj(self.amplitudes))

    def evolve(self, u) -> "PureState":
        return PureState.normalized(as_matrix(u) @ self.amplitudes)

    def tensor(self, other: "PureState") -> "PureState":
        return PureState(np.kron(self.amplitudes, other.amplitudes))

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, "density matrix")
        if m.shape[0] != m.shape[1]:
            raise DimensionError(f"density matrix must be square, got {m.shape}")
        n = qubits_of(m.shape[0])
        if n > MAX_DENSITY_QUBITS:
            raise DimensionError(f"{n} qubits exceeds density-matrix cap {MAX_DENSITY_QUBITS}")
        herr = hermiticity_error(m)
        if herr > 1e-9:
            raise ValueError(f"density matrix not Hermitian (error {herr:.3g})")
        tr = complex(np.trace(m))
        if abs(tr - 1.0) > 1e-9:
            raise ValueError(f"density matrix trace is {tr.real:.12g}, expected 1")
        if not is_psd(m, 1e-8):
            raise ValueError("density matrix has an eigenvalue below -1e-8")
        object.__setattr__(self, "matrix", _frozen(0.5 * (m + np.conj(m).T)))

    @property
    def qubits(self) -> int:
        return qubits_of(self.matrix.shape[0])

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityMatrix":
        return cls(np.eye(1 << n) / (1 << n))

    def tensor(self, other: "DensityMatrix") -> "DensityMatrix":
        return DensityMatrix(np.kron(self.matrix, other.matrix))

    def evolve(self, u) -> "DensityMatrix":
        u = as_matrix(u)
        return DensityMatrix(u @ self.matrix @ np.conj(u).T)

    def expectation(self, op) -> float:
        return float(np.real(np.trace(as_matrix(op) @ self.matrix)))

    def is_diagonal(self, atol: float = 1e-9) -> bool:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return bool(np.max(np.abs(off), initial=0.0) <= atol)


def as_density(state) -> DensityMatrix:
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, PureState):
        return state.density()
    arr = np.asarray(state, dtype=np.complex128)
    if arr.ndim == 1:
        return PureState(arr).density()
    return DensityMatrix(arr)


def tensor(*states) -> DensityMatrix:
    out = as_density(states[0]).matrix
    for s in states[1:]:
        out = np.kron(out, as_density(s).matrix)
    return DensityMatrix(out)


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of ``rho - sigma``, from the Jacobi spectrum of the difference."""
    a = as_density(rho).matrix
    b = as_density(sigma).matrix
    if a.shape != b.shape:
        raise DimensionError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(min(1.0, 0.5 * np.sum(np.abs(eigvalsh(a - b)))))


def fidelity_with_pure(psi: PureState, rho) -> float:
    """<psi| rho |psi> for pure ``psi``."""
    a = psi.amplitudes
    m = as_density(rho).matrix
    if m.shape[0] != a.size:
        raise DimensionError("dimension mismatch")
    return float(np.real(np.vdot(a, m @ a)))


def pure_fidelity(a: PureState, b: PureState) -> float:
    return abs(a.overlap(b)) ** 2


_LETTERS = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"


def partial_trace(rho, keep) -> DensityMatrix:
    """Reduced state on the 1-based qubit indices in ``keep`` (kept in ascending order)."""
    m = as_density(rho).matrix
    n = qubits_of(m.shape[0])
    keep = sorted({int(k) for k in keep})
    if any(k < 1 or k > n for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {n} qubits")
    if len(keep) == n:
        return DensityMatrix(m)
    row = list(_LETTERS[:n])
    col = list(_LETTERS[n:2 * n])
    for q in range(1, n + 1):
        if q not in keep:
            col[q - 1] = row[q - 1]
    out = "".join(row[q - 1] for q in keep) + "".join(col[q - 1] for q in keep)
    t = np.einsum("".join(row) + "".join(col) + "->" + out, m.reshape([2] * (2 * n)))
    d = 1 << len(keep)
    return DensityMatrix(t.reshape(d, d))


def trace_out_last(rho, count: int) -> DensityMatrix:
    m = as_density(rho).matrix
    n = qubits_of(m.shape[0])
    if count == 0:
        return DensityMatrix(m)
    return partial_trace(m, range(1, n - count + 1))


def bell_state(x: int = 0, z: int = 0) -> PureState:
    """(I (x) X^x Z^z)|Phi+>."""
    phi = np.array([1, 0, 0, 1], dtype=np.complex128) / np.sqrt(2)
    p = np.linalg.matrix_power(X, x) @ np.linalg.matrix_power(Z, z)
    return PureState(np.kron(np.eye(2), p) @ phi)


def plus_theta(theta: float) -> PureState:
    return PureState(np.array([1.0, np.exp(1j * theta)]) / np.sqrt(2))


def minus_theta(theta: float) -> PureState:
    return PureState(np.array([1.0, -np.exp(1j * theta)]) / np.sqrt(2))


ZERO = PureState.basis([0])
ONE = PureState.basis([1])
PLUS = plus_theta(0.0)
MINUS = minus_theta(0.0)
