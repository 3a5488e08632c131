"""Dense complex linear algebra on qubit registers (big-endian: qubit 1 is the MSB)."""

from __future__ import annotations

from functools import reduce

import numpy as np

from .. import kernels

MAX_EIG_DIM = 1024


class DimensionError(ValueError):
    """Operands have incompatible or oversized dimensions."""


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    return m


def qubits_of(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or (1 << n) != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


def kron(a, b, *more) -> np.ndarray:
    """Kronecker product; the left operand occupies the more significant qubits."""
    return reduce(np.kron, (as_matrix(a), as_matrix(b), *(as_matrix(m) for m in more)))


def kron_all(ops) -> np.ndarray:
    ops = list(ops)
    if not ops:
        return np.ones((1, 1), dtype=np.complex128)
    return reduce(np.kron, ops)


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - dagger(m)))) if m.size else 0.0


def hermitian_eig(m, tol: float = 1e-10, max_sweeps: int = 100):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(w, v)`` with ``w`` ascending and the columns of ``v`` orthonormal,
    so that ``v @ diag(w) @ v^H`` reconstructs the input.
    """
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"matrix must be square, got {m.shape}")
    if m.shape[0] > MAX_EIG_DIM:
        raise DimensionError(f"dimension {m.shape[0]} exceeds eigensolver cap {MAX_EIG_DIM}")
    err = hermiticity_error(m)
    if err > 1e-9:
        raise ValueError(f"matrix is not Hermitian (max |m - m^H| = {err:.3g})")
    m = 0.5 * (m + dagger(m))
    return kernels.jacobi_eigh(m, tol, max_sweeps)


def eigvalsh(m) -> np.ndarray:
    return hermitian_eig(m)[0]


def psd_sqrt(m) -> np.ndarray:
    w, v = hermitian_eig(m)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ dagger(v)


def is_psd(m: np.ndarray, atol: float = 1e-8) -> bool:
    # min eigenvalue >= -atol  <=>  m + atol*I admits a Cholesky factor (up to roundoff)
    m = 0.5 * (m + dagger(m))
    try:
        np.linalg.cholesky(m + (atol + 1e-14) * np.eye(m.shape[0]))
    except np.linalg.LinAlgError:
        return False
    return True


# --------------------------------------------------------------------------
# standard gates
# --------------------------------------------------------------------------

I2 = np.eye(2, dtype=np.complex128)
X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / np.sqrt(2)
CZ = np.diag([1, 1, 1, -1]).astype(np.complex128)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)
for _g in (I2, X, Y, Z, H, CZ, CNOT):
    _g.setflags(write=False)


def rz(theta: float) -> np.ndarray:
    """exp(-i theta Z / 2)."""
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def identity(n: int) -> np.ndarray:
    return np.eye(1 << n, dtype=np.complex128)


def bits_to_int(bits) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | (int(b) & 1)
    return out


def int_to_bits(value: int, n: int) -> tuple[int, ...]:
    return tuple((value >> (n - 1 - j)) & 1 for j in range(n))


def pauli_xz(x, z) -> np.ndarray:
    """Tensor product of X^{x_j} Z^{z_j} over qubits (X applied after Z)."""
    if len(x) != len(z):
        raise DimensionError("x and z must have equal length")
    return kron_all(
        np.linalg.matrix_power(X, int(xj)) @ np.linalg.matrix_power(Z, int(zj))
        for xj, zj in zip(x, z)
    )


def embed(op: np.ndarray, targets, n: int) -> np.ndarray:
    """Lift an operator on ``targets`` (1-based, ascending, adjacent not required) to n qubits."""
    targets = [int(t) for t in targets]
    k = len(targets)
    if op.shape != (1 << k, 1 << k):
        raise DimensionError(f"operator shape {op.shape} does not fit {k} target qubits")
    if sorted(targets) != targets or len(set(targets)) != k or targets[0] < 1 or targets[-1] > n:
        raise DimensionError(f"bad target qubits {targets} for {n} qubits")
    rest = [q for q in range(1, n + 1) if q not in targets]
    full = np.kron(op, np.eye(1 << (n - k)))
    # full acts on (targets, rest); permute axes back to natural order
    order = targets + rest
    perm = [order.index(q) for q in range(1, n + 1)]
    t = full.reshape([2] * (2 * n))
    t = t.transpose(perm + [n + p for p in perm])
    return t.reshape(1 << n, 1 << n)
