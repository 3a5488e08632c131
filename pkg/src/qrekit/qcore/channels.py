"""CPTP maps as finite Kraus lists.

Classical randomness inside a channel is folded into the Kraus list: a mixture
``sum_r w_r Phi_r`` has Kraus operators ``sqrt(w_r) K`` for every ``K`` of
every ``Phi_r``.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .linalg import (
    DimensionError,
    I2,
    X,
    Y,
    Z,
    as_matrix,
    dagger,
    hermitian_eig,
    identity,
    kron_all,
    qubits_of,
)
from .states import DensityMatrix, as_density

COMPLETENESS_TOL = 1e-8
_PRUNE = 1e-14


@dataclass(frozen=True, eq=False)
class Channel:
    in_qubits: int
    out_qubits: int
    kraus: np.ndarray  # (count, 2**out, 2**in)
    name: str = ""

    def __post_init__(self):
        ks = np.asarray(self.kraus, dtype=np.complex128)
        if ks.ndim == 2:
            ks = ks[None]
        if ks.ndim != 3 or ks.shape[0] == 0:
            raise DimensionError("kraus must be a non-empty stack of matrices")
        if ks.shape[1:] != (1 << self.out_qubits, 1 << self.in_qubits):
            raise DimensionError(
                f"Kraus shape {ks.shape[1:]} inconsistent with {self.in_qubits}->{self.out_qubits} qubits"
            )
        if not np.all(np.isfinite(ks)):
            raise ValueError("Kraus operators must be finite")
        err = completeness_error(ks)
        if err > COMPLETENESS_TOL:
            raise ValueError(f"Kraus operators not trace preserving (error {err:.3g})")
        ks = ks.copy()
        ks.setflags(write=False)
        object.__setattr__(self, "kraus", ks)

    @classmethod
    def from_kraus(cls, ops, name: str = "") -> "Channel":
        ops = [as_matrix(k) for k in ops]
        n_out = qubits_of(ops[0].shape[0])
        n_in = qubits_of(ops[0].shape[1])
        return cls(n_in, n_out, np.stack(ops), name)

    @property
    def count(self) -> int:
        return self.kraus.shape[0]

    def __call__(self, rho) -> DensityMatrix:
        return apply_channel(self, rho)

    def adjoint(self, op) -> np.ndarray:
        """Heisenberg-picture action sum_k K^H op K."""
        op = as_matrix(op)
        return np.einsum("kji,jl,klm->im", np.conj(self.kraus), op, self.kraus)


def completeness_error(kraus: np.ndarray) -> float:
    s = np.einsum("kji,kjl->il", np.conj(kraus), kraus)
    return float(np.max(np.abs(s - np.eye(s.shape[0]))))


def apply_channel(c: Channel, rho) -> DensityMatrix:
    m = as_density(rho).matrix
    if m.shape[0] != (1 << c.in_qubits):
        raise DimensionError(f"channel expects {c.in_qubits} qubits, state has {qubits_of(m.shape[0])}")
    out = np.einsum("kij,jl,kml->im", c.kraus, m, np.conj(c.kraus))
    return DensityMatrix(out)


def _pruned(ks: np.ndarray) -> np.ndarray:
    norms = np.sqrt(np.sum(np.abs(ks) ** 2, axis=(1, 2)))
    keep = norms > _PRUNE
    if not np.any(keep):
        keep[np.argmax(norms)] = True
    return ks[keep]


def compose(*channels: Channel) -> Channel:
    """compose(A, B, C) is A o B o C (C applied first)."""
    out = channels[-1]
    for outer in reversed(channels[:-1]):
        if outer.in_qubits != out.out_qubits:
            raise DimensionError(
                f"cannot compose: outer takes {outer.in_qubits} qubits, inner yields {out.out_qubits}"
            )
        ks = np.einsum("aij,bjk->abik", outer.kraus, out.kraus)
        ks = ks.reshape(-1, ks.shape[2], ks.shape[3])
        out = Channel(out.in_qubits, outer.out_qubits, _pruned(ks))
    return out


def tensor_channels(*channels: Channel) -> Channel:
    ks = channels[0].kraus
    for c in channels[1:]:
        nk = np.einsum("aij,bkl->abikjl", ks, c.kraus)
        a, b, i, k, j, l = nk.shape
        ks = _pruned(nk.reshape(a * b, i * k, j * l))
    return Channel(
        sum(c.in_qubits for c in channels), sum(c.out_qubits for c in channels), ks
    )


def power_channel(c: Channel, k: int) -> Channel:
    return tensor_channels(*([c] * k))


def mixture(weights, channels) -> Channel:
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError("mixture weights must be a probability vector")
    ks = np.concatenate([np.sqrt(w) * c.kraus for w, c in zip(weights, channels) if w > 0])
    c0 = channels[0]
    return Channel(c0.in_qubits, c0.out_qubits, ks)


# --------------------------------------------------------------------------
# built-in channels
# --------------------------------------------------------------------------

def identity_channel(n: int) -> Channel:
    return Channel(n, n, identity(n)[None], "identity")


def unitary_channel(u) -> Channel:
    u = as_matrix(u)
    if not np.allclose(dagger(u) @ u, np.eye(u.shape[0]), atol=1e-10):
        raise ValueError("matrix is not unitary")
    return Channel.from_kraus([u], "unitary")


def _per_qubit(single: np.ndarray, n: int, name: str) -> Channel:
    ks = single
    for _ in range(n - 1):
        ks = _pruned(np.einsum("aij,bkl->abikjl", ks, single).reshape(
            ks.shape[0] * single.shape[0], ks.shape[1] * 2, ks.shape[2] * 2))
    return Channel(n, n, ks, name)


def depolarizing(p: float, n: int = 1) -> Channel:
    """rho -> (1-p) rho + p I/2 on each of n qubits independently."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    single = np.stack([np.sqrt(1 - 3 * p / 4) * I2, np.sqrt(p / 4) * X, np.sqrt(p / 4) * Y, np.sqrt(p / 4) * Z])
    return _per_qubit(_pruned(single), n, f"depolarizing({p})")


def dephasing(p: float = 1.0, n: int = 1) -> Channel:
    """rho -> (1-p) rho + p diag(rho) per qubit; p=1 kills all off-diagonals."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    single = np.stack([np.sqrt(1 - p / 2) * I2, np.sqrt(p / 2) * Z])
    return _per_qubit(_pruned(single), n, f"dephasing({p})")


def computational_dephasing(n: int) -> Channel:
    """Full dephasing of an n-qubit register in the computational basis (2**n Kraus)."""
    d = 1 << n
    ks = np.zeros((d, d, d), dtype=np.complex128)
    for z in range(d):
        ks[z, z, z] = 1.0
    return Channel(n, n, ks, "dephase")


def partial_trace_channel(n: int, keep) -> Channel:
    keep = sorted({int(k) for k in keep})
    traced = [q for q in range(1, n + 1) if q not in keep]
    ks = []
    for bits in product((0, 1), repeat=len(traced)):
        fixed = dict(zip(traced, bits))
        parts = []
        for q in range(1, n + 1):
            if q in fixed:
                parts.append(np.array([[1 - fixed[q], fixed[q]]], dtype=np.complex128))
            else:
                parts.append(I2)
        ks.append(kron_all(parts))
    return Channel(n, len(keep), np.stack(ks), "partial-trace")


def append_state_channel(n: int, state) -> Channel:
    """rho -> rho (x) eta, with eta appended as the last qubits."""
    eta = as_density(state)
    w, v = hermitian_eig(eta.matrix)
    ks = [np.sqrt(max(wk, 0.0)) * np.kron(identity(n), v[:, [k]]) for k, wk in enumerate(w) if wk > _PRUNE]
    return Channel(n, n + eta.qubits, np.stack(ks), "append")


def prepare_channel(n_in: int, state) -> Channel:
    """Discard the input and prepare ``state``."""
    eta = as_density(state)
    w, v = hermitian_eig(eta.matrix)
    ks = []
    for k, wk in enumerate(w):
        if wk <= _PRUNE:
            continue
        for i in range(1 << n_in):
            e = np.zeros((1, 1 << n_in), dtype=np.complex128)
            e[0, i] = 1.0
            ks.append(np.sqrt(wk) * v[:, [k]] @ e)
    return Channel(n_in, eta.qubits, np.stack(ks), "prepare")


def measure_and_prepare(effects, prepared) -> Channel:
    """rho -> sum_i Tr[E_i rho] sigma_i for a POVM {E_i} and output states sigma_i."""
    ks = []
    for e, sigma in zip(effects, prepared):
        e = as_matrix(e)
        we, ve = hermitian_eig(0.5 * (e + dagger(e)))
        sig = as_density(sigma)
        ws, vs = hermitian_eig(sig.matrix)
        for a, wa in enumerate(we):
            if wa <= _PRUNE:
                continue
            for b, wb in enumerate(ws):
                if wb <= _PRUNE:
                    continue
                ks.append(np.sqrt(wa * wb) * vs[:, [b]] @ np.conj(ve[:, [a]]).T)
    return Channel.from_kraus(ks, "measure-prepare")


def random_channel(rng: np.random.Generator, n_in: int, n_out: int, count: int = 3) -> Channel:
    """Haar-ish random channel via a random isometry of Stinespring dimension ``count``."""
    d_in, d_out = 1 << n_in, 1 << n_out
    g = rng.normal(size=(count * d_out, d_in)) + 1j * rng.normal(size=(count * d_out, d_in))
    q, r = np.linalg.qr(g)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return Channel(n_in, n_out, q.reshape(count, d_out, d_in), "random")
