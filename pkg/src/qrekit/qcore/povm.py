from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .linalg import DimensionError, as_matrix, is_psd, psd_sqrt, qubits_of
from .states import DensityMatrix, as_density, bell_state

POVM_TOL = 1e-8
MIN_PROB = 1e-12


@dataclass(frozen=True, eq=False)
class Povm:
    """Labelled measurement effects {E_label}; effects are PSD and sum to identity."""

    labels: tuple
    effects: np.ndarray  # (count, d, d)

    def __post_init__(self):
        eff = np.asarray(self.effects, dtype=np.complex128)
        labels = tuple(self.labels)
        if eff.ndim != 3 or eff.shape[1] != eff.shape[2]:
            raise DimensionError(f"effects must be a stack of square matrices, got {eff.shape}")
        if len(labels) != eff.shape[0]:
            raise ValueError("one label per effect required")
        if len(set(labels)) != len(labels):
            raise ValueError("labels must be distinct")
        for lab, e in zip(labels, eff):
            if np.max(np.abs(e - np.conj(e).T)) > POVM_TOL or not is_psd(e, POVM_TOL):
                raise ValueError(f"effect {lab!r} is not positive semidefinite")
        total = eff.sum(axis=0)
        err = float(np.max(np.abs(total - np.eye(eff.shape[1]))))
        if err > POVM_TOL:
            raise ValueError(f"effects do not sum to identity (error {err:.3g})")
        eff = eff.copy()
        eff.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "effects", eff)

    @property
    def qubits(self) -> int:
        return qubits_of(self.effects.shape[1])

    def index(self, label) -> int:
        return self.labels.index(label)


def povm_probabilities(p: Povm, rho) -> np.ndarray:
    """Exact Born distribution Tr[E rho] over the effects, in label order."""
    m = as_density(rho).matrix
    if m.shape != p.effects.shape[1:]:
        raise DimensionError(f"POVM acts on {p.effects.shape[1]} dims, state has {m.shape[0]}")
    probs = np.real(np.einsum("kij,ji->k", p.effects, m))
    return np.clip(probs, 0.0, None)


def measure_povm(p: Povm, rho, rng: np.random.Generator):
    """Sample a label with Born probability; return (label, sqrt(E) rho sqrt(E) / prob)."""
    m = as_density(rho).matrix
    probs = povm_probabilities(p, m)
    support = probs >= MIN_PROB
    if not np.any(support):
        raise ValueError("all outcome probabilities vanish; state is numerically invalid")
    probs = np.where(support, probs, 0.0)
    k = int(rng.choice(len(probs), p=probs / probs.sum()))
    root = psd_sqrt(p.effects[k])
    post = root @ m @ root / probs[k]
    return p.labels[k], DensityMatrix(post)


def computational_povm(n: int) -> Povm:
    d = 1 << n
    eff = np.zeros((d, d, d), dtype=np.complex128)
    for z in range(d):
        eff[z, z, z] = 1.0
    return Povm(tuple(range(d)), eff)


def projective_povm(basis, labels=None) -> Povm:
    """POVM from the columns of a unitary matrix."""
    b = as_matrix(basis)
    eff = np.einsum("ik,jk->kij", b, np.conj(b))
    return Povm(tuple(labels) if labels is not None else tuple(range(b.shape[1])), eff)


def bell_povm() -> Povm:
    """Two-qubit Bell measurement, label (x, z) <-> (I (x) X^x Z^z)|Phi+>."""
    labels = tuple(product((0, 1), repeat=2))
    eff = np.stack([bell_state(x, z).projector() for x, z in labels])
    return Povm(labels, eff)


def paired_bell_povm(n: int) -> Povm:
    """Bell measurement on each pair (j, n + j) of a 2n-qubit register.

    Labels are ``(x_bits, z_bits)`` tuples. Only practical for n <= 4.
    """
    if n > 4:
        raise DimensionError("paired Bell POVM is capped at n = 4 (2**(4n) entries)")
    from .linalg import embed

    singles = {lab: bell_state(*lab).projector() for lab in product((0, 1), repeat=2)}
    labels, eff = [], []
    for xs in product((0, 1), repeat=n):
        for zs in product((0, 1), repeat=n):
            op = np.eye(1 << (2 * n), dtype=np.complex128)
            for j in range(n):
                op = op @ embed(singles[(xs[j], zs[j])], [j + 1, n + j + 1], 2 * n)
            labels.append((xs, zs))
            eff.append(op)
    return Povm(tuple(labels), np.stack(eff))
