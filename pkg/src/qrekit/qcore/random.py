"""Random states and unitaries for property checks."""

from __future__ import annotations

import numpy as np

from .states import DensityMatrix, PureState


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    g = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_pure_state(rng: np.random.Generator, n: int) -> PureState:
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return PureState.normalized(v)


def random_density(rng: np.random.Generator, n: int, rank: int | None = None) -> DensityMatrix:
    d = 1 << n
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    m = g @ np.conj(g).T
    return DensityMatrix(m / np.trace(m).real)


def random_hermitian(rng: np.random.Generator, d: int) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return 0.5 * (g + np.conj(g).T)
