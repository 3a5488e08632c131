"""Cloning machines built from classical encodings, and the bounds they must obey.

For a classical encoding the encoded state is a mixture of bit strings, which
can be copied. Chaining ``Sim``, a copier ``V`` and ``k`` decoders gives one
fixed channel ``W = Dec^{⊗k} ∘ V ∘ Sim`` that would clone the family's
output states if ``δ̂`` and ``ε̂`` were both small. The checks here measure
how close ``W`` gets and compare it with the guaranteed bounds.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .qcore import (
    Channel,
    PureState,
    compose,
    fidelity_with_pure,
    hermitian_eig,
    power_channel,
    trace_distance,
)
from .qcore.linalg import DimensionError, kron_all
from .qcore.states import MAX_PURE_QUBITS
from .qre import QreScheme, SchemeParams, measure_params
from .schemes import breidbart_basis

CHAIN_LHS = math.sqrt(3 / 4) - math.sqrt(1 / 2)
PURITY_TOL = 1e-9


class BoundViolation(AssertionError):
    pass


def basis_copier(k: int, n: int) -> Channel:
    """Dephase an n-qubit register and write its label k times: ``|z⟩ ↦ |z⟩^{⊗k}``."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k * n > MAX_PURE_QUBITS:
        raise DimensionError(f"copier output of {k * n} qubits exceeds the {MAX_PURE_QUBITS}-qubit cap")
    d, dk = 1 << n, 1 << (k * n)
    ks = np.zeros((d, dk, d), dtype=np.complex128)
    for z in range(d):
        row = 0
        for _ in range(k):
            row = (row << n) | z
        ks[z, row, z] = 1.0
    return Channel(n, k * n, ks, f"copy{k}")


def build_cloner(s: QreScheme, k: int, params: SchemeParams | None = None) -> Channel:
    params = measure_params(s) if params is None else params
    if not params.classical:
        warnings.warn(f"{s.name} is not a classical encoding; the copier dephases its output", stacklevel=2)
    v = basis_copier(k, s.encode.out_qubits)
    return compose(power_channel(s.decode, k), v, s.simulator)


def family_outputs(s: QreScheme) -> list[PureState]:
    """Pure output ``|ψ_i⟩ = F(ρ_i)`` of each family member."""
    out = []
    for i, rho in enumerate(s.family):
        f = s.target(rho)
        purity = float(np.real(np.trace(f.matrix @ f.matrix)))
        if purity < 1 - PURITY_TOL:
            raise ValueError(f"{s.name}: F maps family member {i} to a mixed state (purity {purity:.6g})")
        w, vecs = hermitian_eig(f.matrix)
        v = vecs[:, -1]
        k = int(np.argmax(np.abs(v)))
        out.append(PureState.normalized(v * np.exp(-1j * np.angle(v[k]))))
    return out


def default_a_grid(delta_hat: float) -> tuple[float, ...]:
    """Grid of Markov thresholds; includes ``√δ̂`` whenever it is positive."""
    grid = [1e-4, 1e-3, 1e-2, 0.1, 0.25, 1.0]
    if delta_hat > 0:
        grid.append(math.sqrt(delta_hat))
    return tuple(sorted(set(grid)))


def statistical_rhs(eps: float, delta: float, k: int, a: float) -> float:
    return eps + k * delta / a + k * math.sqrt(a)


def computational_rhs(eps: float, delta: float, k: int, a: float) -> float:
    return math.sqrt(statistical_rhs(eps, delta, k, a))


# --------------------------------------------------------------------------
# privacy against a fixed family of efficient tests
# --------------------------------------------------------------------------

def _breidbart_effects(n: int) -> list[np.ndarray]:
    b = breidbart_basis()
    singles = [np.outer(v, np.conj(v)) for v in b]
    effects = []
    for z in range(1 << n):
        effects.append(kron_all([singles[(z >> (n - 1 - j)) & 1] for j in range(n)]))
    return effects


def computational_privacy(s: QreScheme, k: int, outputs: list[PureState] | None = None) -> float:
    """Largest distinguishing advantage between ``F̂(ρ_i)`` and ``Sim(F(ρ_i))`` over a finite test set.

    Tests: the computational-basis measurement, the product Breidbart
    measurement, and each ``|ψ_j^{⊗k}⟩`` projector pulled back through
    ``Dec^{⊗k} ∘ V``.
    """
    outputs = family_outputs(s) if outputs is None else outputs
    n = s.encode.out_qubits
    back = compose(power_channel(s.decode, k), basis_copier(k, n))
    pulled = []
    for psi in outputs:
        vec = kron_all([psi.amplitudes[:, None]] * k)[:, 0]
        pulled.append(back.adjoint(np.outer(vec, np.conj(vec))))
    breid = _breidbart_effects(n)
    best = 0.0
    for rho in s.family:
        diff = s.encode(rho).matrix - s.simulator(s.target(rho)).matrix
        best = max(best, 0.5 * float(np.sum(np.abs(np.real(np.diag(diff))))))
        best = max(best, 0.5 * sum(abs(float(np.real(np.trace(e @ diff)))) for e in breid))
        for e in pulled:
            best = max(best, abs(float(np.real(np.trace(e @ diff)))))
    return min(best, 1.0)


# --------------------------------------------------------------------------
# cloning bound
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ClonerReport:
    scheme: str
    k: int
    a_grid: tuple[float, ...]
    lhs: tuple[float, ...]
    fidelities: tuple[float, ...]
    rhs_statistical: tuple[float, ...]
    rhs_computational: tuple[float, ...]
    delta_hat: float
    eps_hat: float
    eps_computational: float

    @property
    def worst_margin(self) -> float:
        """Smallest ``rhs − lhs`` over grid points and family members (negative means violated)."""
        return min(self.rhs_statistical) - max(self.lhs)

    @property
    def holds(self) -> bool:
        return self.worst_margin > -1e-8

    @property
    def holds_computational(self) -> bool:
        return min(self.rhs_computational) - max(self.lhs) > -1e-8

    @property
    def fidelity_floors(self) -> tuple[float, ...]:
        return tuple(1 - statistical_rhs(self.eps_computational, self.delta_hat, self.k, a) for a in self.a_grid)

    @property
    def fidelity_holds(self) -> bool:
        return min(self.fidelities) >= max(self.fidelity_floors) - 1e-8

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "k": self.k,
            "a_grid": list(self.a_grid),
            "lhs": list(self.lhs),
            "fidelities": list(self.fidelities),
            "rhs_statistical": list(self.rhs_statistical),
            "rhs_computational": list(self.rhs_computational),
            "delta_hat": self.delta_hat,
            "eps_hat": self.eps_hat,
            "eps_computational": self.eps_computational,
            "worst_margin": self.worst_margin,
            "holds": self.holds,
            "holds_computational": self.holds_computational,
            "fidelity_holds": self.fidelity_holds,
        }

    def rows(self) -> list[dict]:
        """One row per grid point, for CSV export."""
        worst = max(self.lhs)
        return [
            {"scheme": self.scheme, "k": self.k, "a": a, "max_lhs": worst, "rhs_statistical": rs,
             "rhs_computational": rc, "margin": rs - worst, "fidelity_floor": ff, "min_fidelity": min(self.fidelities)}
            for a, rs, rc, ff in zip(self.a_grid, self.rhs_statistical, self.rhs_computational, self.fidelity_floors)
        ]


def verify_clone_bound(s: QreScheme, k: int, a_grid=None, params: SchemeParams | None = None) -> ClonerReport:
    params = measure_params(s) if params is None else params
    outputs = family_outputs(s)
    grid = default_a_grid(params.delta_hat) if a_grid is None else tuple(float(a) for a in a_grid)
    if any(a <= 0 for a in grid):
        raise ValueError("every a must be positive")
    w = build_cloner(s, k, params)
    lhs, fids = [], []
    for psi in outputs:
        target = psi
        for _ in range(k - 1):
            target = target.tensor(psi)
        out = w(psi.density())
        lhs.append(trace_distance(out, target.density()))
        fids.append(fidelity_with_pure(target, out))
    eps_c = computational_privacy(s, k, outputs)
    return ClonerReport(
        s.name, k, grid, tuple(lhs), tuple(fids),
        tuple(statistical_rhs(params.eps_hat, params.delta_hat, k, a) for a in grid),
        tuple(computational_rhs(eps_c, params.delta_hat, k, a) for a in grid),
        params.delta_hat, params.eps_hat, eps_c,
    )


def fidelity_lower_bound_check(s: QreScheme, k: int, a: float, params: SchemeParams | None = None) -> bool:
    """``⟨ψ^{⊗k}|W(ψ)|ψ^{⊗k}⟩ ≥ 1 − ε̂_c − kδ̂/a − k√a`` for every family member."""
    return verify_clone_bound(s, k, [a], params).fidelity_holds


def write_csv(reports, path) -> None:
    rows = [r for rep in reports for r in rep.rows()]
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)


# --------------------------------------------------------------------------
# Markov step and the two-state chain
# --------------------------------------------------------------------------

def gap_set_mass(s: QreScheme, i: int, a: float, params: SchemeParams | None = None) -> float:
    """Weight of encoded strings that decode badly: ``Σ p_z`` over ``1 − ⟨ψ|Dec(|z⟩⟨z|)|ψ⟩ ≥ a``."""
    params = measure_params(s) if params is None else params
    if not params.classical:
        raise ValueError(f"{s.name} is not a classical encoding")
    if a <= 0:
        raise ValueError("a must be positive")
    psi = family_outputs(s)[i]
    enc = s.encode(s.family[i])
    p = np.real(np.diag(enc.matrix))
    d = p.size
    mass = 0.0
    for z in range(d):
        basis = np.zeros((d, d), dtype=np.complex128)
        basis[z, z] = 1.0
        fid = fidelity_with_pure(psi, s.decode(basis))
        if 1 - fid >= a:
            mass += float(p[z])
    if mass > params.delta_hat / a + 1e-8:
        raise BoundViolation(f"gap-set mass {mass:.6g} exceeds δ̂/a = {params.delta_hat / a:.6g}")
    return mass


def chain_rhs(eps: float, delta: float) -> float:
    return 2 * math.sqrt(eps + 2 * math.sqrt(delta) + 2 * delta ** 0.25)


def chain_inequality_holds(eps: float, delta: float) -> bool:
    """``√(3/4) − √(1/2) ≤ 2√(ε + 2√δ + 2δ^{1/4})``; false means a working cloner."""
    return CHAIN_LHS <= chain_rhs(eps, delta) + 1e-8


@dataclass(frozen=True)
class ChainCheck:
    lhs: float
    rhs: float
    distinguishability_loss: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + 1e-8

    def __bool__(self) -> bool:
        return self.holds

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "holds": self.holds,
                "distinguishability_loss": self.distinguishability_loss}


def chain_inequality_check(s: QreScheme, params: SchemeParams | None = None) -> ChainCheck:
    """Two-copy chain for the outputs ``|0⟩`` and ``|+⟩``.

    Also records ``½‖ψ_+^{⊗2} − ψ_0^{⊗2}‖₁ − ½‖W(ψ_+) − W(ψ_0)‖₁``, the
    quantity the chain bounds from above.
    """
    params = measure_params(s) if params is None else params
    outputs = family_outputs(s)
    zero = PureState(np.array([1, 0], dtype=complex))
    plus = PureState(np.array([1, 1], dtype=complex) / math.sqrt(2))

    def find(target):
        for psi in outputs:
            if psi.qubits == 1 and abs(np.vdot(target.amplitudes, psi.amplitudes)) ** 2 > 1 - 1e-9:
                return psi
        raise ValueError(f"{s.name}: family has no member mapping to the required state")

    p0, pp = find(zero), find(plus)
    w = build_cloner(s, 2, params)
    gap = trace_distance(pp.tensor(pp).density(), p0.tensor(p0).density()) - trace_distance(w(pp.density()), w(p0.density()))
    return ChainCheck(CHAIN_LHS, chain_rhs(params.eps_hat, params.delta_hat), gap)
