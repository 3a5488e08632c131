"""Built-in encoding schemes.

``identity`` and ``noisy`` encode the BB84 challenge for the two-round
protocol. ``identity-on-classical``, ``label`` and ``measure-forward`` are
classical encodings (every ``F̂(ρ)`` is diagonal) used to exercise the
cloning bounds.
"""

from __future__ import annotations

import numpy as np

from .qcore import (
    H,
    Channel,
    append_state_channel,
    compose,
    computational_dephasing,
    depolarizing,
    identity_channel,
    kron_all,
    measure_and_prepare,
    partial_trace_channel,
    unitary_channel,
)
from .qcore import PureState
from .qre import QreScheme, sigma_family

BREIDBART_ANGLE = np.pi / 8


def hadamard_layer(n: int) -> Channel:
    return unitary_channel(kron_all([H] * n))


def identity_scheme(n: int = 2) -> QreScheme:
    """``F = F̂ = H^{⊗N}`` conjugation, trivial decoder and simulator."""
    f = hadamard_layer(n)
    return QreScheme("identity", f, f, identity_channel(n), identity_channel(n), sigma_family(n))


def noisy_scheme(n: int = 2, p: float = 0.1, junk_qubits: int = 0, simulator: str = "identity") -> QreScheme:
    """Depolarised encoding of ``F = H^{⊗N}`` (optionally followed by ``|0⟩`` junk qubits).

    ``simulator="identity"`` leaves ``Sim`` trivial, so ``ε̂ = δ̂ > 0``;
    ``simulator="noise"`` uses the same depolarising channel, giving ``ε̂ = 0``.
    """
    f = hadamard_layer(n)
    if junk_qubits:
        f = compose(append_state_channel(n, PureState.basis([0] * junk_qubits)), f)
    out = f.out_qubits
    noise = depolarizing(p, out)
    if simulator == "identity":
        sim = identity_channel(out)
    elif simulator == "noise":
        sim = noise
    else:
        raise ValueError(f"simulator must be 'identity' or 'noise', got {simulator!r}")
    name = "noisy-junk" if junk_qubits else "noisy"
    if simulator == "noise":
        name += "-exact-sim"
    return QreScheme(name, f, compose(noise, f), identity_channel(out), sim, sigma_family(n), junk_qubits)


# --------------------------------------------------------------------------
# classical encodings of the controlled-Hadamard example
# --------------------------------------------------------------------------

def controlled_hadamard_target() -> Channel:
    """Controlled-H (qubit 1 controls qubit 2) followed by discarding qubit 1.

    Maps ``|00⟩, |01⟩, |10⟩, |11⟩`` to ``|0⟩, |1⟩, |+⟩, |−⟩``.
    """
    ch = np.eye(4, dtype=complex)
    ch[2:, 2:] = H
    return compose(partial_trace_channel(2, [2]), unitary_channel(ch))


def basis_family(n: int) -> tuple:
    return tuple(PureState.basis([(z >> (n - 1 - j)) & 1 for j in range(n)]).density() for z in range(1 << n))


def measure_forward_scheme() -> QreScheme:
    """Send the output measured in the computational basis; decoding is trivial."""
    f = controlled_hadamard_target()
    deph = computational_dephasing(1)
    return QreScheme("measure-forward", f, compose(deph, f), identity_channel(1), deph, basis_family(2))


def breidbart_basis() -> tuple[np.ndarray, np.ndarray]:
    c, s = np.cos(BREIDBART_ANGLE), np.sin(BREIDBART_ANGLE)
    return np.array([c, s], dtype=complex), np.array([-s, c], dtype=complex)


def breidbart_label_simulator() -> Channel:
    """Measure in the Breidbart basis (outcome b), guess the basis bit g uniformly, output ``|g b⟩``."""
    b0, b1 = breidbart_basis()
    effects, outputs = [], []
    for b, vec in enumerate((b0, b1)):
        proj = np.outer(vec, np.conj(vec))
        for g in (0, 1):
            effects.append(0.5 * proj)
            outputs.append(PureState.basis([g, b]).density())
    return measure_and_prepare(effects, outputs)


def label_scheme() -> QreScheme:
    """Send the classical input label itself; the decoder re-prepares and applies ``F``."""
    f = controlled_hadamard_target()
    deph = computational_dephasing(2)
    return QreScheme("label", f, deph, compose(f, deph), breidbart_label_simulator(), basis_family(2))


def identity_on_classical_scheme() -> QreScheme:
    """One qubit, family ``{|0⟩, |1⟩}``, every channel the identity."""
    i1 = identity_channel(1)
    return QreScheme("identity-on-classical", i1, i1, i1, i1, basis_family(1))


_ZOO = {
    "identity": identity_scheme,
    "noisy": noisy_scheme,
    "noisy-junk": lambda: noisy_scheme(junk_qubits=1),
    "measure-forward": measure_forward_scheme,
    "label": label_scheme,
    "identity-on-classical": identity_on_classical_scheme,
}

CLASSICAL_ZOO = ("identity-on-classical", "label", "measure-forward")


def scheme_names() -> list[str]:
    return list(_ZOO)


def get_scheme(name: str) -> QreScheme:
    try:
        return _ZOO[name]()
    except KeyError:
        raise KeyError(f"unknown scheme {name!r}; known: {', '.join(_ZOO)}") from None
