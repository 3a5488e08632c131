from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrekit import hamiltonian as hm
from qrekit import qcore as q
from qrekit import verify as v
from qrekit.qcore.random import random_density, random_pure_state

BELL_AF = hm.HamiltonianSpec(2, ((1, 2, 1.0, -1),))
SMALL_SPECS = [hm.instance(n).spec for n in hm.instance_names() if hm.instance(n).spec.n <= 3]


def _paired_oracle(received, psi):
    """Born rule on received ⊗ ψ with a Bell measurement on each pair (j, N+j)."""
    n = psi.qubits
    povm = q.paired_bell_povm(n)
    probs = q.povm_probabilities(povm, q.tensor(received, psi))
    out = np.zeros(1 << (2 * n))
    for lab, p in zip(povm.labels, probs):
        out[v.ProverReport(*lab).index] = p
    return out


def test_bb84_state_examples():
    assert q.pure_fidelity(v.bb84_state(0, [0]), q.ZERO) == pytest.approx(1.0)
    assert q.pure_fidelity(v.bb84_state(1, [0, 1]), q.PLUS.tensor(q.MINUS)) == pytest.approx(1.0)
    plus3 = q.PLUS.tensor(q.PLUS).tensor(q.PLUS)
    assert q.pure_fidelity(v.bb84_state(1, [0, 0, 0]), plus3) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        v.bb84_state(2, [0])


def test_center_sample_state_matches_formula():
    rng = np.random.default_rng(3)
    for _ in range(10):
        s = v.CenterSample.draw(3, rng)
        np.testing.assert_array_equal(s.state.amplitudes, v.bb84_state(s.h, s.m).amplitudes)


def test_report_index_roundtrip():
    for o in range(64):
        assert v.ProverReport.from_index(o, 3).index == o
    with pytest.raises(ValueError):
        v.ProverReport((0, 1), (0,))


@pytest.mark.parametrize(
    "received, e0, expected",
    [
        (q.ZERO, q.ZERO, [0.5, 0.5, 0, 0]),
        (q.PLUS, q.PLUS, [0.5, 0, 0.5, 0]),
    ],
)
def test_honest_distribution_one_qubit(received, e0, expected):
    dist = v.outcome_distribution(v.ProverStrategy.honest(e0), received.density(), 1)
    np.testing.assert_allclose(dist, expected, atol=1e-12)
    np.testing.assert_allclose(_paired_oracle(received, e0), expected, atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_honest_distribution_matches_bell_measurement(n):
    rng = np.random.default_rng(n)
    for _ in range(3):
        psi = random_pure_state(rng, n)
        rho = random_density(rng, n)
        got = v.outcome_distribution(v.ProverStrategy.honest(psi), rho, n)
        np.testing.assert_allclose(got, _paired_oracle(rho, psi), atol=1e-12)
        pov = v.outcome_distribution(v.ProverStrategy.custom(v.honest_povm(psi)), rho, n)
        np.testing.assert_allclose(pov, got, atol=1e-12)


@pytest.mark.parametrize("x, z", list(product((0, 1), repeat=2)))
def test_teleportation_post_state(x, z):
    """Bell-measuring (half of |Φ+⟩, |E0⟩) teleports E0 onto the other half up to X^x Z^z."""
    rng = np.random.default_rng(0)
    e0 = random_pure_state(rng, 1)
    # qubit order: verifier half, received half, E0
    joint = q.tensor(q.bell_state(0, 0), e0)
    bell = q.bell_state(x, z).projector()
    proj = q.embed(bell, [2, 3], 3)
    post = proj @ joint.matrix @ proj
    post /= np.trace(post).real
    kept = q.partial_trace(q.DensityMatrix(0.5 * (post + post.conj().T)), [1])
    fixed = kept.evolve(q.X if x else np.eye(2)).evolve(q.Z if z else np.eye(2))
    assert q.fidelity_with_pure(e0, fixed) == pytest.approx(1.0, abs=1e-9)


def test_honest_respond_samples_support():
    rng = np.random.default_rng(5)
    seen = {v.honest_prover_respond(q.ZERO.density(), q.ZERO, rng) for _ in range(200)}
    assert seen == {v.ProverReport((0,), (0,)), v.ProverReport((0,), (1,))}
    with pytest.raises(ValueError):
        v.honest_prover_respond(q.ZERO.density(), q.bell_state(), rng)


def test_verifier_decide_examples():
    rep = v.ProverReport((0, 0), (1, 0))
    assert v.corrected_bits(1, (0, 0), rep)[0] == 1
    zero = v.ProverReport((0, 0), (0, 0))
    assert v.verifier_decide(0, (0, 0), zero, (1, 2, -1)) == 1
    assert v.verifier_decide(0, (0, 1), zero, (1, 2, 1)) == 1
    assert v.verifier_decide(0, (0, 0), zero, (1, 2, 1)) == 0
    # h = 0 corrects with x, ignoring z
    assert v.verifier_decide(0, (0, 0), v.ProverReport((1, 0), (1, 1)), (1, 2, 1)) == 1


def test_acceptance_table_matches_decide():
    spec = hm.instance("triangle-weighted").spec
    table = v.acceptance_table(spec)
    zero = v.ProverReport((0,) * 3, (0,) * 3)
    for c in range(8):
        bits = q.int_to_bits(c, 3)
        ref = sum(t.p * v.verifier_decide(0, bits, zero, (t.i, t.j, t.s)) for t in spec.terms)
        assert table[c] == pytest.approx(ref, abs=1e-15)


def test_acceptance_exact_examples():
    assert v.acceptance_exact(BELL_AF, v.ProverStrategy.honest(q.bell_state())).probability == pytest.approx(1.0, abs=1e-9)
    r = v.acceptance_exact(BELL_AF, v.ProverStrategy.honest(q.PureState.basis([0, 0])))
    assert r.probability == pytest.approx(0.75, abs=1e-9)
    assert r.method == "exact"
    assert v.enumerate_acceptance(BELL_AF, v.ProverStrategy.honest(q.PureState.basis([0, 0]))) == pytest.approx(0.75, abs=1e-9)


@pytest.mark.parametrize("name", hm.instance_names())
def test_uniform_report_accepts_half(name):
    spec = hm.instance(name).spec
    assert v.acceptance_exact(spec, v.ProverStrategy.uniform()).probability == pytest.approx(0.5, abs=1e-9)
    assert v.enumerate_acceptance(spec, v.ProverStrategy.uniform()) == pytest.approx(0.5, abs=1e-9)


def test_exact_mode_cap():
    spec = hm.HamiltonianSpec(5, ((1, 2, 0.5, 1), (4, 5, 0.5, 1)))
    with pytest.raises(ValueError):
        v.acceptance_exact(spec, v.ProverStrategy.uniform())


@pytest.mark.parametrize("spec", SMALL_SPECS, ids=lambda s: s.digest())
def test_completeness_identity(spec):
    rng = np.random.default_rng(spec.n)
    for psi in [hm.ground(spec).state] + [random_pure_state(rng, spec.n) for _ in range(5)]:
        got = v.acceptance_exact(spec, v.ProverStrategy.honest(psi)).probability
        assert got == pytest.approx(1 - hm.energy(spec, psi), abs=1e-8)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 3))
def test_completeness_identity_random_specs(seed, n):
    rng = np.random.default_rng(seed)
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)]
    w = rng.random(len(pairs)) + 0.05
    w /= w.sum()
    w[-1] = 1 - w[:-1].sum()
    spec = hm.HamiltonianSpec(n, tuple((i, j, float(p), int(rng.choice([-1, 1]))) for (i, j), p in zip(pairs, w)))
    psi = random_pure_state(rng, n)
    got = v.acceptance_exact(spec, v.ProverStrategy.honest(psi)).probability
    assert got == pytest.approx(1 - hm.energy(spec, psi), abs=1e-8)


def _malicious_strategies(n, rng):
    out = [v.ProverStrategy.uniform(), v.ProverStrategy.wrong_basis()]
    out += [v.ProverStrategy.fixed(q.int_to_bits(a, n), q.int_to_bits(b, n)) for a in range(1 << n) for b in range(1 << n)]
    d = 1 << n
    # random rank-one POVMs from a random isometry into the outcome space
    for _ in range(3):
        g = rng.normal(size=(d * d, d)) + 1j * rng.normal(size=(d * d, d))
        qmat, _ = np.linalg.qr(g)
        effects = np.einsum("oi,oj->oij", np.conj(qmat), qmat)
        labels = tuple((q.int_to_bits(o >> n, n), q.int_to_bits(o & (d - 1), n)) for o in range(d * d))
        out.append(v.ProverStrategy.custom(q.Povm(labels, effects)))
    return out


@pytest.mark.parametrize("spec", SMALL_SPECS, ids=lambda s: s.digest())
def test_no_strategy_beats_ground_state(spec):
    ceiling = v.soundness_ceiling(spec)
    rng = np.random.default_rng(11)
    for strat in _malicious_strategies(spec.n, rng):
        assert v.acceptance_exact(spec, strat).probability <= ceiling + 1e-8, strat.name


def test_wrong_basis_oracle():
    # h = 0: reports x = m, z = 0, so m' = 0 and the (s=-1) check always passes.
    # h = 1: x is uniform and independent of m, so half the time.
    assert v.acceptance_exact(BELL_AF, v.ProverStrategy.wrong_basis()).probability == pytest.approx(0.75, abs=1e-12)


def test_custom_povm_label_validation():
    bad = q.Povm(((((0,), (0,))), (((0,), (1,)))), np.stack([np.diag([1, 0]), np.diag([0, 1])]).astype(complex))
    with pytest.raises(ValueError):
        v.ProverStrategy.custom(bad)
    with pytest.raises(ValueError):
        v.ProverStrategy("nonsense")


def test_mc_examples():
    honest = v.ProverStrategy.honest(q.bell_state())
    r = v.acceptance_mc(BELL_AF, honest, 100_000, seed=1)
    assert r.method == "monte-carlo" and r.trials == 100_000
    assert abs(r.probability - 1.0) <= 4 * r.std_error + 1e-12
    r = v.acceptance_mc(BELL_AF, v.ProverStrategy.uniform(), 100_000, seed=2)
    assert abs(r.probability - 0.5) <= 4 * r.std_error
    assert r.std_error == pytest.approx(np.sqrt(r.probability * (1 - r.probability) / 1e5))
    one = v.acceptance_mc(BELL_AF, v.ProverStrategy.uniform(), 1, seed=3)
    assert one.probability in (0.0, 1.0)
    with pytest.raises(ValueError):
        v.acceptance_mc(BELL_AF, v.ProverStrategy.uniform(), 0, seed=3)


def test_mc_is_deterministic():
    spec = hm.instance("triangle-weighted").spec
    s = v.ProverStrategy.honest(hm.ground(spec).state)
    assert v.acceptance_mc(spec, s, 5000, 42) == v.acceptance_mc(spec, s, 5000, 42)
    assert v.acceptance_mc(spec, s, 5000, 42) != v.acceptance_mc(spec, s, 5000, 43)


@pytest.mark.parametrize("name", hm.instance_names())
def test_mc_agrees_with_exact(name):
    spec = hm.instance(name).spec
    rng = np.random.default_rng(9)
    for strat in [v.ProverStrategy.honest(random_pure_state(rng, spec.n)), v.ProverStrategy.wrong_basis()]:
        exact = v.acceptance_exact(spec, strat).probability
        mc = v.acceptance_mc(spec, strat, 100_000, seed=17)
        assert abs(mc.probability - exact) <= 5 * mc.std_error


def test_mc_allows_six_qubits():
    terms = tuple((j, j + 1, 0.2, 1) for j in range(1, 6))
    spec = hm.HamiltonianSpec(6, terms)
    r = v.acceptance_mc(spec, v.ProverStrategy.uniform(), 20_000, seed=0)
    assert abs(r.probability - 0.5) <= 5 * r.std_error


def test_run_once_transcript():
    rng = np.random.default_rng(0)
    spec = hm.instance("chain3-mixed").spec
    strat = v.ProverStrategy.honest(hm.ground(spec).state)
    runs = [v.run_once(spec, strat, rng) for _ in range(300)]
    assert [m.sender for m in runs[0].messages] == ["center", "center", "prover"]
    assert np.mean([r.accepted for r in runs]) > 0.7
    two = v.run_once(spec, strat, rng, trusted_center=False)
    assert [m.sender for m in two.messages] == ["verifier", "prover"]
    assert set(two.to_dict()) == {"messages", "term", "accepted"}


@pytest.mark.parametrize(
    "text, kind",
    [("honest", "honest-teleport"), ("uniform", "uniform-random-report"),
     ("wrong-basis", "wrong-basis-measure"), ("fixed:01,10", "fixed-report")],
)
def test_parse_strategy(text, kind):
    assert v.parse_strategy(text, BELL_AF).kind == kind


@pytest.mark.parametrize("text", ["fixed:0,1", "fixed:012,1", "cheat"])
def test_parse_strategy_errors(text):
    with pytest.raises(ValueError):
        v.parse_strategy(text, BELL_AF)
