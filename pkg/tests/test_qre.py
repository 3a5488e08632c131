import math

import numpy as np
import pytest

from qrekit import hamiltonian as hm
from qrekit import qcore as q
from qrekit import qre
from qrekit import schemes as S
from qrekit import verify as v
from qrekit.qcore.random import random_pure_state

N2_SPECS = [hm.instance(n).spec for n in hm.instance_names() if hm.instance(n).spec.n == 2]
N3_SPECS = [hm.instance(n).spec for n in hm.instance_names() if hm.instance(n).spec.n == 3]
BREIDBART_EPS = 1 - 0.5 * math.cos(math.pi / 8) ** 2  # 0.5732233...


def _random_report_povm(rng, n_in, n_report):
    d, dd = 1 << n_in, 1 << (2 * n_report)
    g = rng.normal(size=(dd, d)) + 1j * rng.normal(size=(dd, d))
    qmat, _ = np.linalg.qr(g)
    effects = np.einsum("oi,oj->oij", np.conj(qmat), qmat)
    mask = (1 << n_report) - 1
    labels = tuple((q.int_to_bits(o >> n_report, n_report), q.int_to_bits(o & mask, n_report)) for o in range(dd))
    return q.Povm(labels, effects)


# --------------------------------------------------------------------------
# scheme construction and measured parameters
# --------------------------------------------------------------------------

def test_controlled_hadamard_outputs():
    f = S.controlled_hadamard_target()
    expected = [q.ZERO, q.ONE, q.PLUS, q.MINUS]
    for rho, psi in zip(S.basis_family(2), expected):
        assert q.fidelity_with_pure(psi, f(rho)) == pytest.approx(1.0, abs=1e-12)


def test_identity_scheme_params():
    p = qre.measure_params(S.identity_scheme(2))
    assert p.delta_hat == pytest.approx(0.0, abs=1e-12)
    assert p.eps_hat == pytest.approx(0.0, abs=1e-12)
    assert not p.classical


def test_measure_forward_params():
    p = qre.measure_params(S.measure_forward_scheme())
    # ½‖I/2 − |+⟩⟨+|‖₁ with eigenvalues ±½
    oracle = 0.5 * np.sum(np.abs(np.linalg.eigvalsh(np.eye(2) / 2 - q.PLUS.projector())))
    assert oracle == pytest.approx(0.5)
    assert p.delta_hat == pytest.approx(oracle, abs=1e-9)
    assert p.eps_hat == pytest.approx(0.0, abs=1e-12)
    assert p.classical


def test_label_params():
    p = qre.measure_params(S.label_scheme())
    assert p.delta_hat == pytest.approx(0.0, abs=1e-12)
    assert p.eps_hat == pytest.approx(0.5732, abs=1e-4)
    assert p.eps_hat == pytest.approx(BREIDBART_EPS, abs=1e-10)
    assert p.classical


def test_label_privacy_distribution_oracle():
    # Sim(|0⟩) puts weight cos²(π/8)/2 on each |g 0⟩ and sin²(π/8)/2 on each |g 1⟩
    s = S.label_scheme()
    out = s.simulator(q.ZERO.density())
    c2, s2 = math.cos(math.pi / 8) ** 2, math.sin(math.pi / 8) ** 2
    np.testing.assert_allclose(np.real(np.diag(out.matrix)), [c2 / 2, s2 / 2, c2 / 2, s2 / 2], atol=1e-12)
    assert out.is_diagonal()


@pytest.mark.parametrize("name", S.scheme_names())
def test_params_self_consistent(name):
    s = S.get_scheme(name)
    p = qre.measure_params(s)
    assert all(e <= p.delta_hat + 1e-15 for e in qre.correctness_errors(s))
    assert all(e <= p.eps_hat + 1e-15 for e in qre.privacy_errors(s))
    assert 0 <= p.delta_hat <= 1 and 0 <= p.eps_hat <= 1
    assert p.decoder_kraus == s.decode.count


def test_scheme_dimension_validation():
    i1, i2 = q.identity_channel(1), q.identity_channel(2)
    with pytest.raises(ValueError):
        qre.QreScheme("bad", i1, i2, i1, i1, (q.ZERO.density(),))
    with pytest.raises(ValueError):
        qre.QreScheme("bad", i1, i1, i1, i1, (q.bell_state().density(),))
    with pytest.raises(ValueError):
        qre.QreScheme("bad", i1, i1, i1, i1, (q.ZERO.density(),), junk_qubits=2)
    with pytest.raises(ValueError):
        qre.measure_params(qre.QreScheme("empty", i1, i1, i1, i1, ()))


# --------------------------------------------------------------------------
# protocol
# --------------------------------------------------------------------------

def test_sigma_maps_to_challenge():
    f = S.hadamard_layer(2)
    for h in (0, 1):
        for m in [(0, 0), (0, 1), (1, 0), (1, 1)]:
            np.testing.assert_allclose(f(qre.sigma_state(h, m)).matrix, v.bb84_state(h, m).density().matrix, atol=1e-12)


@pytest.mark.parametrize("spec", N2_SPECS + N3_SPECS, ids=lambda s: s.digest())
def test_identity_scheme_equals_plain_protocol(spec):
    s = S.identity_scheme(spec.n)
    rng = np.random.default_rng(spec.n)
    strategies = [v.ProverStrategy.honest(hm.ground(spec).state), v.ProverStrategy.honest(random_pure_state(rng, spec.n)),
                  v.ProverStrategy.uniform(), v.ProverStrategy.wrong_basis()]
    for strat in strategies:
        two = qre.protocol_two_run(s, spec, strat).probability
        assert two == pytest.approx(v.acceptance_exact(spec, strat).probability, abs=1e-9)


def test_identity_scheme_outcome_tables_equal():
    spec = N2_SPECS[0]
    s = S.identity_scheme(2)
    strat = v.ProverStrategy.honest(hm.ground(spec).state)
    a = v.outcome_table(2, strat, qre.two_round_preparer(s, True))
    b = v.outcome_table(2, strat)
    np.testing.assert_allclose(a, b, atol=1e-12)


@pytest.mark.parametrize("scheme", [S.noisy_scheme(), S.noisy_scheme(junk_qubits=1)], ids=lambda s: s.name)
@pytest.mark.parametrize("spec", N2_SPECS, ids=lambda s: s.digest())
def test_honest_degradation_within_two_delta(scheme, spec):
    rng = np.random.default_rng(1)
    for psi in [hm.ground(spec).state, random_pure_state(rng, 2)]:
        cmp = qre.honest_comparison(scheme, spec, psi)
        assert cmp.difference > 0
        assert cmp.difference <= cmp.bound + 1e-8


def test_honest_degradation_three_qubits():
    for spec in N3_SPECS:
        cmp = qre.honest_comparison(S.noisy_scheme(3), spec, hm.ground(spec).state)
        assert cmp.holds


@pytest.mark.parametrize("scheme", [S.noisy_scheme(), S.noisy_scheme(junk_qubits=1)], ids=lambda s: s.name)
@pytest.mark.parametrize("spec", N2_SPECS, ids=lambda s: s.digest())
def test_malicious_replay_within_two_eps(scheme, spec):
    rng = np.random.default_rng(2)
    strategies = [v.ProverStrategy.uniform(), v.ProverStrategy.fixed((0, 1), (1, 1))]
    strategies += [v.ProverStrategy.custom(_random_report_povm(rng, scheme.encode.out_qubits, 2)) for _ in range(4)]
    for strat in strategies:
        cmp = qre.malicious_comparison(scheme, spec, strat)
        assert cmp.difference <= cmp.bound + 1e-8


def test_malicious_replay_exact_simulator_matches():
    scheme = S.noisy_scheme(simulator="noise")
    assert qre.measure_params(scheme).eps_hat == pytest.approx(0.0, abs=1e-12)
    rng = np.random.default_rng(3)
    for spec in N2_SPECS:
        strat = v.ProverStrategy.custom(_random_report_povm(rng, 2, 2))
        cmp = qre.malicious_comparison(scheme, spec, strat)
        assert cmp.difference <= 1e-8


def test_premise_failure():
    # F = identity does not map σ (Hadamard-rotated) to the challenge
    i2 = q.identity_channel(2)
    bad = qre.QreScheme("bad", i2, i2, i2, i2, qre.sigma_family(2))
    with pytest.raises(ValueError, match="BB84"):
        qre.protocol_two_run(bad, N2_SPECS[0], v.ProverStrategy.uniform())


def test_protocol_mc_mode():
    spec = N2_SPECS[0]
    s = S.noisy_scheme()
    strat = v.ProverStrategy.honest(hm.ground(spec).state)
    exact = qre.protocol_two_run(s, spec, strat).probability
    mc = qre.protocol_two_run(s, spec, strat, mode="mc", trials=100_000, seed=4)
    assert abs(mc.probability - exact) <= 5 * mc.std_error
    with pytest.raises(ValueError):
        qre.protocol_two_run(s, spec, strat, mode="bogus")


# --------------------------------------------------------------------------
# completeness/soundness gap
# --------------------------------------------------------------------------

def test_gap_identity_scheme():
    g = qre.completeness_soundness_gap(S.identity_scheme(2), alpha=0.0, beta=0.2)
    assert g.c_prime == pytest.approx(1.0)
    assert g.s_prime == pytest.approx(0.8)
    assert g.positive


def test_gap_zero():
    g = qre.completeness_soundness_gap(qre.SchemeParams(0.05, 0.05, False), alpha=0.0, beta=0.2)
    assert g.c_prime == pytest.approx(0.9)
    assert g.s_prime == pytest.approx(0.9)
    assert g.gap == pytest.approx(0.0, abs=1e-12)
    assert not g.positive


def test_gap_measure_forward_negative():
    g = qre.completeness_soundness_gap(S.measure_forward_scheme(), alpha=0.0, beta=0.2)
    # 1 − 0 − 2·0.5 = 0 up to rounding in δ̂
    assert g.c_prime == pytest.approx(0.0, abs=1e-12)
    assert g.c_prime <= 1e-12
    assert g.gap < 0 and not g.positive


def test_params_range_validation():
    with pytest.raises(ValueError):
        qre.SchemeParams(1.5, 0.0, False)


# --------------------------------------------------------------------------
# files
# --------------------------------------------------------------------------

@pytest.mark.parametrize("name", ["label", "noisy-junk"])
def test_scheme_json_roundtrip(name, tmp_path):
    s = S.get_scheme(name)
    path = tmp_path / "scheme.json"
    qre.save_scheme(s, path)
    back = qre.load_scheme(path)
    assert back.name == s.name and back.junk_qubits == s.junk_qubits
    for attr in ("target", "encode", "decode", "simulator"):
        np.testing.assert_array_equal(getattr(back, attr).kraus, getattr(s, attr).kraus)
    assert qre.measure_params(back) == qre.measure_params(s)


def test_scheme_json_errors():
    with pytest.raises(ValueError, match="family"):
        qre.scheme_from_dict({"name": "x", "target": {}, "encode": {}, "decode": {}, "simulator": {}})
    d = qre.scheme_to_dict(S.identity_on_classical_scheme())
    d["encode"]["kraus"] = [[[[2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]]
    with pytest.raises(ValueError):
        qre.scheme_from_dict(d)


def test_unknown_scheme():
    with pytest.raises(KeyError):
        S.get_scheme("perfect")
