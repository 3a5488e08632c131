import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrekit import blind as b
from qrekit import qcore as q
from qrekit.qcore.random import random_density, random_pure_state

PLUS = q.PLUS


def _rz_half(xi):
    # e^{iξZ/2}
    return np.diag([np.exp(0.5j * xi), np.exp(-0.5j * xi)])


def _embed_single(op, j, n):
    mats = [np.eye(2)] * n
    mats[j] = op
    return q.kron_all(mats)


# --------------------------------------------------------------------------
# angles and keys
# --------------------------------------------------------------------------

def test_angle_octant_arithmetic():
    assert b.AngleOctant(17).value == 1
    assert (b.AngleOctant(15) + 3).value == 2
    assert (-b.AngleOctant(3)).value == 13
    assert b.AngleOctant(4).radians == pytest.approx(math.pi / 2)


def test_otp_key_lengths():
    with pytest.raises(ValueError):
        b.OtpKey([0, 1], [1])


# --------------------------------------------------------------------------
# graph states
# --------------------------------------------------------------------------

def test_graph_small_examples():
    assert q.pure_fidelity(b.linear_graph_state(1), PLUS) == pytest.approx(1.0)
    expect = q.PureState(np.array([1, 1, 1, -1]) / 2)
    assert q.pure_fidelity(b.linear_graph_state(2), expect) == pytest.approx(1.0)
    with pytest.raises(q.DimensionError):
        b.linear_graph_state(13)


def test_graph_stabilizers_n4():
    n = 4
    g = b.linear_graph_state(n).amplitudes
    for j in range(n):
        op = _embed_single(q.X, j, n)
        if j > 0:
            op = op @ _embed_single(q.Z, j - 1, n)
        if j < n - 1:
            op = op @ _embed_single(q.Z, j + 1, n)
        assert np.vdot(g, op @ g).real == pytest.approx(1.0, abs=1e-9)


def test_rotated_graph_examples():
    np.testing.assert_allclose(b.rotated_graph([0.0] * 3).amplitudes, b.linear_graph_state(3).amplitudes)
    single = b.rotated_graph([b.AngleOctant(4)])
    assert q.pure_fidelity(single, q.PureState(np.array([1, 1j]) / np.sqrt(2))) == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-7, 7, allow_nan=False), min_size=1, max_size=5))
def test_rotation_commutes_with_cz(thetas):
    a = b.rotated_graph(thetas)
    c = b.z_rotations(b.linear_graph_state(len(thetas)), thetas)
    assert q.pure_fidelity(a, c) >= 1 - 1e-9


# --------------------------------------------------------------------------
# single step
# --------------------------------------------------------------------------

def _wire_with_input(psi):
    # CZ (|ψ⟩ ⊗ |+⟩)
    return q.PureState(q.CZ @ np.kron(psi.amplitudes, PLUS.amplitudes))


def test_step_theta_zero_gives_hadamard():
    rng = np.random.default_rng(0)
    for _ in range(5):
        psi = random_pure_state(rng, 1)
        _, post = b.mbqc_step(_wire_with_input(psi), 0.0, outcome=0)
        assert q.pure_fidelity(post, psi.evolve(q.H)) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(-7, 7, allow_nan=False), st.integers(0, 1), st.integers(0, 2**31))
def test_step_logical_gate(theta, s, seed):
    psi = random_pure_state(np.random.default_rng(seed), 1)
    _, post = b.mbqc_step(_wire_with_input(psi), theta, outcome=s)
    gate = np.linalg.matrix_power(q.X, s) @ b.step_gate(theta)
    assert q.pure_fidelity(post, psi.evolve(gate)) >= 1 - 1e-9


def test_step_outcomes_uniform_on_zero_input():
    probs = b.outcome_probabilities(_wire_with_input(q.ZERO), 0.0)
    np.testing.assert_allclose(probs, [0.5, 0.5], atol=1e-12)


def test_step_zero_branch_and_bad_args():
    # |+⟩ measured at θ = 0 never gives outcome 1
    wire = q.PureState(np.kron(PLUS.amplitudes, q.ZERO.amplitudes))
    with pytest.raises(ValueError, match="probability"):
        b.mbqc_step(wire, 0.0, outcome=1)
    with pytest.raises(ValueError):
        b.mbqc_step(wire, 0.0)
    with pytest.raises(q.DimensionError):
        b.mbqc_step(PLUS, 0.0, outcome=0)


def test_delta_substitution_identity():
    """Measuring the rotated graph at φ+θ+rπ matches measuring |G⟩ at φ+rπ and rotating the rest."""
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(2, 5))
        phi = rng.uniform(0, 2 * np.pi)
        thetas = rng.uniform(0, 2 * np.pi, size=n)
        r = int(rng.integers(2))
        s = int(rng.integers(2))
        _, lhs = b.mbqc_step(b.rotated_graph(thetas), phi + thetas[0] + r * np.pi, outcome=s)
        _, rhs = b.mbqc_step(b.linear_graph_state(n), phi + r * np.pi, outcome=s)
        rhs = b.z_rotations(rhs, thetas[1:])
        assert q.pure_fidelity(lhs, rhs) >= 1 - 1e-9


def test_logical_programs():
    plus = PLUS
    for angles in (b.PROGRAM_I, b.PROGRAM_X):
        assert q.pure_fidelity(plus.evolve(b.logical_unitary(angles)), plus) == pytest.approx(1.0)
    u = b.logical_unitary(b.PROGRAM_X)
    assert abs(np.vdot(u.reshape(-1), q.X.reshape(-1))) / 2 == pytest.approx(1.0)


# --------------------------------------------------------------------------
# pad
# --------------------------------------------------------------------------

def test_qotp_examples():
    rng = np.random.default_rng(5)
    rho = random_density(rng, 1)
    np.testing.assert_allclose(b.qotp(rho, b.OtpKey([0], [0])).matrix, rho.matrix)
    np.testing.assert_allclose(b.pad_average(rho).matrix, np.eye(2) / 2, atol=1e-12)
    for _ in range(10):
        psi = random_pure_state(rng, 2)
        key = b.OtpKey(rng.integers(0, 2, 2), rng.integers(0, 2, 2))
        assert q.pure_fidelity(b.qotp_unlock(b.qotp(psi, key), key), psi) >= 1 - 1e-10
    with pytest.raises(ValueError):
        b.qotp(psi, b.OtpKey([0], [1]))


# --------------------------------------------------------------------------
# protocol runs
# --------------------------------------------------------------------------

@pytest.mark.parametrize("backend", ["bfk", "mf"])
@pytest.mark.parametrize("n", [2, 3, 4])
def test_honest_runs_decode(backend, n):
    rng = np.random.default_rng(n)
    for _ in range(10):
        angles = [int(a) for a in rng.integers(0, 16, size=n - 1)]
        res = b.run(backend, angles, n, rng)
        assert res.fidelity_to_intended >= 1 - 1e-9
        assert res.fidelity_to_deviated_target >= 1 - 1e-9
        padded = b.qotp(res.intended_output, res.key)
        assert q.fidelity_with_pure(padded, res.server_final_state) >= 1 - 1e-9


@pytest.mark.parametrize("backend", ["bfk", "mf"])
def test_attacked_outputs(backend):
    rng = np.random.default_rng(9)
    ui = PLUS.evolve(_rz_half(np.pi / 2))
    ux = PLUS.evolve(_rz_half(-np.pi / 2))
    for _ in range(5):
        assert q.fidelity_with_pure(ui, b.run(backend, b.PROGRAM_I, 3, rng, np.pi / 2).unlocked_state) >= 1 - 1e-9
        assert q.fidelity_with_pure(ux, b.run(backend, b.PROGRAM_X, 3, rng, np.pi / 2).unlocked_state) >= 1 - 1e-9
    assert abs(ui.overlap(ux)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["bfk", "mf"]), st.floats(-7, 7, allow_nan=False),
       st.lists(st.integers(0, 15), min_size=1, max_size=3), st.integers(0, 2**31))
def test_attack_gives_deviated_target(backend, xi, angles, seed):
    res = b.run(backend, angles, len(angles) + 1, np.random.default_rng(seed), xi)
    assert 0 <= res.fidelity_to_deviated_target <= 1 + 1e-12
    assert res.fidelity_to_deviated_target >= 1 - 1e-9


def test_backends_agree():
    rng = np.random.default_rng(2)
    for xi in (0.0, 0.3, np.pi / 2):
        angles = [3, 10]
        x = b.bfk_run(angles, 3, rng, xi).unlocked_state
        y = b.mf_run(angles, 3, rng, xi).unlocked_state
        assert q.trace_distance(x, y) < 1e-9


def test_run_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        b.bfk_run([0, 0], 4, rng)
    with pytest.raises(q.DimensionError):
        b.bfk_run([0] * 8, 9, rng)
    with pytest.raises(ValueError, match="backend"):
        b.run("brickwork", [0], 2, rng)


def test_transcript_contents():
    res = b.bfk_run([5, 2], 3, np.random.default_rng(4))
    t = res.transcript
    assert all(0 <= th < 8 for th in t["theta"])
    assert all(0 <= d < 16 for d in t["delta"])
    assert t["theta_out"] in (0, 8)
    # first message carries no byproduct adaptation
    assert t["delta"][0] == (5 + t["theta"][0] + 8 * t["r"][0]) % 16


# --------------------------------------------------------------------------
# blindness gap
# --------------------------------------------------------------------------

@pytest.mark.parametrize("backend", ["bfk", "mf"])
def test_blindness_gap_values(backend):
    assert b.blindness_gap(backend, np.pi / 2) == pytest.approx(0.5, abs=1e-9)
    assert b.blindness_gap(backend, 0.0) == pytest.approx(0.0, abs=1e-9)
    assert b.blindness_gap(backend, np.pi / 4) == pytest.approx(math.sin(math.pi / 4) / 2, abs=1e-9)


def test_blindness_gap_oracle_quarter():
    a = PLUS.evolve(_rz_half(np.pi / 4)).density().matrix
    c = PLUS.evolve(_rz_half(-np.pi / 4)).density().matrix
    oracle = 0.25 * np.sum(np.abs(np.linalg.eigvalsh(a - c)))
    assert oracle == pytest.approx(0.35355, abs=1e-5)
    assert b.blindness_gap("bfk", np.pi / 4) == pytest.approx(oracle, abs=1e-9)


def test_gap_report_dict():
    d = b.blindness_gap_report("mf", np.pi / 2).to_dict()
    assert d["gap"] == pytest.approx(0.5)
    assert d["fidelity_identity"] >= 1 - 1e-9 and d["fidelity_x"] >= 1 - 1e-9


# --------------------------------------------------------------------------
# client messages
# --------------------------------------------------------------------------

def test_delta_uniform_chi_square():
    rng = np.random.default_rng(123)
    for phi in (0, 5):
        deltas = b.sample_client_messages([phi, 3], 3, 100_000, rng)
        assert b.uniformity_pvalue(deltas[:, 0]) > 1e-4


def test_delta_distribution_independent_of_program():
    rng = np.random.default_rng(7)
    h1 = b.octant_histogram(b.sample_client_messages(b.PROGRAM_I, 3, 100_000, rng))
    h2 = b.octant_histogram(b.sample_client_messages(b.PROGRAM_X, 3, 100_000, rng))
    assert b.total_variation(h1, h2) < 0.01


def test_sampler_matches_protocol_runs():
    # the vectorised sampler reproduces the first message of full simulations
    rng = np.random.default_rng(8)
    runs = [b.bfk_run([6, 1], 3, rng).transcript for _ in range(4000)]
    first = np.array([t["delta"][0] for t in runs])
    assert b.uniformity_pvalue(first) > 1e-4
    outcomes = np.array([t["outcomes"] for t in runs])
    assert abs(outcomes.mean() - 0.5) < 0.03


def test_key_averaged_server_state_is_maximally_mixed():
    for angles, n, xi in [(b.PROGRAM_X, 3, 0.0), ((3,), 2, 0.0), ((7,), 2, 0.9)]:
        rho = b.key_averaged_server_state(angles, n, xi)
        np.testing.assert_allclose(rho.matrix, np.eye(2) / 2, atol=1e-9)
