"""Statevector simulator tests against hand-built matrix oracles."""

import numpy as np
import pytest

from flqdsnn import qsim
from flqdsnn.errors import ConfigurationError, UsageError

from oracles import gate_matrix, random_gate

# The matrix oracle lives in tests/oracles.py: explicit 2^n x 2^n Kronecker
# products built from scratch, so a simulator bug cannot hide in the oracle.


def run_gates(n, gates):
    state = qsim.init_zero(n)
    for g in gates:
        state = qsim.apply_gate(state, g)
    return state


# ---------------------------------------------------------------------------
# init_zero
# ---------------------------------------------------------------------------


def test_init_zero_one_qubit():
    assert np.array_equal(qsim.init_zero(1).amplitudes, [1, 0])


def test_init_zero_two_qubits():
    assert np.array_equal(qsim.init_zero(2).amplitudes, [1, 0, 0, 0])


def test_init_zero_four_qubits():
    amps = qsim.init_zero(4).amplitudes
    assert amps.shape == (16,)
    assert amps[0] == 1.0
    assert np.count_nonzero(amps) == 1


@pytest.mark.parametrize("n", [0, -1, 13])
def test_init_zero_rejects_out_of_range(n):
    with pytest.raises(ConfigurationError):
        qsim.init_zero(n)


# ---------------------------------------------------------------------------
# apply_gate: pinned single-gate behaviors
# ---------------------------------------------------------------------------


def test_ry_half_pi_makes_plus_state():
    state = qsim.apply_gate(qsim.init_zero(1), qsim.Gate.ry(0, np.pi / 2))
    expected = np.array([1, 1]) / np.sqrt(2)
    np.testing.assert_allclose(state.amplitudes, expected, atol=1e-15)


def test_cz_flips_sign_of_11():
    # Build |11> with two X gates, then CZ.
    state = run_gates(2, [qsim.Gate.x(0), qsim.Gate.x(1), qsim.Gate.cz(0, 1)])
    expected = np.array([0, 0, 0, -1], dtype=np.complex128)
    np.testing.assert_allclose(state.amplitudes, expected, atol=1e-15)


def test_rot_zero_angles_is_identity():
    rng = np.random.default_rng(7)
    amps = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    amps /= np.linalg.norm(amps)
    state = qsim.Statevector(3, amps)
    out = qsim.apply_gate(state, qsim.Gate.rot(1, 0.0, 0.0, 0.0))
    np.testing.assert_allclose(out.amplitudes, amps, atol=1e-15)


def test_pauli_x_targets_least_significant_bit():
    state = qsim.apply_gate(qsim.init_zero(4), qsim.Gate.x(0))
    assert state.amplitudes[1] == 1.0
    assert np.count_nonzero(state.amplitudes) == 1


def test_fixed_sequence_matches_hand_computed_amplitudes():
    # RY(pi/2) on both qubits: all four amplitudes 1/2. CZ: sign on |11>.
    # RZ(pi) on qubit 0: -i phase where bit0 = 0, +i where bit0 = 1.
    gates = [
        qsim.Gate.ry(0, np.pi / 2),
        qsim.Gate.ry(1, np.pi / 2),
        qsim.Gate.cz(0, 1),
        qsim.Gate.rz(0, np.pi),
    ]
    expected = np.array([-0.5j, 0.5j, -0.5j, -0.5j])
    np.testing.assert_allclose(run_gates(2, gates).amplitudes, expected, atol=1e-15)


def test_apply_gate_rejects_bad_indices():
    state = qsim.init_zero(2)
    with pytest.raises(UsageError):
        qsim.apply_gate(state, qsim.Gate.ry(2, 0.1))
    with pytest.raises(UsageError):
        qsim.apply_gate(state, qsim.Gate.cz(5, 0))


def test_apply_gate_leaves_input_untouched():
    state = qsim.init_zero(2)
    before = state.amplitudes.copy()
    qsim.apply_gate(state, qsim.Gate.x(1))
    np.testing.assert_array_equal(state.amplitudes, before)


# ---------------------------------------------------------------------------
# Gate construction errors
# ---------------------------------------------------------------------------


def test_gate_validation():
    with pytest.raises(UsageError):
        qsim.Gate("hadamard", 0)
    with pytest.raises(UsageError):
        qsim.Gate("ry", 0, angles=(0.1, 0.2))
    with pytest.raises(UsageError):
        qsim.Gate("cz", 0)  # control missing
    with pytest.raises(UsageError):
        qsim.Gate("cz", 1, control=1)
    with pytest.raises(UsageError):
        qsim.Gate("x", 0, control=1)


def test_statevector_rejects_unnormalized_input():
    with pytest.raises(UsageError):
        qsim.Statevector(1, np.array([1.0, 1.0]))
    with pytest.raises(UsageError):
        qsim.Statevector(2, np.array([1.0, 0.0]))


# ---------------------------------------------------------------------------
# probabilities / expectation_z
# ---------------------------------------------------------------------------


def test_probabilities_of_basis_and_plus_states():
    assert np.array_equal(
        qsim.probabilities(qsim.init_zero(4)), [1.0] + [0.0] * 15
    )
    plus = qsim.apply_gate(qsim.init_zero(1), qsim.Gate.ry(0, np.pi / 2))
    np.testing.assert_allclose(qsim.probabilities(plus), [0.5, 0.5], atol=1e-15)


def test_probabilities_sum_to_one_on_random_states():
    rng = np.random.default_rng(11)
    for _ in range(20):
        amps = rng.standard_normal(16) + 1j * rng.standard_normal(16)
        amps /= np.linalg.norm(amps)
        probs = qsim.probabilities(qsim.Statevector(4, amps))
        np.testing.assert_allclose(probs, np.abs(amps) ** 2)
        assert abs(probs.sum() - 1.0) < 1e-10


def test_expectation_z_basis_states():
    zero = qsim.init_zero(1)
    one = qsim.apply_gate(zero, qsim.Gate.x(0))
    plus = qsim.apply_gate(zero, qsim.Gate.ry(0, np.pi / 2))
    assert qsim.expectation_z(zero, 0) == pytest.approx(1.0)
    assert qsim.expectation_z(one, 0) == pytest.approx(-1.0)
    assert qsim.expectation_z(plus, 0) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(UsageError):
        qsim.expectation_z(zero, 1)


# ---------------------------------------------------------------------------
# Properties
# ---------------------------------------------------------------------------


def test_norm_preserved_across_random_sequences():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        n = int(rng.integers(2, 5))
        gates = [random_gate(rng, n) for _ in range(int(rng.integers(1, 30)))]
        state = run_gates(n, gates)
        assert abs(np.linalg.norm(state.amplitudes) ** 2 - 1.0) < 1e-10


def test_pauli_x_is_an_involution():
    rng = np.random.default_rng(3)
    amps = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    amps /= np.linalg.norm(amps)
    state = qsim.Statevector(3, amps)
    twice = qsim.apply_gate(qsim.apply_gate(state, qsim.Gate.x(2)), qsim.Gate.x(2))
    np.testing.assert_allclose(twice.amplitudes, amps, atol=1e-12)


def test_cz_is_symmetric_in_its_qubits():
    rng = np.random.default_rng(4)
    amps = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    amps /= np.linalg.norm(amps)
    state = qsim.Statevector(3, amps)
    ab = qsim.apply_gate(state, qsim.Gate.cz(0, 2))
    ba = qsim.apply_gate(state, qsim.Gate.cz(2, 0))
    np.testing.assert_array_equal(ab.amplitudes, ba.amplitudes)


def test_rot_equals_rz_ry_rz_sequence():
    rng = np.random.default_rng(5)
    for _ in range(10):
        a1, a2, a3 = rng.uniform(0, 2 * np.pi, size=3)
        target = int(rng.integers(3))
        state = qsim.Statevector(
            3, (lambda v: v / np.linalg.norm(v))(
                rng.standard_normal(8) + 1j * rng.standard_normal(8)
            ),
        )
        via_rot = qsim.apply_gate(state, qsim.Gate.rot(target, a1, a2, a3))
        step = qsim.apply_gate(state, qsim.Gate.rz(target, a1))
        step = qsim.apply_gate(step, qsim.Gate.ry(target, a2))
        step = qsim.apply_gate(step, qsim.Gate.rz(target, a3))
        np.testing.assert_allclose(via_rot.amplitudes, step.amplitudes, atol=1e-12)


def test_matches_kronecker_oracle_for_small_circuits():
    # Every gate application must agree with explicit matrix-vector products.
    rng = np.random.default_rng(99)
    for n in (1, 2, 3):
        for _ in range(40):
            gates = [random_gate(rng, n) for _ in range(int(rng.integers(1, 12)))]
            state = qsim.init_zero(n)
            vec = np.zeros(2**n, dtype=np.complex128)
            vec[0] = 1.0
            for g in gates:
                state = qsim.apply_gate(state, g)
                vec = gate_matrix(g, n) @ vec
                np.testing.assert_allclose(state.amplitudes, vec, atol=1e-12)
