"""Statevector core: gate semantics against a dense matrix oracle."""

import numpy as np
import pytest

from qukan.errors import DomainError
from qukan.simulator import (
    EntanglingLayerStack,
    RegisterLayout,
    StateVector,
    all_probabilities,
    apply_cnot,
    apply_entangling_layers,
    apply_rot,
    basis_state,
    default_layout,
    joint_distribution,
    joint_probability,
    position_marginal,
    position_marginals,
    random_stack,
    uniform_state,
    zero_stack,
)

# --- dense oracle: build every gate as an explicit 2**n x 2**n matrix -------


def oracle_rot(phi, theta, omega):
    rz = lambda a: np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    ry = np.array([[c, -s], [s, c]], dtype=complex)
    return rz(omega) @ ry @ rz(phi)


def oracle_embed_1q(mat, n, qubit):
    # qubit 0 is the most significant bit
    full = np.array([[1.0 + 0j]])
    for q in range(n):
        full = np.kron(full, mat if q == qubit else np.eye(2, dtype=complex))
    return full


def oracle_cnot(n, control, target):
    dim = 1 << n
    U = np.zeros((dim, dim), dtype=complex)
    for b in range(dim):
        if (b >> (n - 1 - control)) & 1:
            U[b ^ (1 << (n - 1 - target)), b] = 1.0
        else:
            U[b, b] = 1.0
    return U


def oracle_apply_circuit(n, ops):
    """ops: list of ('rot', q, phi, theta, omega) or ('cnot', c, t)."""
    state = np.zeros(1 << n, dtype=complex)
    state[0] = 1.0
    for op in ops:
        if op[0] == "rot":
            U = oracle_embed_1q(oracle_rot(*op[2:]), n, op[1])
        else:
            U = oracle_cnot(n, op[1], op[2])
        state = U @ state
    return state


# --- basis_state -----------------------------------------------------------


def test_basis_state_examples():
    assert np.array_equal(basis_state(1, 0).amplitudes, [1, 0])
    assert np.array_equal(basis_state(2, 3).amplitudes, [0, 0, 0, 1])
    s = basis_state(6, 0)
    assert s.dim == 64 and s.amplitudes[0] == 1.0 and np.count_nonzero(s.amplitudes) == 1


def test_basis_state_out_of_range():
    with pytest.raises(DomainError):
        basis_state(2, 4)
    with pytest.raises(DomainError):
        basis_state(2, -1)


# --- single-qubit rotations --------------------------------------------------


def test_rot_flips_zero_state():
    s = apply_rot(basis_state(1, 0), 0, 0.0, np.pi, 0.0)
    assert np.allclose(all_probabilities(s), [0.0, 1.0], atol=1e-12)


def test_rot_identity():
    rng = np.random.default_rng(7)
    amps = rng.normal(size=4) + 1j * rng.normal(size=4)
    amps /= np.linalg.norm(amps)
    s = StateVector(2, amps)
    out = apply_rot(s, 1, 0.0, 0.0, 0.0)
    assert np.allclose(out.amplitudes, amps, atol=1e-15)


def test_rot_half_turn_splits_evenly():
    s = apply_rot(basis_state(1, 0), 0, 0.0, np.pi / 2, 0.0)
    # frozen from the 2x2 matrix product oracle
    assert np.allclose(all_probabilities(s), [0.5, 0.5], atol=1e-12)


def test_rot_rejects_nonfinite_angles():
    with pytest.raises(DomainError):
        apply_rot(basis_state(1, 0), 0, np.nan, 0.0, 0.0)


# --- CNOT --------------------------------------------------------------------


def test_cnot_control_set():
    s = apply_cnot(basis_state(2, 0b10), 0, 1)
    assert np.allclose(s.amplitudes, basis_state(2, 0b11).amplitudes)


def test_cnot_control_clear():
    s = apply_cnot(basis_state(2, 0b01), 0, 1)
    assert np.allclose(s.amplitudes, basis_state(2, 0b01).amplitudes)


def test_cnot_entangles_superposition():
    plus = StateVector(2, np.array([1, 0, 1, 0]) / np.sqrt(2))
    out = apply_cnot(plus, 0, 1)
    expected = oracle_cnot(2, 0, 1) @ plus.amplitudes
    assert np.allclose(out.amplitudes, expected, atol=1e-12)
    assert np.allclose(out.amplitudes, np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_cnot_reversed_control():
    rng = np.random.default_rng(3)
    amps = rng.normal(size=8) + 1j * rng.normal(size=8)
    amps /= np.linalg.norm(amps)
    out = apply_cnot(StateVector(3, amps), 2, 0)
    assert np.allclose(out.amplitudes, oracle_cnot(3, 2, 0) @ amps, atol=1e-12)


def test_cnot_rejects_equal_qubits():
    with pytest.raises(DomainError):
        apply_cnot(basis_state(2, 0), 1, 1)


# --- entangling layers -------------------------------------------------------


def test_zero_stack_single_qubit_is_identity():
    s = apply_rot(basis_state(1, 0), 0, 0.3, 1.1, -0.4)
    out = apply_entangling_layers(s, zero_stack([0], 1))
    assert np.allclose(out.amplitudes, s.amplitudes, atol=1e-15)


def test_two_qubit_layer_matches_oracle():
    angles = np.zeros((1, 2, 3))
    angles[0, 0] = (0.0, np.pi, 0.0)
    stack = EntanglingLayerStack((0, 1), angles)
    out = apply_entangling_layers(basis_state(2, 0), stack)
    ops = [
        ("rot", 0, 0.0, np.pi, 0.0),
        ("rot", 1, 0.0, 0.0, 0.0),
        ("cnot", 0, 1),
        ("cnot", 1, 0),
    ]
    assert np.allclose(out.amplitudes, oracle_apply_circuit(2, ops), atol=1e-12)


def test_stack_shape_mismatch_rejected():
    with pytest.raises(DomainError):
        EntanglingLayerStack((0, 1), np.zeros((2, 3, 3)))


def test_random_stack_preserves_norm():
    rng = np.random.default_rng(11)
    for _ in range(10):
        stack = random_stack(range(4), 3, rng)
        out = apply_entangling_layers(basis_state(4, 0), stack)
        assert abs(out.norm() - 1.0) < 1e-12


# --- oracle equivalence on random circuits -----------------------------------


def test_random_circuits_match_dense_oracle():
    rng = np.random.default_rng(42)
    for _ in range(60):
        n = int(rng.integers(1, 5))
        ops = []
        for _ in range(int(rng.integers(1, 12))):
            if n >= 2 and rng.random() < 0.4:
                c, t = rng.choice(n, size=2, replace=False)
                ops.append(("cnot", int(c), int(t)))
            else:
                q = int(rng.integers(0, n))
                ops.append(("rot", q, *rng.uniform(-np.pi, np.pi, 3)))
        state = basis_state(n, 0)
        for op in ops:
            if op[0] == "rot":
                state = apply_rot(state, op[1], *op[2:])
            else:
                state = apply_cnot(state, op[1], op[2])
        assert np.allclose(state.amplitudes, oracle_apply_circuit(n, ops), atol=1e-12)
        assert abs(state.norm() - 1.0) < 1e-12


def test_gate_application_is_deterministic():
    rng = np.random.default_rng(0)
    stack = random_stack(range(3), 2, rng)
    a = apply_entangling_layers(basis_state(3, 0), stack).amplitudes
    b = apply_entangling_layers(basis_state(3, 0), stack).amplitudes
    assert np.array_equal(a, b)


# --- probabilities and register readout --------------------------------------


def test_all_probabilities_examples():
    assert np.allclose(all_probabilities(basis_state(1, 0)), [1, 0])
    assert np.allclose(all_probabilities(uniform_state(2)), [0.25] * 4)


def test_all_probabilities_random_circuit_matches_oracle():
    rng = np.random.default_rng(5)
    stack = random_stack(range(6), 2, rng)
    state = apply_entangling_layers(basis_state(6, 0), stack)
    ops = []
    for layer in range(2):
        for q in range(6):
            ops.append(("rot", q, *stack.angles[layer, q]))
        for i in range(6):
            ops.append(("cnot", i, (i + 1) % 6))
    expected = np.abs(oracle_apply_circuit(6, ops)) ** 2
    assert np.allclose(all_probabilities(state), expected, atol=1e-12)
    assert abs(all_probabilities(state).sum() - 1.0) < 1e-12


def test_joint_probability_product_state():
    layout = default_layout(1, 4)
    state = basis_state(5, layout.joint_index(0, 5))
    assert joint_probability(state, layout, 0, 5) == pytest.approx(1.0)
    assert joint_probability(state, layout, 1, 5) == 0.0


def test_joint_probability_range_checks():
    layout = default_layout(2, 4)
    state = basis_state(6, 0)
    with pytest.raises(DomainError):
        joint_probability(state, layout, 4, 0)
    with pytest.raises(DomainError):
        joint_probability(state, layout, 0, 16)


def test_joint_distribution_nondefault_order():
    # position qubit first: |q0 q1> with q1 the label
    layout = RegisterLayout(label_qubits=(1,), position_qubits=(0,))
    state = basis_state(2, 0b01)  # q0=0, q1=1 -> label 1, position 0
    joint = joint_distribution(state, layout)
    assert joint[layout.joint_index(1, 0)] == pytest.approx(1.0)


def test_position_marginal_uniform():
    layout = default_layout(2, 4)
    state = uniform_state(6)
    for k in (0, 7, 15):
        assert position_marginal(state, layout, k) == pytest.approx(1 / 16, abs=1e-12)


def test_position_marginals_sum_to_one():
    rng = np.random.default_rng(9)
    layout = default_layout(2, 4)
    for _ in range(5):
        state = apply_entangling_layers(basis_state(6, 0), random_stack(range(6), 3, rng))
        margs = position_marginals(state, layout)
        assert abs(margs.sum() - 1.0) < 1e-12
        assert margs[3] == pytest.approx(position_marginal(state, layout, 3))


def test_layout_validation():
    with pytest.raises(DomainError):
        RegisterLayout((0, 1), (1, 2))
    with pytest.raises(DomainError):
        RegisterLayout((0,), (2,))
