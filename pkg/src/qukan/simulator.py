"""Dense statevector simulation for small qubit registers.

Conventions (these are library conventions, not physics-imposed facts):

* Qubit 0 is the **most significant bit** of a basis index, so for a
  3-qubit register the basis state ``|q0 q1 q2>`` has index
  ``q0*4 + q1*2 + q2``.
* ``Rot(phi, theta, omega) = RZ(omega) @ RY(theta) @ RZ(phi)`` -- the
  usual Euler decomposition used by strongly entangling layers.
* A strongly entangling layer applies one ``Rot`` per target qubit and
  then a CNOT ring ``CNOT(q_i, q_{i+1 mod m})``; the ring is applied
  unconditionally whenever the layer acts on two or more qubits.

States are immutable values: every gate application returns a new
:class:`StateVector`. The raw kernels accept arrays of shape
``(..., 2**n)`` so batches of states can be pushed through the same
gate sequence at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

# ---------------------------------------------------------------------------
# raw kernels (batch-aware, operate on the last axis)


def _apply_single_qubit(amps: np.ndarray, n_qubits: int, qubit: int, mat: np.ndarray) -> np.ndarray:
    """Apply a 2x2 unitary to one qubit of a (..., 2**n) amplitude array."""
    shape = amps.shape
    a = amps.reshape(-1, 1 << qubit, 2, 1 << (n_qubits - qubit - 1))
    out = np.empty_like(a)
    a0 = a[:, :, 0, :]
    a1 = a[:, :, 1, :]
    out[:, :, 0, :] = mat[0, 0] * a0 + mat[0, 1] * a1
    out[:, :, 1, :] = mat[1, 0] * a0 + mat[1, 1] * a1
    return out.reshape(shape)


def _apply_cnot(amps: np.ndarray, n_qubits: int, control: int, target: int) -> np.ndarray:
    """Flip `target` where `control` is 1 on a (..., 2**n) amplitude array."""
    shape = amps.shape
    lo, hi = (control, target) if control < target else (target, control)
    a = amps.reshape(-1, 1 << lo, 2, 1 << (hi - lo - 1), 2, 1 << (n_qubits - hi - 1))
    out = a.copy()
    if control < target:
        out[:, :, 1, :, 0, :] = a[:, :, 1, :, 1, :]
        out[:, :, 1, :, 1, :] = a[:, :, 1, :, 0, :]
    else:
        out[:, :, 0, :, 1, :] = a[:, :, 1, :, 1, :]
        out[:, :, 1, :, 1, :] = a[:, :, 0, :, 1, :]
    return out.reshape(shape)


def _rz(angle: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * angle), 0.0], [0.0, np.exp(0.5j * angle)]], dtype=complex)


def _ry(angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2.0), np.sin(angle / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rot_matrix(phi: float, theta: float, omega: float) -> np.ndarray:
    return _rz(omega) @ _ry(theta) @ _rz(phi)


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class StateVector:
    """Dense complex amplitudes over ``2**n_qubits`` basis states.

    Treat ``amplitudes`` as read-only; gate operations return fresh
    instances instead of mutating.
    """

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.shape[0] != 1 << self.n_qubits:
            raise DomainError(
                f"amplitude array of length {amps.shape} does not match {self.n_qubits} qubits"
            )
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class RegisterLayout:
    """Split of a register into label qubits (most significant) and position qubits.

    The joint index convention is ``index = label * 2**n_position + position``,
    which is a plain bit concatenation when ``label_qubits`` precede
    ``position_qubits`` in qubit order.
    """

    label_qubits: tuple[int, ...]
    position_qubits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "label_qubits", tuple(self.label_qubits))
        object.__setattr__(self, "position_qubits", tuple(self.position_qubits))
        seen = set(self.label_qubits) | set(self.position_qubits)
        n = len(self.label_qubits) + len(self.position_qubits)
        if len(seen) != n or seen != set(range(n)):
            raise DomainError("label and position qubits must be disjoint and cover 0..n-1")

    @property
    def n_label(self) -> int:
        return len(self.label_qubits)

    @property
    def n_position(self) -> int:
        return len(self.position_qubits)

    @property
    def n_qubits(self) -> int:
        return self.n_label + self.n_position

    @property
    def n_labels(self) -> int:
        """Number of distinct label values (2**n_label)."""
        return 1 << self.n_label

    @property
    def n_positions(self) -> int:
        """Number of distinct position values (2**n_position)."""
        return 1 << self.n_position

    def joint_index(self, label: int, position: int) -> int:
        return label * self.n_positions + position


def default_layout(n_label: int, n_position: int) -> RegisterLayout:
    """Layout with label qubits first (most significant), then position qubits."""
    return RegisterLayout(tuple(range(n_label)), tuple(range(n_label, n_label + n_position)))


@dataclass(frozen=True)
class EntanglingLayerStack:
    """Angles for a stack of strongly entangling layers on ``target_qubits``.

    ``angles`` has shape ``(n_layers, len(target_qubits), 3)`` holding
    the ``(phi, theta, omega)`` triple per qubit per layer.
    """

    target_qubits: tuple[int, ...]
    angles: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "target_qubits", tuple(self.target_qubits))
        angles = np.asarray(self.angles, dtype=float)
        m = len(self.target_qubits)
        if angles.ndim != 3 or angles.shape[1] != m or angles.shape[2] != 3:
            raise DomainError(f"angle array shape {angles.shape} does not match {m} target qubits")
        if not np.all(np.isfinite(angles)):
            raise DomainError("entangling layer angles must be finite")
        object.__setattr__(self, "angles", angles)

    @property
    def n_layers(self) -> int:
        return self.angles.shape[0]

    @property
    def n_params(self) -> int:
        return self.angles.size

    def with_angles(self, flat: np.ndarray) -> "EntanglingLayerStack":
        """Same stack with angles replaced from a flat vector (C order)."""
        return EntanglingLayerStack(self.target_qubits, np.reshape(flat, self.angles.shape))


def zero_stack(target_qubits, n_layers: int) -> EntanglingLayerStack:
    return EntanglingLayerStack(tuple(target_qubits), np.zeros((n_layers, len(target_qubits), 3)))


def random_stack(target_qubits, n_layers: int, rng: np.random.Generator) -> EntanglingLayerStack:
    """Stack with angles drawn uniformly from [0, 2*pi)."""
    angles = rng.uniform(0.0, 2.0 * np.pi, size=(n_layers, len(target_qubits), 3))
    return EntanglingLayerStack(tuple(target_qubits), angles)


# ---------------------------------------------------------------------------
# operations


def basis_state(n_qubits: int, index: int) -> StateVector:
    """Computational basis state |index> on n_qubits."""
    if not 0 <= index < (1 << n_qubits):
        raise DomainError(f"basis index {index} out of range for {n_qubits} qubits")
    amps = np.zeros(1 << n_qubits, dtype=complex)
    amps[index] = 1.0
    return StateVector(n_qubits, amps)


def uniform_state(n_qubits: int) -> StateVector:
    """Equal superposition over the full computational basis (Hadamard action on |0...0>)."""
    dim = 1 << n_qubits
    return StateVector(n_qubits, np.full(dim, 1.0 / np.sqrt(dim), dtype=complex))


def apply_rot(state: StateVector, qubit: int, phi: float, theta: float, omega: float) -> StateVector:
    """Apply Rot(phi, theta, omega) = RZ(omega) RY(theta) RZ(phi) to one qubit."""
    if not (np.isfinite(phi) and np.isfinite(theta) and np.isfinite(omega)):
        raise DomainError("rotation angles must be finite")
    if not 0 <= qubit < state.n_qubits:
        raise DomainError(f"qubit {qubit} out of range")
    amps = _apply_single_qubit(state.amplitudes, state.n_qubits, qubit, _rot_matrix(phi, theta, omega))
    return StateVector(state.n_qubits, amps)


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    """Apply CNOT with the given control and target qubits."""
    n = state.n_qubits
    if control == target:
        raise DomainError("CNOT control and target must differ")
    if not (0 <= control < n and 0 <= target < n):
        raise DomainError("CNOT qubit index out of range")
    return StateVector(n, _apply_cnot(state.amplitudes, n, control, target))


def _apply_stack_raw(amps: np.ndarray, n_qubits: int, stack: EntanglingLayerStack) -> np.ndarray:
    """Apply an entangling layer stack to a (..., 2**n) amplitude array."""
    targets = stack.target_qubits
    m = len(targets)
    for layer in range(stack.n_layers):
        for qi, q in enumerate(targets):
            phi, theta, omega = stack.angles[layer, qi]
            amps = _apply_single_qubit(amps, n_qubits, q, _rot_matrix(phi, theta, omega))
        if m >= 2:
            for i in range(m):
                amps = _apply_cnot(amps, n_qubits, targets[i], targets[(i + 1) % m])
    return amps


def apply_entangling_layers(state: StateVector, stack: EntanglingLayerStack) -> StateVector:
    """Apply the strongly entangling layer stack to the state."""
    if any(q < 0 or q >= state.n_qubits for q in stack.target_qubits):
        raise DomainError("stack target qubits exceed register size")
    return StateVector(state.n_qubits, _apply_stack_raw(state.amplitudes, state.n_qubits, stack))


def all_probabilities(state: StateVector) -> np.ndarray:
    """Projective-measurement probabilities over the full computational basis."""
    return np.abs(state.amplitudes) ** 2


def joint_distribution(state: StateVector, layout: RegisterLayout) -> np.ndarray:
    """Probability vector indexed by ``label * 2**n_position + position``.

    For the default layout (label qubits leading) this is just
    :func:`all_probabilities`; other orderings are permuted into the
    joint convention.
    """
    if layout.n_qubits != state.n_qubits:
        raise DomainError("layout does not match state size")
    probs = all_probabilities(state)
    order = layout.label_qubits + layout.position_qubits
    if order == tuple(range(state.n_qubits)):
        return probs
    return probs.reshape([2] * state.n_qubits).transpose(order).reshape(-1)


def joint_probability(state: StateVector, layout: RegisterLayout, label: int, position: int) -> float:
    """Probability of measuring the given label and position pair."""
    if not 0 <= label < layout.n_labels:
        raise DomainError(f"label {label} out of range")
    if not 0 <= position < layout.n_positions:
        raise DomainError(f"position {position} out of range")
    return float(joint_distribution(state, layout)[layout.joint_index(label, position)])


def position_marginals(state: StateVector, layout: RegisterLayout) -> np.ndarray:
    """Marginal probability of each position value, summed over all labels."""
    joint = joint_distribution(state, layout)
    return joint.reshape(layout.n_labels, layout.n_positions).sum(axis=0)


def position_marginal(state: StateVector, layout: RegisterLayout, position: int) -> float:
    """Marginal probability of one position value, summed over all labels."""
    if not 0 <= position < layout.n_positions:
        raise DomainError(f"position {position} out of range")
    return float(position_marginals(state, layout)[position])
