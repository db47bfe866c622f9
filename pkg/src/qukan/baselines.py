"""Variational quantum classifier baselines and network ablation variants.

The VQCs share the statevector simulator: a data-dependent embedding
circuit, four strongly entangling trainable layers, and an observable
readout. Binary models read <Z> on qubit 0; multi-class models read the
basis probabilities of the leading qubits, renormalized over the class
count. Amplitude embedding initializes the state directly instead of
synthesizing a preparation circuit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .network import QuKANNetwork, build_network
from .residual import PretrainedBase, uniform_base_stack
from .simulator import (
    EntanglingLayerStack,
    StateVector,
    _apply_cnot,
    _apply_single_qubit,
    _rz,
    apply_entangling_layers,
    random_stack,
)

EMBEDDINGS = ("angle", "zz_feature_map", "amplitude", "amplitude_with_ancillas")
DEFAULT_VQC_LAYERS = 4
DEFAULT_N_ANCILLAS = 4
ABLATION_KINDS = ("pretrained", "hadamard_init", "untrained_frozen")

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)


@dataclass
class VQCModel:
    """Embedding kind, qubit budget, and the trainable layer stack."""

    embedding: str
    n_qubits: int
    n_features: int
    stack: EntanglingLayerStack
    n_ancillas: int = 0
    n_classes: int = 2
    readout_qubit: int = 0

    def __post_init__(self):
        if self.embedding not in EMBEDDINGS:
            raise ConfigurationError(f"unknown embedding {self.embedding!r}")
        if self.n_classes < 2:
            raise ConfigurationError("need at least 2 classes")
        n_data = self.n_qubits - self.n_ancillas
        if n_data < 1:
            raise ConfigurationError("no data qubits left after ancillas")
        if self.embedding in ("angle", "zz_feature_map"):
            if self.n_ancillas != 0:
                raise ConfigurationError(f"{self.embedding} embedding takes no ancillas")
            if n_data < self.n_features:
                raise ConfigurationError(
                    f"{self.embedding} embedding needs >= {self.n_features} qubits"
                )
        elif (1 << n_data) < self.n_features:
            raise ConfigurationError(
                f"amplitude embedding of {self.n_features} features needs "
                f">= {math.ceil(math.log2(self.n_features))} data qubits"
            )

    @property
    def n_params(self) -> int:
        return self.stack.n_params

    def get_params(self) -> np.ndarray:
        return self.stack.angles.ravel().copy()

    def set_params(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n_params,):
            raise DomainError(f"expected {self.n_params} parameters")
        self.stack = self.stack.with_angles(values)

    def param_kinds(self) -> np.ndarray:
        return np.array(["angle"] * self.n_params)

    def forward(self, x) -> np.ndarray:
        """Class-score vector, softmax-ready; sums to 1."""
        out = vqc_forward(self, x)
        if self.n_classes == 2:
            return np.array([(1.0 + out) / 2.0, (1.0 - out) / 2.0])
        return out

    def forward_batch(self, X: np.ndarray) -> np.ndarray:
        return np.stack([self.forward(x) for x in np.asarray(X, dtype=float)])

    def predict_class(self, x) -> int:
        return int(np.argmax(self.forward(x)))

    def predict_classes(self, X: np.ndarray) -> np.ndarray:
        return np.array([self.predict_class(x) for x in np.asarray(X, dtype=float)])


def make_vqc(
    embedding: str,
    n_features: int,
    n_classes: int = 2,
    n_layers: int = DEFAULT_VQC_LAYERS,
    seed: int = 0,
) -> VQCModel:
    """VQC with the minimal qubit count for the embedding, random angles."""
    if n_features < 1:
        raise DomainError("need at least one feature")
    if embedding in ("angle", "zz_feature_map"):
        n_qubits, n_ancillas = n_features, 0
    elif embedding == "amplitude":
        n_qubits, n_ancillas = max(1, math.ceil(math.log2(n_features))), 0
    elif embedding == "amplitude_with_ancillas":
        n_data = max(1, math.ceil(math.log2(n_features)))
        n_qubits, n_ancillas = n_data + DEFAULT_N_ANCILLAS, DEFAULT_N_ANCILLAS
    else:
        raise ConfigurationError(f"unknown embedding {embedding!r}")
    rng = np.random.default_rng(seed)
    stack = random_stack(tuple(range(n_qubits)), n_layers, rng)
    return VQCModel(
        embedding=embedding,
        n_qubits=n_qubits,
        n_features=n_features,
        stack=stack,
        n_ancillas=n_ancillas,
        n_classes=n_classes,
    )


def embed(model: VQCModel, x) -> StateVector:
    """Map a feature vector to the embedding circuit's output state.

    angle: RY(pi * x_q) on qubit q. zz_feature_map: H on every data
    qubit, RZ(2 x_q), then per pair (q, q+1) a CNOT-conjugated
    RZ(2 (pi - x_q)(pi - x_{q+1})) on q+1. amplitude: the normalized
    feature vector written directly into the data register, ancillas
    appended in |0>.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.size != model.n_features:
        raise DomainError(f"expected {model.n_features} features, got {x.size}")
    n = model.n_qubits
    n_data = n - model.n_ancillas
    if model.embedding in ("amplitude", "amplitude_with_ancillas"):
        norm = np.linalg.norm(x)
        if norm == 0.0:
            raise DomainError("amplitude embedding needs a nonzero vector")
        data = np.zeros(1 << n_data, dtype=complex)
        data[: x.size] = x / norm
        amps = np.zeros(1 << n, dtype=complex)
        # ancillas sit below the data register, so data index j lands
        # at joint index j * 2^{n_ancillas}
        amps[:: 1 << model.n_ancillas] = data
        return StateVector(n, amps)
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = 1.0
    if model.embedding == "angle":
        for q in range(x.size):
            theta = np.pi * x[q]
            c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
            ry = np.array([[c, -s], [s, c]], dtype=complex)
            amps = _apply_single_qubit(amps, n, q, ry)
        return StateVector(n, amps)
    # zz feature map
    for q in range(n_data):
        amps = _apply_single_qubit(amps, n, q, _HADAMARD)
    for q in range(x.size):
        amps = _apply_single_qubit(amps, n, q, _rz(2.0 * x[q]))
    for q in range(x.size - 1):
        angle = 2.0 * (np.pi - x[q]) * (np.pi - x[q + 1])
        amps = _apply_cnot(amps, n, q, q + 1)
        amps = _apply_single_qubit(amps, n, q + 1, _rz(angle))
        amps = _apply_cnot(amps, n, q, q + 1)
    return StateVector(n, amps)


def expectation_z(state: StateVector, qubit: int) -> float:
    """<Z> on one qubit: P(bit = 0) - P(bit = 1)."""
    probs = np.abs(state.amplitudes) ** 2
    probs = probs.reshape([2] * state.n_qubits)
    p1 = probs.take(1, axis=qubit).sum()
    return float(1.0 - 2.0 * p1)


def class_probabilities(state: StateVector, n_classes: int) -> np.ndarray:
    """Probabilities of the leading ceil(log2 C) qubits, renormalized to C classes."""
    n_read = max(1, math.ceil(math.log2(n_classes)))
    if n_read > state.n_qubits:
        raise DomainError(f"{n_classes} classes need {n_read} qubits")
    probs = np.abs(state.amplitudes) ** 2
    marginal = probs.reshape(1 << n_read, -1).sum(axis=1)[:n_classes]
    total = marginal.sum()
    if total == 0.0:
        return np.full(n_classes, 1.0 / n_classes)
    return marginal / total


def vqc_forward(model: VQCModel, x):
    """<Z> on the readout qubit (binary) or a class-probability vector."""
    state = apply_entangling_layers(embed(model, x), model.stack)
    if model.n_classes == 2:
        return expectation_z(state, model.readout_qubit)
    return class_probabilities(state, model.n_classes)


def ablation_variant(
    kind: str,
    base: PretrainedBase | None = None,
    arch: tuple[int, ...] = (2, 3, 2),
    seed: int = 0,
    trainable_layers: int = 2,
    n_label: int = 2,
    n_position: int = 4,
) -> QuKANNetwork:
    """Network variants isolating the effect of base pre-training.

    pretrained: the standard network on the given base. hadamard_init:
    the base circuit is replaced by a uniform superposition over all
    qubits; the trainable stack is kept. untrained_frozen: uniform base
    and the trainable stack removed, leaving only the scaling weights on
    a constant bias plus SiLU.
    """
    if kind not in ABLATION_KINDS:
        raise ConfigurationError(f"unknown ablation kind {kind!r}")
    if kind == "pretrained":
        if base is None:
            raise ConfigurationError("pretrained variant needs a pretrained base")
        return build_network(
            list(arch), base=base, seed=seed, trainable_layers=trainable_layers,
            n_position=n_position,
        )
    uniform = PretrainedBase(
        uniform_base_stack(n_label + n_position),
        (1.0,) * (1 << n_label),
        tvd=1.0,
    )
    layers = trainable_layers if kind == "hadamard_init" else 0
    return build_network(
        list(arch), base=uniform, seed=seed, trainable_layers=layers,
        n_position=n_position,
    )
