"""Born machine pre-training of basis-function superpositions.

A Born machine here is an entangling-layer circuit whose measurement
distribution over a (label, position) register is trained to match a
target distribution. The target of interest stores one normalized basis
function per label row, so a single trained circuit carries the whole
basis "in superposition" and a later label rotation can reweight the
mixture without touching the position register.

Training minimizes the squared maximum mean discrepancy between the
circuit distribution and the target under a Gaussian mixture kernel that
is diagonal in the label. Gradients are exact parameter-shift values,
computed for all parameters in one batched sweep: after each elementary
RZ/RY of the circuit is applied to every row of a ``(2P+1, 2**n)``
amplitude batch, the two rows belonging to that parameter receive an
extra R(+pi/2) / R(-pi/2) on the same axis, which composes additively
with the nominal rotation. Row ``2P`` ends up as the unshifted state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, DomainError, TrainingError
from .optim import AdamState, adam_step
from .simulator import (
    EntanglingLayerStack,
    RegisterLayout,
    _apply_cnot,
    _apply_single_qubit,
    _ry,
    _rz,
    apply_entangling_layers,
    basis_state,
    joint_distribution,
    random_stack,
)

DEFAULT_BANDWIDTHS = (0.25, 1.0, 4.0)
DEFAULT_N_LAYERS = 6


@dataclass(frozen=True)
class PretrainConfig:
    """Adam settings for Born machine pre-training.

    Field names match :class:`~qukan.optim.TrainConfig` where they overlap
    so :func:`~qukan.optim.adam_step` can read either.
    """

    max_iters: int = 500
    lr: float = 0.1
    adam_betas: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    tol: float = 1e-6

    def __post_init__(self):
        if self.max_iters < 0:
            raise ConfigurationError("max_iters must be nonnegative")
        if self.lr <= 0:
            raise ConfigurationError("lr must be positive")
        if self.tol < 0:
            raise ConfigurationError("tol must be nonnegative")


@dataclass(frozen=True)
class QCBMModel:
    """A quantum circuit Born machine: register layout plus circuit angles."""

    layout: RegisterLayout
    stack: EntanglingLayerStack

    def __post_init__(self):
        n = self.layout.n_qubits
        if any(q < 0 or q >= n for q in self.stack.target_qubits):
            raise DomainError("circuit targets exceed the register")


@dataclass(frozen=True)
class TargetDistribution:
    """Normalized target over joint (label, position) indices."""

    layout: RegisterLayout
    probs: np.ndarray
    row_normalizers: tuple[float, ...] = ()

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        expected = self.layout.n_labels * self.layout.n_positions
        if probs.shape != (expected,):
            raise DomainError(f"target length {probs.shape} does not match layout ({expected})")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
            raise DomainError("target must be a probability vector (nonnegative, sums to 1)")
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "row_normalizers", tuple(self.row_normalizers))


@dataclass(frozen=True)
class MMDKernel:
    """Gaussian mixture kernel on positions, exact match required on labels."""

    bandwidths: tuple[float, ...] = DEFAULT_BANDWIDTHS

    def __post_init__(self):
        bw = tuple(float(b) for b in self.bandwidths)
        if not bw or any(b <= 0 for b in bw):
            raise ConfigurationError("kernel needs at least one positive bandwidth")
        object.__setattr__(self, "bandwidths", bw)

    def joint_matrix(self, layout: RegisterLayout) -> np.ndarray:
        """Kernel matrix over joint indices, block diagonal in the label."""
        return _kernel_matrix(self.bandwidths, layout.n_labels, layout.n_positions)


@lru_cache(maxsize=32)
def _kernel_matrix(bandwidths: tuple[float, ...], n_labels: int, n_positions: int) -> np.ndarray:
    k = np.arange(n_positions, dtype=float)
    sq = (k[:, None] - k[None, :]) ** 2
    pos = sum(np.exp(-sq / (2.0 * bw)) for bw in bandwidths) / len(bandwidths)
    full = np.kron(np.eye(n_labels), pos)
    full.flags.writeable = False
    return full


@dataclass(frozen=True)
class PretrainResult:
    model: QCBMModel
    loss_trace: list[float]
    final_loss: float
    tvd: float
    n_iters: int
    tvd_trace: list[float] = field(default_factory=list)


def make_qcbm(layout: RegisterLayout, n_layers: int = DEFAULT_N_LAYERS, seed: int = 0) -> QCBMModel:
    """Born machine over all register qubits with seeded uniform [0, 2pi) angles."""
    rng = np.random.default_rng(seed)
    stack = random_stack(tuple(range(layout.n_qubits)), n_layers, rng)
    return QCBMModel(layout, stack)


def qcbm_distribution(model: QCBMModel) -> np.ndarray:
    """Measurement distribution of the circuit on |0...0>, in joint index order."""
    state = apply_entangling_layers(basis_state(model.layout.n_qubits, 0), model.stack)
    return joint_distribution(state, model.layout)


def build_superposition_target(matrix: np.ndarray, layout: RegisterLayout, label_weights=None) -> TargetDistribution:
    """Target whose label rows are the normalized rows of a basis-value matrix.

    Row ``j`` of ``matrix`` holds basis function ``j`` evaluated on the
    position grid; the joint probability is ``w_j * M[j, k] / Z_j`` with
    ``Z_j`` the row sum. Unused label rows get zero mass.
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[1] != layout.n_positions:
        raise DomainError(f"matrix shape {matrix.shape} does not fit {layout.n_positions} positions")
    rows = matrix.shape[0]
    if rows > layout.n_labels:
        raise DomainError(f"{rows} basis functions exceed {layout.n_labels} label values")
    if np.any(matrix < 0):
        raise DomainError("basis values must be nonnegative")
    normalizers = matrix.sum(axis=1)
    if np.any(normalizers <= 0):
        bad = int(np.argmin(normalizers))
        raise ConfigurationError(f"basis function {bad} vanishes on the whole grid")
    if label_weights is None:
        weights = np.full(rows, 1.0 / rows)
    else:
        weights = np.asarray(label_weights, dtype=float)
        if weights.shape != (rows,):
            raise DomainError("need one label weight per basis function")
        if np.any(weights < 0) or weights.sum() <= 0:
            raise DomainError("label weights must be nonnegative with positive sum")
        weights = weights / weights.sum()
    probs = np.zeros(layout.n_labels * layout.n_positions)
    for j in range(rows):
        block = slice(j * layout.n_positions, (j + 1) * layout.n_positions)
        probs[block] = weights[j] * matrix[j] / normalizers[j]
    return TargetDistribution(layout, probs, tuple(float(z) for z in normalizers))


def total_variation(p: np.ndarray, q: np.ndarray) -> float:
    """Total variation distance, half the L1 difference."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DomainError("distributions must have equal length")
    return float(0.5 * np.abs(p - q).sum())


def mmd_squared(p: np.ndarray, q: np.ndarray, kernel: MMDKernel, layout: RegisterLayout) -> float:
    """Squared MMD ``(p - q)^T K (p - q)`` under the joint kernel matrix."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    dim = layout.n_labels * layout.n_positions
    if p.shape != (dim,) or q.shape != (dim,):
        raise DomainError("distribution length does not match the register layout")
    d = p - q
    return float(d @ kernel.joint_matrix(layout) @ d)


def _to_joint(probs: np.ndarray, layout: RegisterLayout) -> np.ndarray:
    """Reorder (..., 2**n) probabilities from raw qubit order to joint order."""
    order = layout.label_qubits + layout.position_qubits
    n = layout.n_qubits
    if order == tuple(range(n)):
        return probs
    lead = probs.shape[:-1]
    cube = probs.reshape(lead + (2,) * n)
    axes = tuple(range(len(lead))) + tuple(len(lead) + q for q in order)
    return cube.transpose(axes).reshape(lead + (1 << n,))


def _distribution_and_shifts(model: QCBMModel) -> tuple[np.ndarray, np.ndarray]:
    """Circuit distribution plus all parameter-shifted distributions.

    Returns ``(p, shifted)`` where ``shifted[2m]`` / ``shifted[2m + 1]``
    are the distributions with parameter ``m`` (flat C order over the
    angle array) shifted by +pi/2 / -pi/2. One batched sweep through the
    circuit produces all ``2P + 1`` states.
    """
    stack = model.stack
    n = model.layout.n_qubits
    targets = stack.target_qubits
    n_params = stack.angles.size
    batch = np.zeros((2 * n_params + 1, 1 << n), dtype=complex)
    batch[:, 0] = 1.0
    fix = {"z": (_rz(np.pi / 2), _rz(-np.pi / 2)), "y": (_ry(np.pi / 2), _ry(-np.pi / 2))}
    m = len(targets)
    idx = 0
    for layer in range(stack.n_layers):
        for qi, q in enumerate(targets):
            phi, theta, omega = stack.angles[layer, qi]
            for axis, angle in (("z", phi), ("y", theta), ("z", omega)):
                gate = _rz(angle) if axis == "z" else _ry(angle)
                batch = _apply_single_qubit(batch, n, q, gate)
                plus, minus = fix[axis]
                batch[2 * idx] = _apply_single_qubit(batch[2 * idx], n, q, plus)
                batch[2 * idx + 1] = _apply_single_qubit(batch[2 * idx + 1], n, q, minus)
                idx += 1
        if m >= 2:
            for i in range(m):
                batch = _apply_cnot(batch, n, targets[i], targets[(i + 1) % m])
    probs = _to_joint(np.abs(batch) ** 2, model.layout)
    return probs[-1], probs[:-1]


def mmd_gradient_param_shift(model: QCBMModel, target: TargetDistribution, kernel: MMDKernel) -> np.ndarray:
    """Exact MMD gradient per circuit angle via the parameter-shift rule.

    For each parameter the derivative is ``(p+ - p-)^T K (p - target)``
    with the two distributions shifted by +-pi/2.
    """
    if target.layout != model.layout:
        raise DomainError("target layout does not match the model")
    p, shifted = _distribution_and_shifts(model)
    v = kernel.joint_matrix(model.layout) @ (p - target.probs)
    return (shifted[0::2] - shifted[1::2]) @ v


def pretrain(
    model: QCBMModel,
    target: TargetDistribution,
    kernel: MMDKernel | None = None,
    config: PretrainConfig | None = None,
) -> PretrainResult:
    """Minimize the squared MMD to the target with Adam and parameter-shift grads.

    Stops once the loss drops below ``config.tol`` or after ``max_iters``
    update steps; the loss trace holds the initial loss plus one entry per
    step, so its length is ``n_iters + 1``.
    """
    kernel = kernel if kernel is not None else MMDKernel()
    config = config if config is not None else PretrainConfig()
    if target.layout != model.layout:
        raise DomainError("target layout does not match the model")
    K = kernel.joint_matrix(model.layout)
    goal = target.probs
    params = model.stack.angles.ravel().copy()
    state = AdamState.zeros(params.size)
    trace: list[float] = []
    tvd_trace: list[float] = []
    steps = 0
    while True:
        work = QCBMModel(model.layout, model.stack.with_angles(params))
        p, shifted = _distribution_and_shifts(work)
        diff = p - goal
        loss = float(diff @ K @ diff)
        if not np.isfinite(loss):
            raise TrainingError(f"Born machine loss became non-finite at iteration {steps}")
        trace.append(loss)
        tvd_trace.append(0.5 * float(np.abs(diff).sum()))
        if loss < config.tol or steps >= config.max_iters:
            break
        grad = (shifted[0::2] - shifted[1::2]) @ (K @ diff)
        params, state = adam_step(params, grad, state, config)
        steps += 1
    trained = QCBMModel(model.layout, model.stack.with_angles(params))
    return PretrainResult(trained, trace, trace[-1], total_variation(p, goal), steps, tvd_trace)
