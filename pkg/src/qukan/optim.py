"""Losses, finite-difference gradients, Adam, and the network training loop.

The composed network is differentiated by central finite differences over
its parameters rather than by any circuit-specific rule: the quantum
readout feeds nonlinear downstream layers through an input rediscretization,
so per-parameter FD is both simple and correct, and parameter counts stay
small enough (~200) for it to be affordable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, TrainingError


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 20
    batch_size: int = 32
    lr: float = 0.05
    adam_betas: tuple[float, float] = (0.9, 0.999)
    adam_eps: float = 1e-8
    fd_step: float = 1e-3  # radians, used for circuit angles
    fd_step_weights: float = 1e-4  # used for classical scaling weights
    seed: int = 0
    tol: float = 0.0  # stop early once the epoch loss drops below this

    def __post_init__(self):
        if self.lr <= 0:
            raise ConfigurationError("lr must be positive")
        b1, b2 = self.adam_betas
        if not (0 < b1 < 1 and 0 < b2 < 1):
            raise ConfigurationError("Adam betas must lie in (0, 1)")
        if self.fd_step <= 0 or self.fd_step_weights <= 0:
            raise ConfigurationError("finite-difference steps must be positive")
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigurationError("epochs must be >= 0 and batch_size >= 1")


@dataclass
class AdamState:
    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0

    @classmethod
    def zeros(cls, n_params: int) -> "AdamState":
        return cls(np.zeros(n_params), np.zeros(n_params))


@dataclass
class MetricsReport:
    accuracy: float | None = None
    sum_abs_dist_avg: float | None = None
    sum_abs_dist_median: float | None = None
    sum_abs_dist_min: float | None = None
    sum_abs_dist_max: float | None = None
    loss_trace: list[float] = field(default_factory=list)
    train_accuracy_trace: list[float] = field(default_factory=list)


# --- losses -------------------------------------------------------------------


def cross_entropy(outputs: np.ndarray, label: int) -> float:
    """Softmax cross-entropy of one output vector, max-shifted for stability."""
    outputs = np.asarray(outputs, dtype=float)
    shifted = outputs - outputs.max()
    return float(np.log(np.exp(shifted).sum()) - shifted[label])


def mse(pred: np.ndarray, target: np.ndarray) -> float:
    pred = np.asarray(pred, dtype=float).ravel()
    target = np.asarray(target, dtype=float).ravel()
    if pred.shape != target.shape:
        raise DomainError("mse needs equal-length vectors")
    return float(np.mean((pred - target) ** 2))


def batch_loss(net, features: np.ndarray, labels: np.ndarray, loss_kind: str) -> float:
    """Mean loss of the network outputs over one batch."""
    outputs = net.forward_batch(features)
    if loss_kind == "cross_entropy":
        shifted = outputs - outputs.max(axis=1, keepdims=True)
        lse = np.log(np.exp(shifted).sum(axis=1))
        picked = shifted[np.arange(len(labels)), labels.astype(int)]
        return float(np.mean(lse - picked))
    if loss_kind == "mse":
        return mse(outputs.ravel(), labels)
    raise ConfigurationError(f"unknown loss kind {loss_kind!r}")


def sum_abs_distance_stats(preds: np.ndarray, targets: np.ndarray) -> tuple[float, float, float, float]:
    """(average, median, min, max) of |pred - target| over a test set."""
    preds = np.asarray(preds, dtype=float).ravel()
    targets = np.asarray(targets, dtype=float).ravel()
    if preds.size == 0 or preds.shape != targets.shape:
        raise DomainError("need equal-length, nonempty prediction/target vectors")
    d = np.abs(preds - targets)
    return float(d.mean()), float(np.median(d)), float(d.min()), float(d.max())


# --- gradients and updates -----------------------------------------------------


def network_gradient_fd(net, features, labels, loss_kind, config: TrainConfig) -> np.ndarray:
    """Central finite-difference gradient of the batch loss over all parameters.

    Each parameter is shifted by its kind-specific step (angles vs weights)
    with a full re-forward of the network; ``loss_kind`` may also be a
    callable ``f(net, features, labels) -> float`` for harness use.
    """
    if callable(loss_kind):
        evaluate = lambda: loss_kind(net, features, labels)
    else:
        evaluate = lambda: batch_loss(net, features, labels, loss_kind)
    base = net.get_params()
    kinds = net.param_kinds()
    steps = np.where(kinds == "angle", config.fd_step, config.fd_step_weights)
    grad = np.empty(base.size)
    work = base.copy()
    for m in range(base.size):
        h = steps[m]
        work[m] = base[m] + h
        net.set_params(work)
        up = evaluate()
        work[m] = base[m] - h
        net.set_params(work)
        down = evaluate()
        work[m] = base[m]
        grad[m] = (up - down) / (2.0 * h)
    net.set_params(base)
    if not np.all(np.isfinite(grad)):
        raise TrainingError("non-finite loss encountered during gradient estimation")
    return grad


def adam_step(params: np.ndarray, grads: np.ndarray, state: AdamState, config) -> tuple[np.ndarray, AdamState]:
    """One bias-corrected Adam update; reads lr/adam_betas/adam_eps off config."""
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if params.shape != grads.shape or params.shape != state.first_moment.shape:
        raise DomainError("parameter, gradient and moment shapes must agree")
    b1, b2 = config.adam_betas
    t = state.step_count + 1
    m = b1 * state.first_moment + (1 - b1) * grads
    v = b2 * state.second_moment + (1 - b2) * grads**2
    m_hat = m / (1 - b1**t)
    v_hat = v / (1 - b2**t)
    new_params = params - config.lr * m_hat / (np.sqrt(v_hat) + config.adam_eps)
    return new_params, AdamState(m, v, t)


# --- training loop --------------------------------------------------------------


def accuracy_score(predicted: np.ndarray, labels: np.ndarray) -> float:
    return float(np.mean(np.asarray(predicted) == np.asarray(labels)))


def train(net, dataset, config: TrainConfig, loss_kind: str) -> tuple[object, MetricsReport]:
    """Train the network with seeded shuffled mini-batches, FD gradients and Adam.

    Mutates ``net`` in place and returns it together with per-epoch loss
    and (for classification) train-accuracy traces.
    """
    features = np.asarray(dataset.features, dtype=float)
    labels = np.asarray(dataset.labels)
    n = len(features)
    if n == 0:
        raise DomainError("dataset is empty")
    rng = np.random.default_rng(config.seed)
    params = net.get_params()
    state = AdamState.zeros(params.size)
    report = MetricsReport()

    def record_epoch(epoch_losses):
        if epoch_losses:
            report.loss_trace.append(float(np.mean(epoch_losses)))
        else:
            report.loss_trace.append(batch_loss(net, features, labels, loss_kind))
        if loss_kind == "cross_entropy":
            preds = net.predict_classes(features)
            report.train_accuracy_trace.append(accuracy_score(preds, labels))

    for epoch in range(config.epochs):
        order = rng.permutation(n)
        epoch_losses = []
        for start in range(0, n, config.batch_size):
            batch_idx = order[start : start + config.batch_size]
            bx, by = features[batch_idx], labels[batch_idx]
            loss = batch_loss(net, bx, by, loss_kind)
            if not np.isfinite(loss):
                raise TrainingError(f"loss diverged at epoch {epoch}")
            epoch_losses.append(loss)
            grad = network_gradient_fd(net, bx, by, loss_kind, config)
            params, state = adam_step(params, grad, state, config)
            net.set_params(params)
        record_epoch(epoch_losses)
        if config.tol > 0 and report.loss_trace[-1] < config.tol:
            break

    if config.epochs == 0:
        record_epoch([])
    if loss_kind == "cross_entropy":
        report.accuracy = report.train_accuracy_trace[-1]
    else:
        preds = net.forward_batch(features).ravel()
        stats = sum_abs_distance_stats(preds, labels)
        (
            report.sum_abs_dist_avg,
            report.sum_abs_dist_median,
            report.sum_abs_dist_min,
            report.sum_abs_dist_max,
        ) = stats
    return net, report
