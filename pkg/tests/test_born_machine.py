"""Born machine training checks: kernel oracles, shift-rule exactness, convergence."""

import math

import numpy as np
import pytest

from qukan.born_machine import (
    MMDKernel,
    PretrainConfig,
    QCBMModel,
    TargetDistribution,
    build_superposition_target,
    make_qcbm,
    mmd_gradient_param_shift,
    mmd_squared,
    pretrain,
    qcbm_distribution,
    total_variation,
)
from qukan.errors import ConfigurationError, DomainError
from qukan.simulator import EntanglingLayerStack, RegisterLayout, default_layout
from qukan.splines import DiscretizationGrid, default_basis_matrix

BANDWIDTHS = (0.25, 1.0, 4.0)


# Direct double-loop kernel oracle, deliberately naive.


def oracle_kernel_entry(j, k, jp, kp):
    if j != jp:
        return 0.0
    return sum(math.exp(-((k - kp) ** 2) / (2.0 * bw)) for bw in BANDWIDTHS) / len(BANDWIDTHS)


def oracle_kernel_matrix(layout):
    dim = layout.n_labels * layout.n_positions
    K = np.zeros((dim, dim))
    for a in range(dim):
        for b in range(dim):
            j, k = divmod(a, layout.n_positions)
            jp, kp = divmod(b, layout.n_positions)
            K[a, b] = oracle_kernel_entry(j, k, jp, kp)
    return K


def random_distribution(rng, dim):
    v = rng.uniform(0.1, 1.0, size=dim)
    return v / v.sum()


def test_kernel_matrix_matches_oracle():
    for layout in (default_layout(1, 2), default_layout(2, 4)):
        K = MMDKernel().joint_matrix(layout)
        assert np.allclose(K, oracle_kernel_matrix(layout), atol=1e-12)


def test_kernel_matrix_basic_properties():
    layout = default_layout(2, 4)
    K = MMDKernel().joint_matrix(layout)
    assert np.array_equal(K, K.T)
    assert np.allclose(np.diag(K), 1.0)
    assert np.linalg.eigvalsh(K).min() > -1e-10
    # frozen: mean of exp(-1/(2*sigma)) over the default bandwidths
    assert K[0, 1] == pytest.approx(0.5414542818446139, abs=1e-15)
    # distinct labels never interact
    assert K[0, 16] == 0.0


def test_kernel_rejects_bad_bandwidths():
    with pytest.raises(ConfigurationError):
        MMDKernel(bandwidths=())
    with pytest.raises(ConfigurationError):
        MMDKernel(bandwidths=(1.0, -2.0))


def test_mmd_squared_matches_double_loop():
    layout = default_layout(2, 4)
    rng = np.random.default_rng(0)
    K = oracle_kernel_matrix(layout)
    kernel = MMDKernel()
    for _ in range(5):
        p = random_distribution(rng, 64)
        q = random_distribution(rng, 64)
        direct = 0.0
        for a in range(64):
            for b in range(64):
                direct += (p[a] - q[a]) * K[a, b] * (p[b] - q[b])
        assert mmd_squared(p, q, kernel, layout) == pytest.approx(direct, abs=1e-12)


def test_mmd_squared_zero_on_self_and_nonnegative():
    layout = default_layout(1, 3)
    rng = np.random.default_rng(1)
    kernel = MMDKernel()
    p = random_distribution(rng, 16)
    assert mmd_squared(p, p, kernel, layout) == 0.0
    for _ in range(10):
        q = random_distribution(rng, 16)
        assert mmd_squared(p, q, kernel, layout) >= 0.0


def test_total_variation_examples():
    assert total_variation([1.0, 0.0], [0.0, 1.0]) == 1.0
    assert total_variation([0.5, 0.5], [0.75, 0.25]) == pytest.approx(0.25)
    assert total_variation([0.2, 0.8], [0.2, 0.8]) == 0.0
    with pytest.raises(DomainError):
        total_variation([1.0], [0.5, 0.5])


# --- superposition targets ---------------------------------------------------


def test_superposition_target_rows_and_mass():
    layout = default_layout(2, 4)
    matrix = default_basis_matrix(DiscretizationGrid(0.0, 1.0, 4))
    target = build_superposition_target(matrix, layout)
    probs = target.probs.reshape(4, 16)
    assert target.probs.sum() == pytest.approx(1.0, abs=1e-12)
    for j in range(4):
        assert probs[j].sum() == pytest.approx(0.25, abs=1e-12)
        assert np.allclose(probs[j] * 4.0 * matrix[j].sum(), matrix[j], atol=1e-12)


def test_superposition_target_unused_labels_are_empty():
    layout = default_layout(2, 1)  # 4 labels, 2 positions
    matrix = np.array([[1.0, 1.0], [2.0, 0.0], [0.0, 3.0]])
    target = build_superposition_target(matrix, layout)
    assert np.array_equal(target.probs.reshape(4, 2)[3], np.zeros(2))
    assert target.row_normalizers == (2.0, 2.0, 3.0)


def test_superposition_target_custom_weights():
    layout = default_layout(1, 1)
    matrix = np.array([[1.0, 3.0], [1.0, 1.0]])
    target = build_superposition_target(matrix, layout, label_weights=[3.0, 1.0])
    blocks = target.probs.reshape(2, 2)
    assert blocks[0].sum() == pytest.approx(0.75)
    assert blocks[1].sum() == pytest.approx(0.25)


def test_superposition_target_errors():
    layout = default_layout(2, 2)  # 4 labels, 4 positions
    with pytest.raises(ConfigurationError):
        build_superposition_target(np.array([[1.0, 1.0, 1.0, 1.0], [0.0, 0.0, 0.0, 0.0]]), layout)
    with pytest.raises(DomainError):
        build_superposition_target(np.array([[1.0, 1.0, 1.0, -0.5]]), layout)
    with pytest.raises(DomainError):
        build_superposition_target(np.ones((5, 4)), layout)
    with pytest.raises(DomainError):
        build_superposition_target(np.ones((2, 4)), layout, label_weights=[1.0, 2.0, 3.0])


def test_target_distribution_validation():
    layout = default_layout(1, 1)
    with pytest.raises(DomainError):
        TargetDistribution(layout, np.array([0.5, 0.5, 0.0]))
    with pytest.raises(DomainError):
        TargetDistribution(layout, np.array([0.9, 0.0, 0.0, 0.0]))


# --- parameter-shift gradients -------------------------------------------------


def test_one_qubit_gradient_matches_analytic():
    # p(theta) = [cos^2, sin^2](theta/2); target [1, 0] gives
    # dL/dtheta = 2 (1 - g) sin^2(theta/2) sin(theta) with g the mean
    # off-diagonal kernel weight at distance 1.
    layout = RegisterLayout((), (0,))
    g = oracle_kernel_entry(0, 0, 0, 1)
    kernel = MMDKernel()
    target = TargetDistribution(layout, np.array([1.0, 0.0]))
    for theta in (0.3, 0.83, 2.4, -1.1):
        stack = EntanglingLayerStack((0,), np.array([[[0.0, theta, 0.0]]]))
        grad = mmd_gradient_param_shift(QCBMModel(layout, stack), target, kernel)
        expected = 2.0 * (1.0 - g) * math.sin(theta / 2.0) ** 2 * math.sin(theta)
        assert grad[1] == pytest.approx(expected, abs=1e-12)
        # diagonal phase rotations cannot move measurement probabilities
        assert grad[0] == pytest.approx(0.0, abs=1e-12)
        assert grad[2] == pytest.approx(0.0, abs=1e-12)


def test_shifted_rows_match_explicitly_shifted_circuits():
    layout = default_layout(1, 1)
    model = make_qcbm(layout, n_layers=2, seed=9)
    from qukan.born_machine import _distribution_and_shifts

    p, shifted = _distribution_and_shifts(model)
    assert p == pytest.approx(qcbm_distribution(model), abs=1e-14)
    flat = model.stack.angles.ravel()
    for m in range(flat.size):
        for row, delta in ((2 * m, np.pi / 2), (2 * m + 1, -np.pi / 2)):
            moved = flat.copy()
            moved[m] += delta
            manual = qcbm_distribution(QCBMModel(layout, model.stack.with_angles(moved)))
            assert shifted[row] == pytest.approx(manual, abs=1e-12)


def test_param_shift_matches_finite_differences():
    layout = default_layout(2, 4)
    kernel = MMDKernel()
    rng = np.random.default_rng(21)
    for trial in range(5):
        model = make_qcbm(layout, n_layers=2, seed=100 + trial)
        target = TargetDistribution(layout, random_distribution(rng, 64))
        grad = mmd_gradient_param_shift(model, target, kernel)
        flat = model.stack.angles.ravel()
        h = 1e-5
        fd = np.empty_like(grad)
        for m in range(flat.size):
            for sign in (1.0, -1.0):
                moved = flat.copy()
                moved[m] += sign * h
                probe = QCBMModel(layout, model.stack.with_angles(moved))
                loss = mmd_squared(qcbm_distribution(probe), target.probs, kernel, layout)
                if sign > 0:
                    fd[m] = loss
                else:
                    fd[m] = (fd[m] - loss) / (2.0 * h)
        scale = max(1.0, float(np.linalg.norm(fd)))
        assert np.linalg.norm(grad - fd) / scale < 1e-5


# --- pre-training ----------------------------------------------------------------


def test_pretrain_self_target_stops_immediately():
    layout = default_layout(2, 4)
    model = make_qcbm(layout, n_layers=2, seed=5)
    target = TargetDistribution(layout, qcbm_distribution(model))
    result = pretrain(model, target)
    assert result.n_iters == 0
    assert result.loss_trace == [result.final_loss]
    assert result.final_loss < 1e-12
    assert np.array_equal(result.model.stack.angles, model.stack.angles)


def test_pretrain_one_qubit_uniform_target():
    layout = RegisterLayout((), (0,))
    model = make_qcbm(layout, n_layers=1, seed=2)
    target = TargetDistribution(layout, np.array([0.5, 0.5]))
    result = pretrain(model, target, config=PretrainConfig(max_iters=200))
    assert result.n_iters < 200
    assert result.tvd < 1e-3


def test_pretrain_spline_superposition():
    layout = default_layout(2, 4)
    target = build_superposition_target(default_basis_matrix(), layout)
    model = make_qcbm(layout, seed=0)
    result = pretrain(model, target)
    assert result.tvd < 0.05
    assert result.final_loss < result.loss_trace[0]
    assert len(result.loss_trace) == result.n_iters + 1


def test_pretrain_layout_mismatch():
    model = make_qcbm(default_layout(1, 2), n_layers=1)
    target = TargetDistribution(default_layout(2, 1), np.full(8, 0.125))
    with pytest.raises(DomainError):
        pretrain(model, target)


def test_pretrain_config_validation():
    with pytest.raises(ConfigurationError):
        PretrainConfig(max_iters=-1)
    with pytest.raises(ConfigurationError):
        PretrainConfig(lr=0.0)
    with pytest.raises(ConfigurationError):
        PretrainConfig(tol=-1e-9)
