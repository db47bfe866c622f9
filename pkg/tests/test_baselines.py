"""VQC embeddings, readout, and the pre-training ablation variants."""

import numpy as np
import pytest

from qukan.baselines import (
    VQCModel,
    ablation_variant,
    class_probabilities,
    embed,
    expectation_z,
    make_vqc,
    vqc_forward,
)
from qukan.errors import ConfigurationError, DomainError
from qukan.optim import TrainConfig, batch_loss, train
from qukan.datasets import Dataset, make_moons, minmax_scale
from qukan.residual import PretrainedBase, silu, uniform_base_stack
from qukan.simulator import (
    apply_entangling_layers,
    basis_state,
    position_marginals,
    random_stack,
    zero_stack,
)


def kron_all(mats):
    out = np.eye(1)
    for m in mats:
        out = np.kron(out, m)
    return out


def identity_model(embedding, n_features, **kw):
    model = make_vqc(embedding, n_features, **kw)
    model.stack = zero_stack(tuple(range(model.n_qubits)), 0)
    return model


# --- construction ----------------------------------------------------------------


def test_capacity_validation():
    with pytest.raises(ConfigurationError):
        VQCModel("angle", n_qubits=2, n_features=3, stack=zero_stack((0, 1), 0))
    with pytest.raises(ConfigurationError):
        VQCModel("amplitude", n_qubits=2, n_features=5, stack=zero_stack((0, 1), 0))
    with pytest.raises(ConfigurationError):
        VQCModel("angle", n_qubits=3, n_features=2, n_ancillas=1, stack=zero_stack((0,), 0))
    with pytest.raises(ConfigurationError):
        VQCModel("fourier", n_qubits=2, n_features=2, stack=zero_stack((0, 1), 0))


def test_make_vqc_qubit_budgets():
    assert make_vqc("angle", 4).n_qubits == 4
    assert make_vqc("zz_feature_map", 2).n_qubits == 2
    assert make_vqc("amplitude", 4).n_qubits == 2
    model = make_vqc("amplitude_with_ancillas", 4)
    assert model.n_qubits == 6 and model.n_ancillas == 4
    assert make_vqc("angle", 2).stack.n_layers == 4


# --- embeddings -------------------------------------------------------------------


def test_angle_embedding_basis_points():
    model = identity_model("angle", 2)
    assert np.allclose(embed(model, [0.0, 0.0]).amplitudes, basis_state(2, 0).amplitudes)
    # RY(pi) maps |0> to |1> with amplitude +1
    state = embed(model, [1.0, 1.0])
    expected = np.zeros(4)
    expected[3] = 1.0
    assert np.allclose(state.amplitudes, expected, atol=1e-12)


def test_angle_embedding_matches_kron_oracle():
    model = identity_model("angle", 3)
    x = np.array([0.3, 0.7, 0.1])
    mats = []
    for v in x:
        theta = np.pi * v
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        mats.append(np.array([[c, -s], [s, c]]))
    expected = kron_all(mats) @ basis_state(3, 0).amplitudes
    assert np.allclose(embed(model, x).amplitudes, expected, atol=1e-12)


def test_amplitude_embedding():
    model = identity_model("amplitude", 4)
    assert np.allclose(embed(model, [1, 0, 0, 0]).amplitudes, basis_state(2, 0).amplitudes)
    state = embed(model, [3.0, 0.0, 4.0, 0.0])
    assert np.allclose(state.amplitudes, [0.6, 0.0, 0.8, 0.0], atol=1e-12)
    with pytest.raises(DomainError):
        embed(model, [0.0, 0.0, 0.0, 0.0])


def test_amplitude_embedding_pads_odd_lengths():
    model = identity_model("amplitude", 3)
    state = embed(model, [1.0, 1.0, 1.0])
    v = 1.0 / np.sqrt(3.0)
    assert np.allclose(state.amplitudes, [v, v, v, 0.0], atol=1e-12)


def test_ancillas_appended_in_zero():
    model = identity_model("amplitude_with_ancillas", 4)
    state = embed(model, [0.0, 1.0, 0.0, 0.0])
    # data index 1 lands at joint index 1 * 2^4
    expected = np.zeros(64)
    expected[16] = 1.0
    assert np.allclose(state.amplitudes, expected, atol=1e-12)


def test_zz_feature_map_matches_matrix_chain():
    model = identity_model("zz_feature_map", 2)
    x = np.array([0.3, 0.7])
    H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)

    def rz(a):
        return np.diag([np.exp(-0.5j * a), np.exp(0.5j * a)])

    CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])
    chain = (
        CNOT
        @ kron_all([np.eye(2), rz(2 * (np.pi - x[0]) * (np.pi - x[1]))])
        @ CNOT
        @ kron_all([rz(2 * x[0]), rz(2 * x[1])])
        @ kron_all([H, H])
    )
    expected = chain @ basis_state(2, 0).amplitudes
    assert np.allclose(embed(model, x).amplitudes, expected, atol=1e-12)


def test_embeddings_preserve_norm():
    rng = np.random.default_rng(0)
    for embedding, d in (("angle", 3), ("zz_feature_map", 3), ("amplitude", 5),
                         ("amplitude_with_ancillas", 3)):
        model = make_vqc(embedding, d, seed=1)
        for _ in range(5):
            state = embed(model, rng.uniform(0.1, 1.0, size=d))
            assert abs(np.linalg.norm(state.amplitudes) - 1.0) < 1e-12


def test_embed_checks_feature_count():
    model = make_vqc("angle", 2)
    with pytest.raises(DomainError):
        embed(model, [0.1, 0.2, 0.3])


# --- readout ---------------------------------------------------------------------


def test_expectation_z_basis_states():
    assert expectation_z(basis_state(3, 0), 0) == pytest.approx(1.0)
    # index 4 = |100>: qubit 0 set
    assert expectation_z(basis_state(3, 4), 0) == pytest.approx(-1.0)
    assert expectation_z(basis_state(3, 4), 1) == pytest.approx(1.0)


def test_expectation_z_matches_signed_sum_oracle():
    rng = np.random.default_rng(5)
    for _ in range(5):
        model = make_vqc("angle", 3, seed=int(rng.integers(1000)))
        x = rng.uniform(0, 1, size=3)
        state = apply_entangling_layers(embed(model, x), model.stack)
        probs = np.abs(state.amplitudes) ** 2
        for qubit in range(3):
            signs = np.array([
                1.0 if not (i >> (3 - 1 - qubit)) & 1 else -1.0 for i in range(8)
            ])
            assert expectation_z(state, qubit) == pytest.approx(
                float(signs @ probs), abs=1e-12
            )


def test_class_probabilities_renormalize():
    amps = np.sqrt(np.array([0.1, 0.2, 0.3, 0.4]))
    state = embed(identity_model("amplitude", 4, n_classes=3), amps)
    probs = class_probabilities(state, 3)
    assert np.allclose(probs, np.array([0.1, 0.2, 0.3]) / 0.6, atol=1e-12)
    with pytest.raises(DomainError):
        class_probabilities(basis_state(1, 0), 3)


def test_vqc_forward_binary_and_interface():
    model = make_vqc("angle", 2, seed=3)
    x = [0.25, 0.75]
    z = vqc_forward(model, x)
    assert -1.0 <= z <= 1.0
    scores = model.forward(x)
    assert scores.shape == (2,)
    assert scores.sum() == pytest.approx(1.0, abs=1e-12)
    assert scores[0] == pytest.approx((1 + z) / 2, abs=1e-12)
    assert model.predict_class(x) == (0 if z >= 0 else 1)


def test_vqc_param_interface():
    model = make_vqc("zz_feature_map", 2, seed=0)
    assert model.n_params == 2 * 4 * 3
    params = model.get_params()
    assert np.all(model.param_kinds() == "angle")
    model.set_params(np.zeros(model.n_params))
    assert np.all(model.get_params() == 0.0)
    model.set_params(params)
    assert np.array_equal(model.get_params(), params)
    with pytest.raises(DomainError):
        model.set_params(np.zeros(3))


def test_vqc_trains_on_tiny_separable_data():
    ds, _ = minmax_scale(make_moons(24, noise=0.05, seed=0))
    model = make_vqc("angle", 2, seed=1)
    config = TrainConfig(epochs=3, batch_size=8, lr=0.1, seed=0)
    before = batch_loss(model, ds.features, ds.labels, "cross_entropy")
    _, report = train(model, ds, config, "cross_entropy")
    assert report.loss_trace[-1] < before


# --- ablation variants --------------------------------------------------------------


def test_ablation_unknown_kind():
    with pytest.raises(ConfigurationError):
        ablation_variant("sorted")
    with pytest.raises(ConfigurationError):
        ablation_variant("pretrained", base=None)


def test_hadamard_init_marginals_uniform():
    net = ablation_variant("hadamard_init", seed=0)
    assert net.architecture == [2, 3, 2]
    unit = net.layers[0].units[0][0]
    state = apply_entangling_layers(basis_state(6, 0), unit.base_stack)
    marg = position_marginals(state, unit.layout)
    assert np.allclose(marg, 1.0 / 16.0, atol=1e-12)
    # trainable stack retained
    assert unit.trainable_stack.n_layers == 2
    assert net.n_params == 168


def test_untrained_frozen_closed_form():
    net = ablation_variant("untrained_frozen", arch=(2, 1), seed=4)
    assert net.n_params == 4  # two weights per unit, no angles
    for j, row in enumerate(net.layers[0].units):
        for unit in row:
            assert unit.trainable_stack.n_layers == 0
    x = np.array([0.4, -0.2])
    units = net.layers[0].units[0]
    expected = sum(
        u.w_quantum / 16.0 + u.w_silu * silu(float(x[i])) for i, u in enumerate(units)
    )
    assert net.forward(x)[0] == pytest.approx(expected, abs=1e-14)


def test_pretrained_variant_uses_given_base():
    rng = np.random.default_rng(2)
    base = PretrainedBase(random_stack(tuple(range(6)), 2, rng), (1.0,) * 4, tvd=0.1)
    net = ablation_variant("pretrained", base=base, seed=0)
    assert net.layers[0].units[0][0].base_stack is base.stack
    twin = ablation_variant("hadamard_init", seed=0)
    assert np.array_equal(net.get_params(), twin.get_params())
