"""Checkpoint round trips must reproduce models bit for bit."""

import numpy as np
import pytest

from qukan.baselines import ablation_variant, make_vqc
from qukan.born_machine import PretrainConfig
from qukan.checkpoints import (
    FORMAT_VERSION,
    Checkpoint,
    load_checkpoint,
    save_checkpoint,
)
from qukan.errors import ArtifactError, ConfigurationError, ParseError
from qukan.network import build_network, calibrate_ranges
from qukan.residual import MODE_FULL_QUANTUM, PretrainedBase, uniform_base_stack
from qukan.simulator import basis_state, random_stack


def random_base(seed):
    rng = np.random.default_rng(seed)
    return PretrainedBase(
        random_stack(tuple(range(6)), 2, rng),
        (0.9, 1.1, 1.0, 0.95),
        tvd=0.031,
        fq_scale=2.5,
        fq_shift=0.08,
    )


def test_base_round_trip(tmp_path):
    base = random_base(0)
    path = tmp_path / "base.json"
    save_checkpoint(base, path, provenance={"seed": 3})
    ckpt = load_checkpoint(path)
    assert ckpt.format_version == FORMAT_VERSION
    assert ckpt.kind == "pretrained_base"
    assert ckpt.provenance == {"seed": 3}
    loaded = ckpt.model
    assert np.array_equal(loaded.stack.angles, base.stack.angles)
    assert loaded.stack.target_qubits == base.stack.target_qubits
    assert loaded.row_normalizers == base.row_normalizers
    assert (loaded.tvd, loaded.fq_scale, loaded.fq_shift) == (0.031, 2.5, 0.08)


def test_network_round_trip_bit_identical_forward(tmp_path):
    net = build_network([2, 3, 2], base=random_base(1), seed=4)
    rng = np.random.default_rng(2)
    calibrate_ranges(net, rng.uniform(0, 1, size=(25, 2)))
    params = net.get_params()
    params[net.param_kinds() == "angle"] = rng.uniform(0, 2 * np.pi, size=(params == 0).sum())
    net.set_params(params)
    path = tmp_path / "net.json"
    save_checkpoint(net, path)
    loaded = load_checkpoint(path).model
    assert loaded.architecture == [2, 3, 2]
    assert loaded.calibrated
    assert loaded.input_ranges == net.input_ranges
    X = rng.uniform(-0.3, 1.3, size=(100, 2))
    original = net.forward_batch(X)
    restored = loaded.forward_batch(X)
    assert np.array_equal(original, restored)  # bitwise, not approximate


def test_full_quantum_network_round_trip(tmp_path):
    net = build_network([2, 1], mode=MODE_FULL_QUANTUM, seed=0)
    samples = np.random.default_rng(5).uniform(-1, 1, size=(10, 2))
    calibrate_ranges(net, samples, pretrain_config=PretrainConfig(max_iters=3))
    path = tmp_path / "fq.json"
    save_checkpoint(net, path)
    loaded = load_checkpoint(path).model
    unit = loaded.layers[0].units[0][0]
    assert unit.mode == MODE_FULL_QUANTUM
    assert unit.fq_scale == net.layers[0].units[0][0].fq_scale
    X = samples[:5]
    assert np.array_equal(net.forward_batch(X), loaded.forward_batch(X))


def test_base_state_units_round_trip(tmp_path):
    net = ablation_variant("untrained_frozen", arch=(1, 1), seed=2)
    unit = net.layers[0].units[0][0]
    # exercise the explicit-amplitudes path
    from qukan.residual import ResidualUnit
    from qukan.simulator import apply_entangling_layers

    state = apply_entangling_layers(basis_state(6, 0), unit.base_stack)
    clone = ResidualUnit(
        layout=unit.layout,
        grid=unit.grid,
        trainable_stack=unit.trainable_stack,
        base_state=state,
        w_quantum=unit.w_quantum,
        w_silu=unit.w_silu,
    )
    net.layers[0].units[0][0] = clone
    path = tmp_path / "state.json"
    save_checkpoint(net, path)
    loaded = load_checkpoint(path).model
    assert np.array_equal(
        loaded.layers[0].units[0][0].base_state.amplitudes, state.amplitudes
    )
    assert loaded.forward([0.3])[0] == net.forward([0.3])[0]


def test_vqc_round_trip(tmp_path):
    model = make_vqc("zz_feature_map", 2, seed=9)
    path = tmp_path / "vqc.json"
    save_checkpoint(model, path, provenance={"config_hash": "abc"})
    ckpt = load_checkpoint(path)
    assert ckpt.kind == "vqc"
    loaded = ckpt.model
    x = [0.21, 0.68]
    assert np.array_equal(loaded.forward(x), model.forward(x))
    assert loaded.embedding == "zz_feature_map"


def test_load_errors(tmp_path):
    with pytest.raises(ArtifactError):
        load_checkpoint(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ParseError):
        load_checkpoint(bad)
    bad.write_text('{"format_version": 99, "kind": "network", "payload": {}}')
    with pytest.raises(ParseError, match="version"):
        load_checkpoint(bad)
    bad.write_text('{"format_version": 1, "kind": "mystery", "payload": {}}')
    with pytest.raises(ParseError, match="kind"):
        load_checkpoint(bad)
    bad.write_text('{"format_version": 1, "kind": "network", "payload": {"layers": []}}')
    with pytest.raises(ParseError, match="malformed"):
        load_checkpoint(bad)


def test_unknown_object_rejected(tmp_path):
    with pytest.raises(ConfigurationError):
        save_checkpoint({"weights": [1, 2]}, tmp_path / "x.json")
