"""Versioned JSON checkpoints for pretrained bases, networks, and VQCs.

Floats serialize through ``json`` with shortest round-trip repr, so a
saved model reproduces forward outputs bit-identically after loading.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import VQCModel
from .errors import ArtifactError, ConfigurationError, ParseError
from .network import LayerSpec, QuKANNetwork
from .residual import PretrainedBase, ResidualUnit
from .simulator import EntanglingLayerStack, RegisterLayout, StateVector
from .splines import DiscretizationGrid

FORMAT_VERSION = 1

KIND_BASE = "pretrained_base"
KIND_NETWORK = "network"
KIND_VQC = "vqc"


@dataclass(frozen=True)
class Checkpoint:
    format_version: int
    kind: str
    model: object
    provenance: dict


# --- encoding ------------------------------------------------------------------


def _encode_stack(stack: EntanglingLayerStack | None):
    if stack is None:
        return None
    return {
        "target_qubits": list(stack.target_qubits),
        "n_layers": int(stack.n_layers),
        "angles": [float(v) for v in stack.angles.ravel()],
    }


def _encode_state(state: StateVector | None):
    if state is None:
        return None
    return {
        "n_qubits": state.n_qubits,
        "amplitudes": [[float(a.real), float(a.imag)] for a in state.amplitudes],
    }


def _encode_base(base: PretrainedBase) -> dict:
    return {
        "stack": _encode_stack(base.stack),
        "row_normalizers": [float(v) for v in base.row_normalizers],
        "tvd": float(base.tvd),
        "fq_scale": float(base.fq_scale),
        "fq_shift": float(base.fq_shift),
    }


def _encode_unit(unit: ResidualUnit) -> dict:
    return {
        "layout": {
            "label_qubits": list(unit.layout.label_qubits),
            "position_qubits": list(unit.layout.position_qubits),
        },
        "grid": {
            "x_min": float(unit.grid.x_min),
            "x_max": float(unit.grid.x_max),
            "n_position_qubits": int(unit.grid.n_position_qubits),
        },
        "trainable_stack": _encode_stack(unit.trainable_stack),
        "base_stack": _encode_stack(unit.base_stack),
        "base_state": _encode_state(unit.base_state),
        "w_quantum": float(unit.w_quantum),
        "w_silu": float(unit.w_silu),
        "row_normalizers": [float(v) for v in unit.row_normalizers],
        "mode": unit.mode,
        "fq_scale": float(unit.fq_scale),
        "fq_shift": float(unit.fq_shift),
    }


def _encode_network(net: QuKANNetwork) -> dict:
    ranges = None
    if net.input_ranges is not None:
        ranges = [
            [[float(lo), float(hi)] for lo, hi in layer] for layer in net.input_ranges
        ]
    return {
        "mode": net.mode,
        "seed": int(net.seed),
        "calibrated": bool(net.calibrated),
        "input_ranges": ranges,
        "layers": [
            {
                "in_width": layer.in_width,
                "out_width": layer.out_width,
                "units": [[_encode_unit(u) for u in row] for row in layer.units],
            }
            for layer in net.layers
        ],
    }


def _encode_vqc(model: VQCModel) -> dict:
    return {
        "embedding": model.embedding,
        "n_qubits": int(model.n_qubits),
        "n_features": int(model.n_features),
        "n_ancillas": int(model.n_ancillas),
        "n_classes": int(model.n_classes),
        "readout_qubit": int(model.readout_qubit),
        "stack": _encode_stack(model.stack),
    }


def checkpoint_kind(model) -> str:
    if isinstance(model, PretrainedBase):
        return KIND_BASE
    if isinstance(model, QuKANNetwork):
        return KIND_NETWORK
    if isinstance(model, VQCModel):
        return KIND_VQC
    raise ConfigurationError(f"cannot checkpoint object of type {type(model).__name__}")


def save_checkpoint(model, path: str | Path, provenance: dict | None = None) -> None:
    kind = checkpoint_kind(model)
    payload = {
        KIND_BASE: _encode_base,
        KIND_NETWORK: _encode_network,
        KIND_VQC: _encode_vqc,
    }[kind](model)
    document = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "provenance": provenance or {},
        "payload": payload,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(document, fh, indent=1)
        fh.write("\n")


# --- decoding ------------------------------------------------------------------


def _decode_stack(doc) -> EntanglingLayerStack | None:
    if doc is None:
        return None
    targets = tuple(int(q) for q in doc["target_qubits"])
    angles = np.array(doc["angles"], dtype=float).reshape(
        int(doc["n_layers"]), len(targets), 3
    )
    return EntanglingLayerStack(targets, angles)


def _decode_state(doc) -> StateVector | None:
    if doc is None:
        return None
    amps = np.array([complex(re, im) for re, im in doc["amplitudes"]])
    return StateVector(int(doc["n_qubits"]), amps)


def _decode_base(doc) -> PretrainedBase:
    return PretrainedBase(
        stack=_decode_stack(doc["stack"]),
        row_normalizers=tuple(float(v) for v in doc["row_normalizers"]),
        tvd=float(doc["tvd"]),
        fq_scale=float(doc["fq_scale"]),
        fq_shift=float(doc["fq_shift"]),
    )


def _decode_unit(doc) -> ResidualUnit:
    layout = RegisterLayout(
        tuple(int(q) for q in doc["layout"]["label_qubits"]),
        tuple(int(q) for q in doc["layout"]["position_qubits"]),
    )
    grid = DiscretizationGrid(
        float(doc["grid"]["x_min"]),
        float(doc["grid"]["x_max"]),
        int(doc["grid"]["n_position_qubits"]),
    )
    return ResidualUnit(
        layout=layout,
        grid=grid,
        trainable_stack=_decode_stack(doc["trainable_stack"]),
        base_stack=_decode_stack(doc["base_stack"]),
        base_state=_decode_state(doc["base_state"]),
        w_quantum=float(doc["w_quantum"]),
        w_silu=float(doc["w_silu"]),
        row_normalizers=tuple(float(v) for v in doc["row_normalizers"]),
        mode=doc["mode"],
        fq_scale=float(doc["fq_scale"]),
        fq_shift=float(doc["fq_shift"]),
    )


def _decode_network(doc) -> QuKANNetwork:
    layers = [
        LayerSpec(
            int(layer["in_width"]),
            int(layer["out_width"]),
            [[_decode_unit(u) for u in row] for row in layer["units"]],
        )
        for layer in doc["layers"]
    ]
    ranges = doc["input_ranges"]
    if ranges is not None:
        ranges = [[(float(lo), float(hi)) for lo, hi in layer] for layer in ranges]
    return QuKANNetwork(
        layers=layers,
        mode=doc["mode"],
        seed=int(doc["seed"]),
        input_ranges=ranges,
        calibrated=bool(doc["calibrated"]),
    )


def _decode_vqc(doc) -> VQCModel:
    return VQCModel(
        embedding=doc["embedding"],
        n_qubits=int(doc["n_qubits"]),
        n_features=int(doc["n_features"]),
        stack=_decode_stack(doc["stack"]),
        n_ancillas=int(doc["n_ancillas"]),
        n_classes=int(doc["n_classes"]),
        readout_qubit=int(doc["readout_qubit"]),
    )


def load_checkpoint(path: str | Path) -> Checkpoint:
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"checkpoint not found: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            document = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid checkpoint: {exc}") from None
    version = document.get("format_version")
    if version != FORMAT_VERSION:
        raise ParseError(f"{path}: unsupported format version {version!r}")
    kind = document.get("kind")
    decoders = {KIND_BASE: _decode_base, KIND_NETWORK: _decode_network, KIND_VQC: _decode_vqc}
    if kind not in decoders:
        raise ParseError(f"{path}: unknown checkpoint kind {kind!r}")
    try:
        model = decoders[kind](document["payload"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed {kind} payload: {exc}") from None
    return Checkpoint(
        format_version=version,
        kind=kind,
        model=model,
        provenance=document.get("provenance", {}),
    )
