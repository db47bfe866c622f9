"""Network composition: layers of residual units with node-summation semantics.

A layer maps ``in_width`` activations to ``out_width`` node sums,
``out[j] = sum_i units[j][i].forward(in[i])``; layers chain by width. All
units feeding from the same input node share one discretization grid,
calibrated once from training samples and frozen afterward: each inner
grid spans the observed activation range plus a 5% margin on both sides
(degenerate ranges widen to +-0.5 around the value).

Hybrid layers share a single pretrained base across every unit because
the basis matrix is affine-invariant in the grid bounds. Fully quantum
bases embed SiLU values, which do depend on the bounds, so calibration
pretrains one base per (layer, input node) grid, seeded reproducibly
from the network seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .born_machine import PretrainConfig
from .errors import ConfigurationError, DomainError
from .residual import (
    MODE_FULL_QUANTUM,
    MODE_HYBRID,
    PretrainedBase,
    make_full_quantum_unit,
    make_hybrid_unit,
    pretrain_full_quantum_base,
    uniform_base_stack,
)
from .splines import DEFAULT_POSITION_QUBITS, DiscretizationGrid

CALIBRATION_MARGIN = 0.05
WEIGHT_INIT_LOW = 0.5
WEIGHT_INIT_HIGH = 1.5


@dataclass
class LayerSpec:
    """One network layer: a matrix of residual units indexed [out][in]."""

    in_width: int
    out_width: int
    units: list

    def __post_init__(self):
        if self.in_width < 1 or self.out_width < 1:
            raise DomainError("layer widths must be positive")
        if len(self.units) != self.out_width or any(len(row) != self.in_width for row in self.units):
            raise DomainError("unit matrix does not match the declared widths")


@dataclass
class QuKANNetwork:
    """Stack of layers plus the calibration record of per-node input ranges.

    Trainable parameters are exposed flat, iterating units in
    (layer, out node, in node) order with each unit contributing its
    angles followed by its scaling weights.
    """

    layers: list
    mode: str = MODE_HYBRID
    seed: int = 0
    input_ranges: list | None = None
    calibrated: bool = False

    def __post_init__(self):
        if not self.layers:
            raise DomainError("network needs at least one layer")
        for first, second in zip(self.layers, self.layers[1:]):
            if first.out_width != second.in_width:
                raise DomainError(
                    f"layer widths do not chain: {first.out_width} feeds {second.in_width}"
                )

    @property
    def in_width(self) -> int:
        return self.layers[0].in_width

    @property
    def out_width(self) -> int:
        return self.layers[-1].out_width

    @property
    def architecture(self) -> list[int]:
        return [self.in_width] + [layer.out_width for layer in self.layers]

    def units(self):
        for layer in self.layers:
            for row in layer.units:
                yield from row

    # --- evaluation ------------------------------------------------------

    def forward_batch(self, features: np.ndarray) -> np.ndarray:
        features = np.atleast_2d(np.asarray(features, dtype=float))
        if features.shape[1] != self.in_width:
            raise DomainError(f"expected {self.in_width} features, got {features.shape[1]}")
        current = features
        for layer in self.layers:
            nxt = np.zeros((current.shape[0], layer.out_width))
            for i in range(layer.in_width):
                xi = current[:, i]
                for j in range(layer.out_width):
                    nxt[:, j] += layer.units[j][i].forward(xi)
            current = nxt
        return current

    def forward(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise DomainError("forward takes a single feature vector")
        return self.forward_batch(x[None, :])[0]

    def predict_class(self, x) -> int:
        """Argmax over output nodes; ties resolve toward the lower index."""
        return int(np.argmax(self.forward(x)))

    def predict_classes(self, features) -> np.ndarray:
        return np.argmax(self.forward_batch(features), axis=1)

    # --- flat parameter interface ---------------------------------------------

    @property
    def n_params(self) -> int:
        return sum(u.n_params for u in self.units())

    def get_params(self) -> np.ndarray:
        return np.concatenate([u.get_params() for u in self.units()])

    def set_params(self, values) -> None:
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n_params,):
            raise DomainError(f"expected {self.n_params} parameters, got {values.shape}")
        pos = 0
        for unit in self.units():
            chunk = values[pos : pos + unit.n_params]
            # skip untouched units so their marginal caches survive
            if not unit.params_equal(chunk):
                unit.set_params(chunk)
            pos += unit.n_params

    def param_kinds(self) -> np.ndarray:
        return np.concatenate([u.param_kinds() for u in self.units()])


# --- construction -------------------------------------------------------------------


def _init_weight(rng) -> float:
    return float(rng.uniform(WEIGHT_INIT_LOW, WEIGHT_INIT_HIGH))


def build_network(
    arch: list[int],
    base: PretrainedBase | None = None,
    mode: str = MODE_HYBRID,
    seed: int = 0,
    trainable_layers: int = 2,
    n_position: int = DEFAULT_POSITION_QUBITS,
) -> QuKANNetwork:
    """Uncalibrated network with seeded scaling weights and zero angles.

    Scaling weights draw from U[0.5, 1.5); distinct draws keep same-layer
    hidden nodes from being permanently interchangeable (equal weights
    would make their gradients coincide batch for batch). Hybrid layers
    require a pretrained ``base``; fully quantum units start on a uniform
    placeholder that calibration replaces with grid-specific bases.
    """
    if len(arch) < 2 or any(w < 1 for w in arch):
        raise DomainError("architecture needs at least two positive widths")
    if mode not in (MODE_HYBRID, MODE_FULL_QUANTUM):
        raise DomainError(f"unknown network mode {mode!r}")
    if mode == MODE_HYBRID and base is None:
        raise ConfigurationError("hybrid networks need a pretrained base")
    rng = np.random.default_rng(seed)
    placeholder = DiscretizationGrid(0.0, 1.0, n_position)
    fq_placeholder = PretrainedBase(
        uniform_base_stack(3 + n_position), (1.0,) * 5, tvd=1.0, fq_scale=1.0, fq_shift=0.0
    )
    layers = []
    for in_width, out_width in zip(arch, arch[1:]):
        units = []
        for _ in range(out_width):
            row = []
            for _ in range(in_width):
                w_quantum = _init_weight(rng)
                if mode == MODE_HYBRID:
                    w_silu = _init_weight(rng)
                    row.append(
                        make_hybrid_unit(
                            base,
                            placeholder,
                            trainable_layers=trainable_layers,
                            w_quantum=w_quantum,
                            w_silu=w_silu,
                        )
                    )
                else:
                    row.append(
                        make_full_quantum_unit(
                            fq_placeholder,
                            placeholder,
                            trainable_layers=trainable_layers,
                            w_quantum=w_quantum,
                        )
                    )
            units.append(row)
        layers.append(LayerSpec(in_width, out_width, units))
    return QuKANNetwork(layers, mode=mode, seed=seed)


def calibrated_range(values, margin: float = CALIBRATION_MARGIN) -> tuple[float, float]:
    """Observed range widened by the margin; degenerate ranges become +-0.5."""
    lo = float(np.min(values))
    hi = float(np.max(values))
    if hi == lo:
        return lo - 0.5, lo + 0.5
    span = hi - lo
    return lo - margin * span, hi + margin * span


def fq_base_seed(net_seed: int, layer_index: int, node_index: int) -> int:
    """Deterministic pretraining seed per (network, layer, input node)."""
    return int(np.random.SeedSequence([net_seed, layer_index, node_index]).generate_state(1)[0])


def calibrate_ranges(
    net: QuKANNetwork,
    samples,
    pretrain_config: PretrainConfig | None = None,
) -> QuKANNetwork:
    """Fix every unit's grid from the activation ranges the samples produce.

    Walks the network once: each layer's input grids are set from the
    activations feeding it before that layer is evaluated, so deeper
    ranges reflect the grids actually installed upstream. Fully quantum
    layers pretrain one base per input node here. Grids freeze after
    this; calibrating twice raises.
    """
    if net.calibrated:
        raise ConfigurationError("network ranges are frozen after calibration")
    current = np.atleast_2d(np.asarray(samples, dtype=float))
    if current.shape[0] == 0:
        raise DomainError("calibration needs at least one sample")
    if current.shape[1] != net.in_width:
        raise DomainError(f"expected {net.in_width} features, got {current.shape[1]}")
    ranges = []
    for layer_index, layer in enumerate(net.layers):
        layer_ranges = []
        for i in range(layer.in_width):
            lo, hi = calibrated_range(current[:, i])
            layer_ranges.append((lo, hi))
            grid = DiscretizationGrid(lo, hi, layer.units[0][i].grid.n_position_qubits)
            fq_base = None
            if net.mode == MODE_FULL_QUANTUM:
                fq_base = pretrain_full_quantum_base(
                    grid, seed=fq_base_seed(net.seed, layer_index, i), config=pretrain_config
                )
            for j in range(layer.out_width):
                unit = layer.units[j][i]
                if fq_base is not None:
                    unit.install_base(fq_base, grid)
                else:
                    unit.set_grid(grid)
        ranges.append(layer_ranges)
        nxt = np.zeros((current.shape[0], layer.out_width))
        for i in range(layer.in_width):
            xi = current[:, i]
            for j in range(layer.out_width):
                nxt[:, j] += layer.units[j][i].forward(xi)
        current = nxt
    net.input_ranges = ranges
    net.calibrated = True
    return net
