"""Residual edge functions: pretrained spline superposition plus trainable mixing.

Each network edge carries a residual unit built from three ingredients:

* a frozen Born machine base circuit whose state stores the spline basis,
  one normalized basis function per label value;
* a small trainable entangling stack acting on the label qubits only,
  which reweights the basis mixture without disturbing how the position
  register encodes grid points;
* classical scaling weights.

The quantum value at an input is the position-register marginal at the
nearest grid point. Hybrid units add a classically computed SiLU branch;
fully quantum units instead carry the SiLU inside the superposition as a
fifth labelled function (shifted to be nonnegative and normalized like
the splines) and undo the shift and normalization with constants
recorded at encode time.

Basis matrices are invariant under affine rescaling of the grid together
with the basis domain, so a single pretrained hybrid base serves units
on any calibrated input range. The fully quantum base is grid specific
because SiLU values are not affine invariant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .born_machine import (
    PretrainConfig,
    build_superposition_target,
    make_qcbm,
    pretrain,
)
from .errors import DomainError
from .simulator import (
    EntanglingLayerStack,
    RegisterLayout,
    StateVector,
    apply_entangling_layers,
    basis_state,
    default_layout,
    position_marginals,
    zero_stack,
)
from .splines import (
    DEFAULT_POSITION_QUBITS,
    DiscretizationGrid,
    default_basis_matrix,
    nearest_grid_index,
)

MODE_HYBRID = "hybrid"
MODE_FULL_QUANTUM = "full_quantum"
DEFAULT_TRAINABLE_LAYERS = 2
FQ_LABEL_QUBITS = 3  # 4 splines + 1 SiLU row need 5 of 8 label values


def silu(x):
    """Sigmoid-weighted linear unit, overflow-safe on both tails."""
    arr = np.asarray(x, dtype=float)
    z = np.exp(-np.abs(arr))
    sig = np.where(arr >= 0, 1.0 / (1.0 + z), z / (1.0 + z))
    out = arr * sig
    return float(out) if np.isscalar(x) or arr.ndim == 0 else out


@dataclass
class ResidualUnit:
    """One trainable edge function with a frozen pretrained quantum base.

    ``base_stack`` holds the pretrained circuit angles and never changes
    during network training; ``base_state`` may override it with explicit
    amplitudes (used for uniform-superposition ablations and synthetic
    exact bases). Trainable state is ``trainable_stack`` plus the scalar
    weights, exposed through get_params/set_params in the order
    ``angles..., w_quantum[, w_silu]``.
    """

    layout: RegisterLayout
    grid: DiscretizationGrid
    trainable_stack: EntanglingLayerStack
    base_stack: EntanglingLayerStack | None = None
    base_state: StateVector | None = None
    w_quantum: float = 1.0
    w_silu: float = 1.0
    row_normalizers: tuple[float, ...] = ()
    mode: str = MODE_HYBRID
    fq_scale: float = 1.0
    fq_shift: float = 0.0
    _base_cache: StateVector | None = field(default=None, init=False, repr=False, compare=False)
    _marginal_cache: tuple | None = field(default=None, init=False, repr=False, compare=False)
    _input_cache: tuple | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in (MODE_HYBRID, MODE_FULL_QUANTUM):
            raise DomainError(f"unknown residual mode {self.mode!r}")
        if (self.base_stack is None) == (self.base_state is None):
            raise DomainError("provide exactly one of base_stack or base_state")
        if not set(self.trainable_stack.target_qubits) <= set(self.layout.label_qubits):
            raise DomainError("trainable gates may only act on label qubits")
        if self.grid.n_points != self.layout.n_positions:
            raise DomainError("grid resolution does not match the position register")
        if self.base_state is not None and self.base_state.n_qubits != self.layout.n_qubits:
            raise DomainError("base state size does not match the register")

    # --- quantum readout -------------------------------------------------

    def prepared_base(self) -> StateVector:
        """The frozen pretrained state, regenerated from angles on first use."""
        if self.base_state is not None:
            return self.base_state
        if self._base_cache is None:
            start = basis_state(self.layout.n_qubits, 0)
            self._base_cache = apply_entangling_layers(start, self.base_stack)
        return self._base_cache

    def prepare_state(self) -> StateVector:
        """Trainable label-register stack applied to the pretrained base."""
        return apply_entangling_layers(self.prepared_base(), self.trainable_stack)

    def marginal_vector(self) -> np.ndarray:
        """Position marginals at every grid point for the current angles.

        Cached per angle configuration; network training invalidates the
        cache implicitly whenever set_params installs new angles.
        """
        angles = self.trainable_stack.angles
        if self._marginal_cache is not None and np.array_equal(self._marginal_cache[0], angles):
            return self._marginal_cache[1]
        marg = position_marginals(self.prepare_state(), self.layout)
        self._marginal_cache = (angles.copy(), marg)
        return marg

    def quantum_branch(self, x) -> float | np.ndarray:
        """Marginal probability at the grid point nearest to x."""
        return self.marginal_vector()[nearest_grid_index(self.grid, x)]

    def forward(self, x):
        """Residual value at x; accepts scalars or arrays elementwise.

        Grid indices and SiLU values depend only on the inputs, so the
        last input vector's are memoized: finite-difference training
        re-evaluates the same batch under hundreds of parameter tweaks.
        """
        x_arr = np.asarray(x, dtype=float)
        if x_arr.ndim == 0:
            p = self.quantum_branch(x)
            if self.mode == MODE_HYBRID:
                return self.w_quantum * p + self.w_silu * silu(x)
            return self.w_quantum * (self.fq_scale * p - self.fq_shift)
        cache = self._input_cache
        if (
            cache is None
            or cache[0].shape != x_arr.shape
            or not np.array_equal(cache[0], x_arr)
        ):
            ks = nearest_grid_index(self.grid, x_arr)
            sil = silu(x_arr) if self.mode == MODE_HYBRID else None
            cache = (x_arr.copy(), ks, sil)
            self._input_cache = cache
        p = self.marginal_vector()[cache[1]]
        if self.mode == MODE_HYBRID:
            return self.w_quantum * p + self.w_silu * cache[2]
        return self.w_quantum * (self.fq_scale * p - self.fq_shift)

    # --- calibration hooks ---------------------------------------------------

    def set_grid(self, grid: DiscretizationGrid) -> None:
        """Swap the input grid; valid for affine-invariant (hybrid) bases."""
        if grid.n_points != self.layout.n_positions:
            raise DomainError("grid resolution does not match the position register")
        self.grid = grid
        self._input_cache = None

    def install_base(self, base: "PretrainedBase", grid: DiscretizationGrid) -> None:
        """Replace the frozen base, e.g. with one pretrained for a new grid."""
        if grid.n_points != self.layout.n_positions:
            raise DomainError("grid resolution does not match the position register")
        self.base_stack = base.stack
        self.base_state = None
        self.row_normalizers = base.row_normalizers
        self.fq_scale = base.fq_scale
        self.fq_shift = base.fq_shift
        self.grid = grid
        self._base_cache = None
        self._marginal_cache = None
        self._input_cache = None

    # --- trainable parameter interface -------------------------------------

    @property
    def n_params(self) -> int:
        return self.trainable_stack.n_params + (2 if self.mode == MODE_HYBRID else 1)

    def get_params(self) -> np.ndarray:
        vals = list(self.trainable_stack.angles.ravel())
        vals.append(self.w_quantum)
        if self.mode == MODE_HYBRID:
            vals.append(self.w_silu)
        return np.array(vals)

    def set_params(self, values) -> None:
        values = np.asarray(values, dtype=float)
        if values.shape != (self.n_params,):
            raise DomainError(f"expected {self.n_params} parameters, got {values.shape}")
        n = self.trainable_stack.n_params
        self.trainable_stack = self.trainable_stack.with_angles(values[:n])
        self.w_quantum = float(values[n])
        if self.mode == MODE_HYBRID:
            self.w_silu = float(values[n + 1])

    def params_equal(self, values: np.ndarray) -> bool:
        """Allocation-free comparison against the current flat parameters."""
        n = self.trainable_stack.n_params
        if values.shape != (self.n_params,):
            return False
        if values[n] != self.w_quantum:
            return False
        if self.mode == MODE_HYBRID and values[n + 1] != self.w_silu:
            return False
        return np.array_equal(values[:n], self.trainable_stack.angles.ravel())

    def param_kinds(self) -> np.ndarray:
        n_weights = 2 if self.mode == MODE_HYBRID else 1
        return np.array(["angle"] * self.trainable_stack.n_params + ["weight"] * n_weights)


# --- pretrained bases -----------------------------------------------------------


@dataclass(frozen=True)
class PretrainedBase:
    """Frozen result of base pretraining, shared by residual units."""

    stack: EntanglingLayerStack
    row_normalizers: tuple[float, ...]
    tvd: float
    fq_scale: float = 1.0
    fq_shift: float = 0.0


def pretrain_hybrid_base(
    seed: int = 0,
    n_label: int = 2,
    n_position: int = DEFAULT_POSITION_QUBITS,
    config: PretrainConfig | None = None,
) -> PretrainedBase:
    """Pretrain the shared spline-superposition base on the unit grid.

    Thanks to affine invariance of the basis matrix the result is valid
    for every hybrid unit regardless of its calibrated grid bounds.
    """
    layout = default_layout(n_label, n_position)
    grid = DiscretizationGrid(0.0, 1.0, n_position)
    target = build_superposition_target(default_basis_matrix(grid), layout)
    result = pretrain(make_qcbm(layout, seed=seed), target, config=config)
    return PretrainedBase(result.model.stack, target.row_normalizers, result.tvd)


def full_quantum_rows(grid: DiscretizationGrid) -> tuple[np.ndarray, float]:
    """Spline rows plus the shifted nonnegative SiLU row for one grid.

    Returns ``(rows, shift)`` where ``rows[-1] = silu(points) + shift``
    and ``shift`` is the magnitude of the most negative SiLU value on the
    grid (zero row values stay possible only for degenerate grids).
    """
    splines = default_basis_matrix(grid)
    values = silu(grid.points)
    shift = abs(float(values.min()))
    return np.vstack([splines, values + shift]), shift


def pretrain_full_quantum_base(
    grid: DiscretizationGrid,
    seed: int = 0,
    config: PretrainConfig | None = None,
) -> PretrainedBase:
    """Pretrain a grid-specific base carrying splines and SiLU together.

    The recorded ``fq_scale`` is the SiLU row normalizer and ``fq_shift``
    the applied shift, so a unit that concentrates all label amplitude on
    the SiLU row reproduces silu at the grid points exactly (up to the
    pretraining TVD).
    """
    layout = default_layout(FQ_LABEL_QUBITS, grid.n_position_qubits)
    rows, shift = full_quantum_rows(grid)
    target = build_superposition_target(rows, layout)
    result = pretrain(make_qcbm(layout, seed=seed), target, config=config)
    return PretrainedBase(
        result.model.stack,
        target.row_normalizers,
        result.tvd,
        fq_scale=target.row_normalizers[-1],
        fq_shift=shift,
    )


def uniform_base_stack(n_qubits: int) -> EntanglingLayerStack:
    """One layer turning |0...0> into the uniform superposition.

    RY(pi/2) on every qubit produces equal real amplitudes and the CNOT
    ring permutes basis states, which leaves that state unchanged.
    """
    angles = np.zeros((1, n_qubits, 3))
    angles[0, :, 1] = np.pi / 2.0
    return EntanglingLayerStack(tuple(range(n_qubits)), angles)


# --- unit constructors ------------------------------------------------------------


def make_hybrid_unit(
    base: PretrainedBase,
    grid: DiscretizationGrid,
    n_label: int = 2,
    trainable_layers: int = DEFAULT_TRAINABLE_LAYERS,
    w_quantum: float = 1.0,
    w_silu: float = 1.0,
) -> ResidualUnit:
    """Hybrid unit over the shared base with zero-initialized trainable angles."""
    layout = default_layout(n_label, grid.n_position_qubits)
    return ResidualUnit(
        layout=layout,
        grid=grid,
        trainable_stack=zero_stack(layout.label_qubits, trainable_layers),
        base_stack=base.stack,
        w_quantum=w_quantum,
        w_silu=w_silu,
        row_normalizers=base.row_normalizers,
    )


def make_full_quantum_unit(
    base: PretrainedBase,
    grid: DiscretizationGrid,
    trainable_layers: int = DEFAULT_TRAINABLE_LAYERS,
    w_quantum: float = 1.0,
) -> ResidualUnit:
    """Fully quantum unit; the base must have been pretrained on this grid."""
    layout = default_layout(FQ_LABEL_QUBITS, grid.n_position_qubits)
    return ResidualUnit(
        layout=layout,
        grid=grid,
        trainable_stack=zero_stack(layout.label_qubits, trainable_layers),
        base_stack=base.stack,
        w_quantum=w_quantum,
        w_silu=0.0,
        row_normalizers=base.row_normalizers,
        mode=MODE_FULL_QUANTUM,
        fq_scale=base.fq_scale,
        fq_shift=base.fq_shift,
    )
