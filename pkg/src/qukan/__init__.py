"""Quantum Kolmogorov-Arnold networks on a dense statevector simulator.

The package pretrains a Born machine to hold a superposition of B-spline
basis functions, reads residual functions out of its conditional position
marginals, and composes them into KAN-style networks with hybrid or fully
quantum edge functions. Everything runs on a self-contained simulator;
there is no hardware or external quantum framework dependency.
"""

__version__ = "0.1.0"

from .simulator import (
    EntanglingLayerStack,
    RegisterLayout,
    StateVector,
    default_layout,
    position_marginal,
    position_marginals,
)
from .splines import DiscretizationGrid, SplineBasis, clamped_uniform_basis, default_basis_matrix
from .born_machine import (
    PretrainConfig,
    PretrainResult,
    QCBMModel,
    build_superposition_target,
    make_qcbm,
    pretrain,
    total_variation,
)
from .residual import (
    PretrainedBase,
    ResidualUnit,
    make_full_quantum_unit,
    make_hybrid_unit,
    pretrain_full_quantum_base,
    pretrain_hybrid_base,
)
from .network import QuKANNetwork, build_network, calibrate_ranges
from .optim import MetricsReport, TrainConfig, accuracy_score, train
from .datasets import Dataset, MinMaxScaler, load_iris, make_moons, regression_targets
from .baselines import VQCModel, ablation_variant, make_vqc
from .checkpoints import Checkpoint, load_checkpoint, save_checkpoint
from .workflows import (
    EXPERIMENTS,
    boundary_grid,
    run_ablation,
    run_pretraining,
    run_training,
    train_one_seed,
)
from .errors import (
    ArtifactError,
    ConfigurationError,
    DomainError,
    ParseError,
    QukanError,
    TrainingError,
)

__all__ = [
    "ArtifactError",
    "Checkpoint",
    "ConfigurationError",
    "Dataset",
    "DiscretizationGrid",
    "DomainError",
    "EntanglingLayerStack",
    "EXPERIMENTS",
    "MetricsReport",
    "MinMaxScaler",
    "ParseError",
    "PretrainConfig",
    "PretrainResult",
    "PretrainedBase",
    "QCBMModel",
    "QuKANNetwork",
    "QukanError",
    "RegisterLayout",
    "ResidualUnit",
    "SplineBasis",
    "StateVector",
    "TrainConfig",
    "TrainingError",
    "VQCModel",
    "ablation_variant",
    "accuracy_score",
    "boundary_grid",
    "build_network",
    "build_superposition_target",
    "calibrate_ranges",
    "clamped_uniform_basis",
    "default_basis_matrix",
    "default_layout",
    "load_checkpoint",
    "load_iris",
    "make_full_quantum_unit",
    "make_hybrid_unit",
    "make_moons",
    "make_qcbm",
    "make_vqc",
    "position_marginal",
    "position_marginals",
    "pretrain",
    "pretrain_full_quantum_base",
    "pretrain_hybrid_base",
    "regression_targets",
    "run_ablation",
    "run_pretraining",
    "run_training",
    "save_checkpoint",
    "total_variation",
    "train",
    "train_one_seed",
    "__version__",
]
