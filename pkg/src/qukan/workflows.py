"""Experiment drivers: pretraining, benchmark training, ablations, boundaries.

Each driver optionally writes comma-separated tables with repr-formatted
floats, so rerunning with the same seeds reproduces every artifact byte
for byte. Accuracies are stored as fractions in [0, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .baselines import ablation_variant, make_vqc
from .born_machine import (
    PretrainConfig,
    PretrainResult,
    build_superposition_target,
    make_qcbm,
    pretrain,
    qcbm_distribution,
)
from .checkpoints import KIND_BASE, load_checkpoint, save_checkpoint
from .datasets import (
    Dataset,
    load_iris,
    make_moons,
    minmax_scale,
    regression_targets,
    stratified_split,
)
from .errors import ConfigurationError
from .network import QuKANNetwork, build_network, calibrate_ranges
from .optim import MetricsReport, TrainConfig, accuracy_score, sum_abs_distance_stats, train
from .residual import MODE_FULL_QUANTUM, PretrainedBase, pretrain_hybrid_base
from .simulator import default_layout
from .splines import DiscretizationGrid, default_basis_matrix

DEFAULT_SEEDS = (0, 1, 2, 3)
TEST_SEED_OFFSET = 10_000
BOUNDARY_RESOLUTION = 200
IRIS_TRAIN_FRACTION = 0.7
DEFAULT_CLASSIFICATION_EPOCHS = 20
DEFAULT_REGRESSION_EPOCHS = 100

ABLATION_VARIANTS = ("pretrained", "hadamard_init", "untrained_frozen")

VQC_EMBEDDINGS = {
    "vqc_angle": "angle",
    "vqc_zz": "zz_feature_map",
    "vqc_amplitude": "amplitude",
    "vqc_amplitude_ancillas": "amplitude_with_ancillas",
}

MODEL_KINDS = ("qukan", "fqukan", *VQC_EMBEDDINGS, "hadamard_init", "untrained_frozen")


@dataclass(frozen=True)
class ExperimentSpec:
    arch: tuple[int, ...]
    loss_kind: str
    n_train: int
    n_test: int
    n_classes: int | None
    lr: float


EXPERIMENTS = {
    "moons": ExperimentSpec((2, 3, 2), "cross_entropy", 1000, 1000, 2, lr=0.3),
    "iris": ExperimentSpec((4, 4, 3), "cross_entropy", 105, 45, 3, lr=0.05),
    "linear": ExperimentSpec((2, 2, 1), "mse", 100, 250, None, lr=0.05),
    "log_ratio": ExperimentSpec((2, 2, 1), "mse", 10, 50, None, lr=0.05),
}


# --- deterministic table writing ---------------------------------------------------


def _format_cell(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_csv(path: str | Path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(v) for v in row) + "\n")
    return path


# --- pretraining -------------------------------------------------------------------


@dataclass(frozen=True)
class PretrainSummary:
    base: PretrainedBase
    result: PretrainResult
    checkpoint_path: Path | None
    trace_path: Path | None
    table_path: Path | None


def run_pretraining(
    out_dir: str | Path | None = None,
    seed: int = 0,
    n_label: int = 2,
    n_position: int = 4,
    config: PretrainConfig | None = None,
    extra_provenance: dict | None = None,
) -> PretrainSummary:
    """Pretrain the shared spline-superposition base and export its artifacts.

    Writes the base checkpoint, the per-iteration MMD/TVD trace, and a
    target-vs-learned distribution table for plotting.
    """
    layout = default_layout(n_label, n_position)
    grid = DiscretizationGrid(0.0, 1.0, n_position)
    target = build_superposition_target(default_basis_matrix(grid), layout)
    result = pretrain(make_qcbm(layout, seed=seed), target, config=config)
    base = PretrainedBase(result.model.stack, target.row_normalizers, result.tvd)
    checkpoint_path = trace_path = table_path = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        checkpoint_path = out / f"base_seed{seed}.json"
        provenance = {
            "seed": seed,
            "n_iters": result.n_iters,
            "final_loss": result.final_loss,
            "tvd": result.tvd,
        }
        if extra_provenance:
            provenance.update(extra_provenance)
        save_checkpoint(base, checkpoint_path, provenance=provenance)
        trace_path = write_csv(
            out / f"pretrain_trace_seed{seed}.csv",
            ["iteration", "mmd", "tvd"],
            (
                (i, loss, tvd)
                for i, (loss, tvd) in enumerate(zip(result.loss_trace, result.tvd_trace))
            ),
        )
        learned = qcbm_distribution(result.model)
        rows = []
        for label in range(layout.n_labels):
            for position in range(layout.n_positions):
                idx = layout.joint_index(label, position)
                rows.append((label, position, target.probs[idx], learned[idx]))
        table_path = write_csv(
            out / f"pretrain_distribution_seed{seed}.csv",
            ["label", "position", "target", "learned"],
            rows,
        )
    return PretrainSummary(base, result, checkpoint_path, trace_path, table_path)


# --- data and model assembly ---------------------------------------------------------


def experiment_data(
    experiment: str,
    seed: int,
    noise: float = 0.1,
    n_train: int | None = None,
    n_test: int | None = None,
):
    """(train, test, scaler) for one seeded run; scaler is None for regression."""
    if experiment not in EXPERIMENTS:
        raise ConfigurationError(f"unknown experiment {experiment!r}")
    spec = EXPERIMENTS[experiment]
    n_train = spec.n_train if n_train is None else n_train
    n_test = spec.n_test if n_test is None else n_test
    if experiment == "moons":
        train_ds = make_moons(n_train, noise=noise, seed=seed)
        test_ds = make_moons(n_test, noise=noise, seed=seed + TEST_SEED_OFFSET)
        train_ds, scaler = minmax_scale(train_ds)
        test_ds, _ = minmax_scale(test_ds, scaler)
        return train_ds, test_ds, scaler
    if experiment == "iris":
        train_ds, test_ds = stratified_split(load_iris(), IRIS_TRAIN_FRACTION, seed=seed)
        train_ds, scaler = minmax_scale(train_ds)
        test_ds, _ = minmax_scale(test_ds, scaler)
        return train_ds, test_ds, scaler
    train_ds = regression_targets(experiment, n_train, seed=seed)
    test_ds = regression_targets(experiment, n_test, seed=seed + TEST_SEED_OFFSET)
    return train_ds, test_ds, None


def resolve_base(
    seed: int,
    base: PretrainedBase | None = None,
    base_checkpoint: str | Path | None = None,
    pretrain_config: PretrainConfig | None = None,
) -> PretrainedBase:
    """A pretrained base: as given, loaded from a checkpoint, or trained now."""
    if base is not None:
        return base
    if base_checkpoint is not None:
        ckpt = load_checkpoint(base_checkpoint)
        if ckpt.kind != KIND_BASE:
            raise ConfigurationError(
                f"{base_checkpoint}: expected a {KIND_BASE} checkpoint, found {ckpt.kind}"
            )
        return ckpt.model
    return pretrain_hybrid_base(seed=seed, config=pretrain_config)


def build_model(
    experiment: str,
    model_kind: str,
    seed: int,
    base: PretrainedBase | None = None,
    trainable_layers: int = 2,
):
    """Untrained model for one experiment; networks still need calibration."""
    if experiment not in EXPERIMENTS:
        raise ConfigurationError(f"unknown experiment {experiment!r}")
    spec = EXPERIMENTS[experiment]
    if model_kind == "qukan":
        if base is None:
            raise ConfigurationError("qukan needs a pretrained base")
        return build_network(
            list(spec.arch), base=base, seed=seed, trainable_layers=trainable_layers
        )
    if model_kind == "fqukan":
        return build_network(
            list(spec.arch), mode=MODE_FULL_QUANTUM, seed=seed,
            trainable_layers=trainable_layers,
        )
    if model_kind in ("hadamard_init", "untrained_frozen"):
        return ablation_variant(
            model_kind, arch=spec.arch, seed=seed, trainable_layers=trainable_layers
        )
    if model_kind in VQC_EMBEDDINGS:
        if spec.n_classes is None:
            raise ConfigurationError("VQC baselines only run classification experiments")
        return make_vqc(
            VQC_EMBEDDINGS[model_kind],
            n_features=spec.arch[0],
            n_classes=spec.n_classes,
            seed=seed,
        )
    raise ConfigurationError(f"unknown model kind {model_kind!r}")


# --- training runs --------------------------------------------------------------------


@dataclass(frozen=True)
class SeedOutcome:
    seed: int
    model: object
    report: MetricsReport
    train_accuracy: float | None = None
    test_accuracy: float | None = None
    distance_stats: tuple[float, float, float, float] | None = None
    pearson: float | None = None

    @property
    def final_loss(self) -> float:
        return self.report.loss_trace[-1]


@dataclass(frozen=True)
class TrainingSummary:
    experiment: str
    model_kind: str
    seeds: tuple[int, ...]
    outcomes: tuple[SeedOutcome, ...]
    mean_test_accuracy: float | None
    std_test_accuracy: float | None
    mean_distance_avg: float | None
    mean_pearson: float | None
    metrics_path: Path | None
    checkpoint_paths: tuple[Path, ...]


def train_one_seed(
    experiment: str,
    model_kind: str,
    seed: int,
    noise: float = 0.1,
    epochs: int | None = None,
    base: PretrainedBase | None = None,
    base_checkpoint: str | Path | None = None,
    train_config: TrainConfig | None = None,
    fq_pretrain_config: PretrainConfig | None = None,
    n_train: int | None = None,
    n_test: int | None = None,
    trainable_layers: int = 2,
) -> tuple[SeedOutcome, object]:
    """Train and evaluate one seeded run; returns the outcome and the scaler."""
    spec = EXPERIMENTS[experiment]
    classification = spec.n_classes is not None
    if epochs is None:
        epochs = (
            DEFAULT_CLASSIFICATION_EPOCHS if classification else DEFAULT_REGRESSION_EPOCHS
        )
    train_ds, test_ds, scaler = experiment_data(
        experiment, seed, noise=noise, n_train=n_train, n_test=n_test
    )
    if model_kind in ("qukan",):
        base = resolve_base(seed, base, base_checkpoint)
    model = build_model(experiment, model_kind, seed, base=base, trainable_layers=trainable_layers)
    if isinstance(model, QuKANNetwork):
        calibrate_ranges(model, train_ds.features, pretrain_config=fq_pretrain_config)
    config = train_config if train_config is not None else TrainConfig(lr=spec.lr)
    config = replace(config, epochs=epochs, seed=seed)
    model, report = train(model, train_ds, config, spec.loss_kind)
    if classification:
        preds = model.predict_classes(test_ds.features)
        outcome = SeedOutcome(
            seed=seed,
            model=model,
            report=report,
            train_accuracy=report.accuracy,
            test_accuracy=accuracy_score(preds, test_ds.labels),
        )
    else:
        preds = model.forward_batch(test_ds.features).ravel()
        stats = sum_abs_distance_stats(preds, test_ds.labels)
        pearson = float(np.corrcoef(preds, test_ds.labels)[0, 1])
        outcome = SeedOutcome(
            seed=seed,
            model=model,
            report=report,
            distance_stats=stats,
            pearson=pearson,
        )
    return outcome, scaler


def run_training(
    experiment: str,
    model_kind: str = "qukan",
    seeds=DEFAULT_SEEDS,
    out_dir: str | Path | None = None,
    extra_provenance: dict | None = None,
    **knobs,
) -> TrainingSummary:
    """Train over all seeds and write per-seed plus mean/std metric rows.

    Checkpoint provenance records the seed, experiment, model kind, and the
    training scaler's feature box so boundary plots can be regenerated from
    the checkpoint alone.
    """
    spec = EXPERIMENTS.get(experiment)
    if spec is None:
        raise ConfigurationError(f"unknown experiment {experiment!r}")
    classification = spec.n_classes is not None
    outcomes = []
    checkpoint_paths = []
    out = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
    for seed in seeds:
        outcome, scaler = train_one_seed(experiment, model_kind, seed, **knobs)
        outcomes.append(outcome)
        if out is not None:
            path = out / f"{experiment}_{model_kind}_seed{seed}.json"
            provenance = {"seed": seed, "experiment": experiment, "model_kind": model_kind}
            if scaler is not None:
                provenance["scaler_mins"] = [float(v) for v in scaler.mins]
                provenance["scaler_spans"] = [float(v) for v in scaler.spans]
                provenance["scaler_degenerate"] = [bool(v) for v in scaler.degenerate]
            if extra_provenance:
                provenance.update(extra_provenance)
            save_checkpoint(outcome.model, path, provenance=provenance)
            checkpoint_paths.append(path)
    if classification:
        header = ["seed", "test_accuracy", "train_accuracy", "final_loss"]
        table = [
            (o.seed, o.test_accuracy, o.train_accuracy, o.final_loss) for o in outcomes
        ]
    else:
        header = ["seed", "dist_avg", "dist_median", "dist_min", "dist_max", "pearson", "final_loss"]
        table = [(o.seed, *o.distance_stats, o.pearson, o.final_loss) for o in outcomes]
    columns = np.array([[float(v) for v in row[1:]] for row in table])
    aggregate = [
        ("mean", *columns.mean(axis=0)),
        ("std", *columns.std(axis=0)),
    ]
    metrics_path = None
    if out is not None:
        metrics_path = write_csv(
            out / f"{experiment}_{model_kind}_metrics.csv", header, table + aggregate
        )
    accs = [o.test_accuracy for o in outcomes]
    dists = [o.distance_stats[0] for o in outcomes if o.distance_stats]
    pearsons = [o.pearson for o in outcomes if o.pearson is not None]
    return TrainingSummary(
        experiment=experiment,
        model_kind=model_kind,
        seeds=tuple(seeds),
        outcomes=tuple(outcomes),
        mean_test_accuracy=float(np.mean(accs)) if classification else None,
        std_test_accuracy=float(np.std(accs)) if classification else None,
        mean_distance_avg=float(np.mean(dists)) if dists else None,
        mean_pearson=float(np.mean(pearsons)) if pearsons else None,
        metrics_path=metrics_path,
        checkpoint_paths=tuple(checkpoint_paths),
    )


# --- ablation ---------------------------------------------------------------------


@dataclass(frozen=True)
class AblationSummary:
    seeds: tuple[int, ...]
    epochs: int
    traces: dict
    final_means: dict
    table_path: Path | None

    @property
    def pretraining_gap(self) -> float:
        return self.final_means["pretrained"] - self.final_means["hadamard_init"]


def run_ablation(
    out_dir: str | Path | None = None,
    seeds=DEFAULT_SEEDS,
    noise: float = 0.1,
    epochs: int = DEFAULT_CLASSIFICATION_EPOCHS,
    n_train: int = 1000,
    base: PretrainedBase | None = None,
    base_checkpoint: str | Path | None = None,
    train_config: TrainConfig | None = None,
    variants=ABLATION_VARIANTS,
) -> AblationSummary:
    """Train the base-pretraining ablation variants with shared seeds.

    Emits one row per epoch of train accuracy, one column per
    (variant, seed) pair plus per-variant means across seeds.
    """
    for kind in variants:
        if kind not in ABLATION_VARIANTS:
            raise ConfigurationError(f"unknown ablation variant {kind!r}")
    traces = {kind: [] for kind in variants}
    for seed in seeds:
        train_ds, _, _ = experiment_data("moons", seed, noise=noise, n_train=n_train, n_test=2)
        for kind in variants:
            seed_base = resolve_base(seed, base, base_checkpoint) if kind == "pretrained" else None
            model = ablation_variant(kind, base=seed_base, seed=seed)
            calibrate_ranges(model, train_ds.features)
            if train_config is not None:
                config = train_config
            else:
                config = TrainConfig(lr=EXPERIMENTS["moons"].lr)
            config = replace(config, epochs=epochs, seed=seed)
            _, report = train(model, train_ds, config, "cross_entropy")
            traces[kind].append(report.train_accuracy_trace)
    traces = {kind: np.array(rows) for kind, rows in traces.items()}
    final_means = {kind: float(rows[:, -1].mean()) for kind, rows in traces.items()}
    table_path = None
    if out_dir is not None:
        header = ["epoch"]
        for kind in variants:
            header.extend(f"{kind}_seed{seed}" for seed in seeds)
        header.extend(f"{kind}_mean" for kind in variants)
        rows = []
        for epoch in range(epochs):
            row = [epoch + 1]
            for kind in variants:
                row.extend(traces[kind][:, epoch])
            row.extend(float(traces[kind][:, epoch].mean()) for kind in variants)
            rows.append(tuple(row))
        table_path = write_csv(Path(out_dir) / "ablation_accuracy.csv", header, rows)
    return AblationSummary(
        seeds=tuple(seeds),
        epochs=epochs,
        traces=traces,
        final_means=final_means,
        table_path=table_path,
    )


# --- decision boundaries ---------------------------------------------------------------


def boundary_grid(
    model,
    scaler,
    out_path: str | Path | None = None,
    resolution: int = BOUNDARY_RESOLUTION,
):
    """Predicted classes on a lattice over the scaler's recorded feature box.

    Lattice points are in original feature units; each is scaled before
    prediction. Returns (xs, ys, classes) with classes[i, j] the class at
    (xs[i], ys[j]); rows in the file iterate x outer, y inner.
    """
    if scaler.mins.size != 2:
        raise ConfigurationError("boundary grids need exactly 2 feature dimensions")
    lows = scaler.mins
    highs = scaler.mins + scaler.spans
    xs = np.linspace(lows[0], highs[0], resolution)
    ys = np.linspace(lows[1], highs[1], resolution)
    grid_x, grid_y = np.meshgrid(xs, ys, indexing="ij")
    points = np.column_stack([grid_x.ravel(), grid_y.ravel()])
    scaled = scaler.transform(points)
    classes = model.predict_classes(scaled).reshape(resolution, resolution)
    if out_path is not None:
        rows = (
            (points[i, 0], points[i, 1], int(classes.ravel()[i]))
            for i in range(points.shape[0])
        )
        write_csv(out_path, ["x", "y", "class"], rows)
    return xs, ys, classes
