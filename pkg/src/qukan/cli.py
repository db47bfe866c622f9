"""Command-line front end: pretrain, train, eval, boundary, ablate.

Configuration comes from an INI file whose sections mirror module names
([cli], [datasets], [optim], [born_machine], [network]); flags override
file values. Unknown sections or keys are rejected. Every command writes
the exact resolved configuration next to its outputs, and its hash goes
into checkpoint provenance.

Exit codes: 0 on success, 2 for configuration problems, 3 for missing
files or checkpoints, 4 when training fails to converge.

Typical session:

    qukan pretrain --seed 0 --out runs/pretrain
    qukan train moons --model qukan --out runs/moons
    qukan boundary runs/moons/moons_qukan_seed0.json --out runs/fig5
    qukan ablate --epochs 20 --out runs/fig7
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .baselines import VQCModel
from .born_machine import PretrainConfig
from .checkpoints import KIND_BASE, load_checkpoint
from .datasets import MinMaxScaler
from .errors import (
    ArtifactError,
    ConfigurationError,
    DomainError,
    ParseError,
    TrainingError,
)
from .network import QuKANNetwork
from .optim import TrainConfig, accuracy_score, sum_abs_distance_stats
from .workflows import (
    BOUNDARY_RESOLUTION,
    DEFAULT_SEEDS,
    EXPERIMENTS,
    MODEL_KINDS,
    boundary_grid,
    experiment_data,
    run_ablation,
    run_pretraining,
    run_training,
    write_csv,
)

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_MISSING_ARTIFACT = 3
EXIT_TRAINING_ERROR = 4

ENV_OUT_ROOT = "QUKAN_OUT_ROOT"
DEFAULT_OUT_ROOT = "qukan_runs"
RESOLVED_CONFIG_NAME = "resolved_config.ini"


@dataclass(frozen=True)
class RunConfig:
    """All command parameters after merging defaults, config file, and flags."""

    experiment: str = "moons"
    model: str = "qukan"
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    out: str | None = None
    base_checkpoint: str | None = None
    checkpoint: str | None = None
    noise: float = 0.1
    n_train: int | None = None
    n_test: int | None = None
    epochs: int | None = None
    batch_size: int = 32
    lr: float | None = None  # resolved to the experiment default below
    fd_step: float = 1e-3
    fd_step_weights: float = 1e-4
    pretrain_max_iters: int = 500
    pretrain_lr: float = 0.1
    pretrain_tol: float = 1e-6
    tvd_threshold: float = 0.05
    n_label: int = 2
    n_position: int = 4
    trainable_layers: int = 2

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.experiment not in EXPERIMENTS:
            raise ConfigurationError(
                f"unknown experiment {self.experiment!r}; choose from {sorted(EXPERIMENTS)}"
            )
        if self.lr is None:
            object.__setattr__(self, "lr", EXPERIMENTS[self.experiment].lr)
        if self.model not in MODEL_KINDS:
            raise ConfigurationError(
                f"unknown model {self.model!r}; choose from {sorted(MODEL_KINDS)}"
            )
        if not self.seeds:
            raise ConfigurationError("need at least one seed")
        if self.noise < 0:
            raise ConfigurationError("noise must be nonnegative")
        if self.epochs is not None and self.epochs < 0:
            raise ConfigurationError("epochs must be >= 0")
        for name in ("n_train", "n_test"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ConfigurationError(f"{name} must be >= 1")
        if self.n_label < 1 or self.n_position < 1:
            raise ConfigurationError("n_label and n_position must be >= 1")
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")
        if self.lr <= 0 or self.pretrain_lr <= 0:
            raise ConfigurationError("learning rates must be positive")
        if self.fd_step <= 0 or self.fd_step_weights <= 0:
            raise ConfigurationError("finite-difference steps must be positive")
        if self.pretrain_max_iters < 0:
            raise ConfigurationError("max_iters must be nonnegative")
        if self.pretrain_tol < 0:
            raise ConfigurationError("tol must be nonnegative")
        if self.tvd_threshold <= 0:
            raise ConfigurationError("tvd_threshold must be positive")
        if self.trainable_layers < 0:
            raise ConfigurationError("trainable_layers must be nonnegative")


# --- config file parsing ---------------------------------------------------------


def _parse_seeds(text) -> tuple[int, ...]:
    parts = str(text).replace(",", " ").split()
    if not parts:
        raise ValueError("need at least one seed")
    return tuple(int(p) for p in parts)


def _opt_int(text) -> int | None:
    text = str(text).strip()
    return None if text.lower() in ("", "none") else int(text)


def _opt_str(text) -> str | None:
    text = str(text).strip()
    return None if text.lower() in ("", "none") else text


def _opt_float(text) -> float | None:
    text = str(text).strip()
    return None if text.lower() in ("", "none") else float(text)


# (section, key) -> (RunConfig field, parser). Section names mirror the
# modules whose knobs they carry.
_SCHEMA = {
    "cli": {
        "experiment": ("experiment", lambda s: str(s).strip()),
        "model": ("model", lambda s: str(s).strip()),
        "seeds": ("seeds", _parse_seeds),
        "out": ("out", _opt_str),
        "base_checkpoint": ("base_checkpoint", _opt_str),
        "checkpoint": ("checkpoint", _opt_str),
    },
    "datasets": {
        "noise": ("noise", float),
        "n_train": ("n_train", _opt_int),
        "n_test": ("n_test", _opt_int),
    },
    "optim": {
        "epochs": ("epochs", _opt_int),
        "batch_size": ("batch_size", int),
        "lr": ("lr", _opt_float),
        "fd_step": ("fd_step", float),
        "fd_step_weights": ("fd_step_weights", float),
    },
    "born_machine": {
        "max_iters": ("pretrain_max_iters", int),
        "lr": ("pretrain_lr", float),
        "tol": ("pretrain_tol", float),
        "tvd_threshold": ("tvd_threshold", float),
        "n_label": ("n_label", int),
        "n_position": ("n_position", int),
    },
    "network": {
        "trainable_layers": ("trainable_layers", int),
    },
}


def load_config_file(path: str | Path) -> dict:
    """Parse an INI config into RunConfig field overrides; reject unknown keys."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ParseError(f"{path}: {exc}") from None
    values = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigurationError(f"{path}: unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigurationError(f"{path}: unknown key {key!r} in [{section}]")
            field_name, parse = _SCHEMA[section][key]
            try:
                values[field_name] = parse(raw)
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{path}: [{section}] {key}: {exc}") from None
    return values


def _render(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, tuple):
        return " ".join(str(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_text(config: RunConfig) -> str:
    """Canonical INI rendering of a resolved config; parses back identically."""
    lines = []
    for section, keys in _SCHEMA.items():
        lines.append(f"[{section}]")
        for key, (field_name, _) in keys.items():
            lines.append(f"{key} = {_render(getattr(config, field_name))}")
        lines.append("")
    return "\n".join(lines)


def config_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:12]


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the config file, and command-line flag overrides."""
    values = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    if getattr(args, "experiment", None):
        values["experiment"] = args.experiment
    if getattr(args, "checkpoint_path", None):
        values["checkpoint"] = args.checkpoint_path
    if args.seed is not None:
        try:
            values["seeds"] = _parse_seeds(args.seed)
        except ValueError as exc:
            raise ConfigurationError(f"--seed: {exc}") from None
    if args.epochs is not None:
        values["epochs"] = args.epochs
    if args.noise is not None:
        values["noise"] = args.noise
    if args.model is not None:
        values["model"] = args.model
    if args.out is not None:
        values["out"] = args.out
    return RunConfig(**values)


# --- shared command plumbing -------------------------------------------------------


def out_root() -> Path:
    return Path(os.environ.get(ENV_OUT_ROOT, DEFAULT_OUT_ROOT))


def output_dir(config: RunConfig, verb: str) -> Path:
    return Path(config.out) if config.out is not None else out_root() / verb


def _prepare_out(config: RunConfig, verb: str) -> tuple[Path, str]:
    """Create the output directory, echo the resolved config, return its hash."""
    out = output_dir(config, verb)
    out.mkdir(parents=True, exist_ok=True)
    text = config_text(config)
    (out / RESOLVED_CONFIG_NAME).write_text(text, encoding="utf-8")
    return out, config_hash(text)


def _train_config(config: RunConfig) -> TrainConfig:
    return TrainConfig(
        batch_size=config.batch_size,
        lr=config.lr,
        fd_step=config.fd_step,
        fd_step_weights=config.fd_step_weights,
    )


def _pretrain_config(config: RunConfig) -> PretrainConfig:
    return PretrainConfig(
        max_iters=config.pretrain_max_iters,
        lr=config.pretrain_lr,
        tol=config.pretrain_tol,
    )


def _base_checkpoint_path(config: RunConfig) -> Path:
    if config.base_checkpoint is not None:
        return Path(config.base_checkpoint)
    return out_root() / "pretrain" / f"base_seed{config.seeds[0]}.json"


def _require_base_checkpoint(config: RunConfig) -> Path:
    path = _base_checkpoint_path(config)
    if not path.exists():
        raise ArtifactError(
            f"no pretrained base checkpoint at {path}; run 'qukan pretrain' first "
            "or point [cli] base_checkpoint at an existing one"
        )
    return path


def _load_trained_model(config: RunConfig):
    """(model, provenance, stem) from the configured trained checkpoint."""
    if config.checkpoint is None:
        raise ConfigurationError(
            "this command needs a trained checkpoint: pass it as a positional "
            "argument or set [cli] checkpoint"
        )
    ckpt = load_checkpoint(config.checkpoint)
    if ckpt.kind == KIND_BASE:
        raise ConfigurationError(
            f"{config.checkpoint} is a pretrained base, not a trained model"
        )
    return ckpt.model, ckpt.provenance, Path(config.checkpoint).stem


def _check_feature_width(model, experiment: str, source: str) -> None:
    expected = EXPERIMENTS[experiment].arch[0]
    if isinstance(model, QuKANNetwork):
        actual = model.layers[0].in_width
    else:
        actual = model.n_features
    if actual != expected:
        raise ConfigurationError(
            f"{source}: model takes {actual} features but {experiment} has {expected}"
        )


# --- commands ----------------------------------------------------------------------


def cmd_pretrain(config: RunConfig) -> int:
    """Pretrain the spline-superposition base for each seed; nonzero exit if
    any run's final TVD misses the convergence threshold."""
    pre_config = _pretrain_config(config)
    out, digest = _prepare_out(config, "pretrain")
    failures = []
    for seed in config.seeds:
        summary = run_pretraining(
            out,
            seed=seed,
            n_label=config.n_label,
            n_position=config.n_position,
            config=pre_config,
            extra_provenance={"config_hash": digest},
        )
        print(
            f"seed {seed}: TVD {summary.result.tvd:.4f} after "
            f"{summary.result.n_iters} iterations -> {summary.checkpoint_path}"
        )
        if summary.result.tvd >= config.tvd_threshold:
            failures.append((seed, summary.result.tvd, summary.trace_path))
    if failures:
        for seed, tvd, trace in failures:
            print(
                f"seed {seed}: TVD {tvd:.4f} did not reach {config.tvd_threshold}; "
                f"loss trace at {trace}",
                file=sys.stderr,
            )
        return EXIT_TRAINING_ERROR
    return EXIT_OK


def cmd_train(config: RunConfig) -> int:
    """Train the configured model over all seeds and aggregate the metrics.

    Hybrid networks load the shared pretrained base from a checkpoint;
    fully-quantum bases are grid-specific, so they are pretrained during
    calibration instead of loaded.
    """
    base_checkpoint = None
    if config.model == "qukan":
        base_checkpoint = _require_base_checkpoint(config)
    out, digest = _prepare_out(config, "train")
    summary = run_training(
        config.experiment,
        config.model,
        seeds=config.seeds,
        out_dir=out,
        extra_provenance={"config_hash": digest},
        noise=config.noise,
        epochs=config.epochs,
        n_train=config.n_train,
        n_test=config.n_test,
        base_checkpoint=base_checkpoint,
        train_config=_train_config(config),
        fq_pretrain_config=_pretrain_config(config),
        trainable_layers=config.trainable_layers,
    )
    for o in summary.outcomes:
        if o.test_accuracy is not None:
            print(f"seed {o.seed}: test accuracy {o.test_accuracy:.4f}")
        else:
            print(
                f"seed {o.seed}: avg |pred - target| {o.distance_stats[0]:.6f}, "
                f"pearson {o.pearson:.4f}"
            )
    if summary.mean_test_accuracy is not None:
        print(
            f"mean test accuracy {summary.mean_test_accuracy:.4f} "
            f"+/- {summary.std_test_accuracy:.4f}"
        )
    else:
        print(
            f"mean avg |pred - target| {summary.mean_distance_avg:.6f}, "
            f"mean pearson {summary.mean_pearson:.4f}"
        )
    print(f"metrics written to {summary.metrics_path}")
    return EXIT_OK


def cmd_eval(config: RunConfig) -> int:
    """Evaluate a trained checkpoint on a freshly generated test set."""
    model, provenance, stem = _load_trained_model(config)
    experiment = provenance.get("experiment", config.experiment)
    if experiment not in EXPERIMENTS:
        raise ConfigurationError(f"checkpoint names unknown experiment {experiment!r}")
    spec = EXPERIMENTS[experiment]
    if isinstance(model, VQCModel) and spec.n_classes is None:
        raise ConfigurationError(f"{config.checkpoint}: VQC models cannot run {experiment}")
    _check_feature_width(model, experiment, str(config.checkpoint))
    seed = int(provenance.get("seed", config.seeds[0]))
    _, test_ds, _ = experiment_data(
        experiment, seed, noise=config.noise, n_train=config.n_train, n_test=config.n_test
    )
    out, _ = _prepare_out(config, "eval")
    if spec.n_classes is not None:
        acc = accuracy_score(model.predict_classes(test_ds.features), test_ds.labels)
        header = ["seed", "test_accuracy", "n_test"]
        row = (seed, acc, test_ds.n)
        print(f"{experiment}: test accuracy {acc:.4f} on {test_ds.n} points (seed {seed})")
    else:
        preds = model.forward_batch(test_ds.features).ravel()
        stats = sum_abs_distance_stats(preds, test_ds.labels)
        pearson = float(np.corrcoef(preds, test_ds.labels)[0, 1])
        header = ["seed", "dist_avg", "dist_median", "dist_min", "dist_max", "pearson"]
        row = (seed, *stats, pearson)
        print(
            f"{experiment}: avg |pred - target| {stats[0]:.6f}, "
            f"pearson {pearson:.4f} (seed {seed})"
        )
    path = write_csv(out / f"{stem}_eval.csv", header, [row])
    print(f"metrics written to {path}")
    return EXIT_OK


def cmd_boundary(config: RunConfig) -> int:
    """Export a decision-boundary lattice for a trained two-feature model.

    The lattice covers the feature box recorded in the checkpoint's
    provenance, in original (unscaled) units.
    """
    model, provenance, stem = _load_trained_model(config)
    if "scaler_mins" not in provenance:
        raise ConfigurationError(
            f"{config.checkpoint}: no feature box recorded; boundary grids need a "
            "checkpoint written by a classification training run"
        )
    scaler = MinMaxScaler(
        mins=np.array(provenance["scaler_mins"], dtype=float),
        spans=np.array(provenance["scaler_spans"], dtype=float),
        degenerate=np.array(provenance["scaler_degenerate"], dtype=bool),
    )
    if scaler.mins.size != 2:
        raise ConfigurationError(
            f"{config.checkpoint}: boundary grids need a 2-feature model"
        )
    _check_feature_width(model, provenance.get("experiment", config.experiment),
                         str(config.checkpoint))
    out, _ = _prepare_out(config, "boundary")
    path = out / f"{stem}_boundary.csv"
    boundary_grid(model, scaler, out_path=path)
    print(
        f"{BOUNDARY_RESOLUTION}x{BOUNDARY_RESOLUTION} boundary grid written to {path}"
    )
    return EXIT_OK


def cmd_ablate(config: RunConfig) -> int:
    """Train the base-pretraining ablation variants and tabulate accuracy per epoch."""
    base_checkpoint = _require_base_checkpoint(config)
    out, _ = _prepare_out(config, "ablate")
    epochs = config.epochs if config.epochs is not None else 20
    n_train = config.n_train if config.n_train is not None else 1000
    summary = run_ablation(
        out_dir=out,
        seeds=config.seeds,
        noise=config.noise,
        epochs=epochs,
        n_train=n_train,
        base_checkpoint=base_checkpoint,
        train_config=_train_config(config),
    )
    for kind, mean in summary.final_means.items():
        print(f"{kind}: final train accuracy {mean:.4f} (mean over seeds)")
    print(f"pretraining gap {summary.pretraining_gap:+.4f}")
    print(f"accuracy table written to {summary.table_path}")
    return EXIT_OK


# --- entry point ---------------------------------------------------------------------


COMMANDS = {
    "pretrain": cmd_pretrain,
    "train": cmd_train,
    "eval": cmd_eval,
    "boundary": cmd_boundary,
    "ablate": cmd_ablate,
}

_VERB_HELP = {
    "pretrain": "pretrain the shared spline-superposition base",
    "train": "train a model over all seeds and aggregate metrics",
    "eval": "evaluate a trained checkpoint on a fresh test set",
    "boundary": "export a decision-boundary grid from a trained checkpoint",
    "ablate": "compare pretrained, hadamard_init, and untrained_frozen variants",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qukan",
        description="Quantum Kolmogorov-Arnold networks: pretraining, "
        "benchmarks, and result export.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for verb, help_text in _VERB_HELP.items():
        p = sub.add_parser(verb, help=help_text)
        if verb == "train":
            p.add_argument(
                "experiment", nargs="?", default=None,
                help="moons | iris | linear | log_ratio (default: config file or moons)",
            )
        if verb in ("eval", "boundary"):
            p.add_argument(
                "checkpoint_path", nargs="?", default=None, metavar="checkpoint",
                help="trained model checkpoint (or set [cli] checkpoint)",
            )
        p.add_argument("--config", metavar="PATH", default=None,
                       help="INI config file; flags override its values")
        p.add_argument("--seed", default=None,
                       help="seed or comma-separated seed list (default: 0,1,2,3)")
        p.add_argument("--epochs", type=int, default=None)
        p.add_argument("--noise", type=float, default=None,
                       help="moons noise level (default: 0.1)")
        p.add_argument("--model", default=None,
                       help="qukan | fqukan | vqc_* | hadamard_init | untrained_frozen")
        p.add_argument("--out", default=None,
                       help=f"output directory (default: ${ENV_OUT_ROOT}/<command>)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args)
        return COMMANDS[args.command](config)
    except TrainingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRAINING_ERROR
    except ArtifactError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_ARTIFACT
    except (ConfigurationError, DomainError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
