"""Benchmark datasets: two moons, Iris, and two closed-form regression targets.

Gaussian noise is drawn via Box-Muller from PCG64 uniforms rather than
through `Generator.normal`, so the exact sample stream is pinned down by
this module and reproduces anywhere numpy does.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ArtifactError, DomainError, ParseError

IRIS_CLASS_NAMES = ("setosa", "versicolor", "virginica")


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus one label (class index or real target) per row."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        features = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels)
        if features.ndim != 2:
            raise DomainError("features must be a 2-D array")
        if labels.shape != (features.shape[0],):
            raise DomainError(
                f"label count {labels.shape} does not match {features.shape[0]} rows"
            )
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def feature_ranges(self) -> tuple[tuple[float, float], ...]:
        return tuple(
            (float(col.min()), float(col.max())) for col in self.features.T
        )


def _gaussian_pairs(rng: np.random.Generator, n: int) -> tuple[np.ndarray, np.ndarray]:
    # Box-Muller; 1 - u keeps the log argument in (0, 1].
    u1 = 1.0 - rng.uniform(size=n)
    u2 = rng.uniform(size=n)
    radius = np.sqrt(-2.0 * np.log(u1))
    return radius * np.cos(2.0 * np.pi * u2), radius * np.sin(2.0 * np.pi * u2)


def make_moons(n: int, noise: float = 0.1, seed: int = 0) -> Dataset:
    """Two interleaved half-circles, labels 0 (outer) and 1 (inner).

    The outer moon traces (cos t, sin t) and the inner one
    (1 - cos t, 0.5 - sin t) for t evenly spaced over [0, pi]; isotropic
    Gaussian noise of the given standard deviation is added to both
    coordinates.
    """
    if n < 2:
        raise DomainError("need at least 2 samples")
    if noise < 0:
        raise DomainError("noise standard deviation must be nonnegative")
    n_outer = (n + 1) // 2
    n_inner = n // 2
    t_outer = np.linspace(0.0, np.pi, n_outer)
    t_inner = np.linspace(0.0, np.pi, n_inner)
    features = np.empty((n, 2))
    features[:n_outer, 0] = np.cos(t_outer)
    features[:n_outer, 1] = np.sin(t_outer)
    features[n_outer:, 0] = 1.0 - np.cos(t_inner)
    features[n_outer:, 1] = 0.5 - np.sin(t_inner)
    rng = np.random.default_rng(seed)
    dx, dy = _gaussian_pairs(rng, n)
    features[:, 0] += noise * dx
    features[:, 1] += noise * dy
    labels = np.concatenate([np.zeros(n_outer, dtype=int), np.ones(n_inner, dtype=int)])
    return Dataset(features, labels)


def default_iris_path() -> Path:
    return Path(str(resources.files("qukan") / "resources" / "iris.csv"))


def load_iris(path: str | Path | None = None) -> Dataset:
    """Parse the 150-row Iris file: 4 numeric columns plus a species name."""
    path = default_iris_path() if path is None else Path(path)
    if not path.exists():
        raise ArtifactError(f"iris file not found: {path}")
    rows = []
    labels = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != 5:
                raise ParseError(
                    f"{path}: line {lineno}: expected 5 fields, got {len(fields)}"
                )
            try:
                rows.append([float(v) for v in fields[:4]])
            except ValueError:
                raise ParseError(f"{path}: line {lineno}: non-numeric feature") from None
            name = fields[4].strip().lower()
            if name not in IRIS_CLASS_NAMES:
                raise ParseError(f"{path}: line {lineno}: unknown class {fields[4]!r}")
            labels.append(IRIS_CLASS_NAMES.index(name))
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return Dataset(np.array(rows), np.array(labels, dtype=int))


@dataclass(frozen=True)
class MinMaxScaler:
    """Per-dimension affine map to [0, 1], invertible on the fit range.

    Degenerate (constant) dimensions are flagged and mapped to 0.5; their
    inverse restores the constant.
    """

    mins: np.ndarray
    spans: np.ndarray
    degenerate: np.ndarray

    @classmethod
    def fit(cls, features: np.ndarray) -> "MinMaxScaler":
        features = np.asarray(features, dtype=float)
        mins = features.min(axis=0)
        spans = features.max(axis=0) - mins
        degenerate = spans == 0.0
        return cls(mins=mins, spans=np.where(degenerate, 1.0, spans), degenerate=degenerate)

    def transform(self, features: np.ndarray) -> np.ndarray:
        scaled = (np.asarray(features, dtype=float) - self.mins) / self.spans
        scaled[:, self.degenerate] = 0.5
        return scaled

    def inverse(self, features: np.ndarray) -> np.ndarray:
        raw = np.asarray(features, dtype=float) * self.spans + self.mins
        raw[:, self.degenerate] = self.mins[self.degenerate]
        return raw


def minmax_scale(ds: Dataset, scaler: MinMaxScaler | None = None) -> tuple[Dataset, MinMaxScaler]:
    """Scale features into [0, 1] per dimension.

    Pass a previously fit scaler to reuse training-set parameters on test
    data; out-of-range test points then land outside [0, 1] unclamped
    (downstream grids clamp at lookup time).
    """
    if scaler is None:
        scaler = MinMaxScaler.fit(ds.features)
    return Dataset(scaler.transform(ds.features), ds.labels), scaler


def linear_target(x: np.ndarray) -> np.ndarray:
    """f(x) = 2*x0 - 3*x1 + 1 on [0, 1]^2."""
    x = np.asarray(x, dtype=float)
    return 2.0 * x[..., 0] - 3.0 * x[..., 1] + 1.0


def log_ratio_target(x: np.ndarray) -> np.ndarray:
    """f(x) = ln(x0 / x1) on [0.05, 1]^2."""
    x = np.asarray(x, dtype=float)
    return np.log(x[..., 0] / x[..., 1])


REGRESSION_KINDS = ("linear", "log_ratio")


def regression_targets(kind: str, n: int, seed: int = 0) -> Dataset:
    """Sample a regression benchmark: uniform inputs, closed-form targets."""
    if kind not in REGRESSION_KINDS:
        raise DomainError(f"unknown regression kind {kind!r}")
    if n < 1:
        raise DomainError("need at least 1 sample")
    rng = np.random.default_rng(seed)
    if kind == "linear":
        features = rng.uniform(0.0, 1.0, size=(n, 2))
        targets = linear_target(features)
    else:
        features = rng.uniform(0.05, 1.0, size=(n, 2))
        targets = log_ratio_target(features)
    return Dataset(features, targets)


def stratified_split(ds: Dataset, train_fraction: float, seed: int = 0) -> tuple[Dataset, Dataset]:
    """Per-class proportional split with a seeded shuffle."""
    if not 0.0 < train_fraction < 1.0:
        raise DomainError("train_fraction must lie strictly between 0 and 1")
    rng = np.random.default_rng(seed)
    train_idx = []
    test_idx = []
    for value in np.unique(ds.labels):
        members = np.flatnonzero(ds.labels == value)
        if members.size < 2:
            raise DomainError(f"class {value!r} has fewer than 2 members")
        members = rng.permutation(members)
        n_train = int(round(train_fraction * members.size))
        n_train = min(max(n_train, 1), members.size - 1)
        train_idx.append(members[:n_train])
        test_idx.append(members[n_train:])
    train_idx = rng.permutation(np.concatenate(train_idx))
    test_idx = rng.permutation(np.concatenate(test_idx))
    return (
        Dataset(ds.features[train_idx], ds.labels[train_idx]),
        Dataset(ds.features[test_idx], ds.labels[test_idx]),
    )


def export_csv(ds: Dataset, path: str | Path) -> None:
    """Write the dataset as comma-separated text with a header line."""
    header = ",".join(f"x{i}" for i in range(ds.n_features)) + ",label"
    integral = np.issubdtype(ds.labels.dtype, np.integer)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row, label in zip(ds.features, ds.labels):
            text = ",".join(repr(float(v)) for v in row)
            fh.write(f"{text},{int(label) if integral else repr(float(label))}\n")
