"""B-spline bases via the Cox-de-Boor recursion, plus input discretization.

The degree-0 base case treats knot intervals as half-open ``[t_i, t_{i+1})``
except at the right end of the knot vector, where the interval is closed so
that a clamped basis evaluates to 1 at the right boundary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError


@dataclass(frozen=True)
class SplineBasis:
    """A family of ``n_basis`` B-splines of the given degree over a knot vector."""

    degree: int
    knots: np.ndarray

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=float)
        if np.any(np.diff(knots) < 0):
            raise DomainError("knot vector must be nondecreasing")
        if len(knots) < self.degree + 2:
            raise DomainError("too few knots for the requested degree")
        object.__setattr__(self, "knots", knots)

    @property
    def n_basis(self) -> int:
        return len(self.knots) - self.degree - 1

    @property
    def support(self) -> tuple[float, float]:
        """Interval on which the basis forms a partition of unity."""
        return float(self.knots[self.degree]), float(self.knots[self.n_basis])


def clamped_uniform_basis(n_basis: int, degree: int, x_min: float = 0.0, x_max: float = 1.0) -> SplineBasis:
    """Clamped knot vector with uniformly spaced interior knots on [x_min, x_max].

    The default 4-spline degree-2 basis on [0, 1] has knots
    [0, 0, 0, 0.5, 1, 1, 1].
    """
    if n_basis < degree + 1:
        raise DomainError("need at least degree+1 basis functions for a clamped basis")
    if not x_max > x_min:
        raise DomainError("x_max must exceed x_min")
    n_interior = n_basis - degree - 1
    interior = np.linspace(x_min, x_max, n_interior + 2)[1:-1]
    knots = np.concatenate([[x_min] * (degree + 1), interior, [x_max] * (degree + 1)])
    return SplineBasis(degree, knots)


def cox_de_boor(basis: SplineBasis, i: int, x: float) -> float:
    """Evaluate the i-th basis function at x by the Cox-de-Boor recursion.

    Out-of-support x returns 0; the 0/0 convention maps degenerate terms
    to 0.
    """
    if not 0 <= i < basis.n_basis:
        raise DomainError(f"basis index {i} out of range")
    return _cdb(basis.knots, basis.degree, i, float(x))


def _cdb(t: np.ndarray, p: int, i: int, x: float) -> float:
    if p == 0:
        if t[i] <= x < t[i + 1]:
            return 1.0
        # close the final interval on the right
        if t[i] < t[i + 1] == t[-1] and x == t[-1]:
            return 1.0
        return 0.0
    left = 0.0
    if t[i + p] != t[i]:
        left = (x - t[i]) / (t[i + p] - t[i]) * _cdb(t, p - 1, i, x)
    right = 0.0
    if t[i + p + 1] != t[i + 1]:
        right = (t[i + p + 1] - x) / (t[i + p + 1] - t[i + 1]) * _cdb(t, p - 1, i + 1, x)
    return left + right


@dataclass(frozen=True)
class DiscretizationGrid:
    """``2**n_position_qubits`` equally spaced points spanning [x_min, x_max]."""

    x_min: float
    x_max: float
    n_position_qubits: int

    def __post_init__(self):
        if not self.x_max > self.x_min:
            raise DomainError("grid needs x_max > x_min")
        if self.n_position_qubits < 1:
            raise DomainError("grid needs at least one position qubit")

    @property
    def n_points(self) -> int:
        return 1 << self.n_position_qubits

    @property
    def delta(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return self.x_min + np.arange(self.n_points) * self.delta


def nearest_grid_index(grid: DiscretizationGrid, x) -> int | np.ndarray:
    """Index of the grid point closest to x.

    Ties break toward the lower index and out-of-range inputs clamp to
    the boundary points. Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("grid lookups need finite inputs")
    t = (x - grid.x_min) / grid.delta
    k = np.ceil(t - 0.5).astype(int)
    k = np.clip(k, 0, grid.n_points - 1)
    return int(k) if k.ndim == 0 else k


def basis_matrix(basis: SplineBasis, grid: DiscretizationGrid) -> np.ndarray:
    """Matrix M[i, k] = B_i(points[k]) of basis values on the grid.

    Raises a configuration error if any basis function vanishes on every
    grid point, since such a row cannot be normalized into a probability
    distribution.
    """
    points = grid.points
    M = np.array([[cox_de_boor(basis, i, x) for x in points] for i in range(basis.n_basis)])
    if np.any(M.sum(axis=1) == 0.0):
        raise ConfigurationError("a basis function is zero at every grid point")
    return M


DEFAULT_N_BASIS = 4
DEFAULT_DEGREE = 2
DEFAULT_POSITION_QUBITS = 4


def default_basis_matrix(grid: DiscretizationGrid | None = None) -> np.ndarray:
    """Default 4-spline degree-2 basis sampled on a 16-point grid.

    B-spline values are invariant under affine rescaling of the domain as
    long as the knots are rescaled with it, so this matrix is shared by
    every grid regardless of its bounds.
    """
    if grid is None:
        grid = DiscretizationGrid(0.0, 1.0, DEFAULT_POSITION_QUBITS)
    basis = clamped_uniform_basis(DEFAULT_N_BASIS, DEFAULT_DEGREE, grid.x_min, grid.x_max)
    return basis_matrix(basis, grid)
