"""Grids, curves, kernels and the quadrature inner products built on them.

Every function on the interval I is stored as its samples on a :class:`Grid`;
every integral is a weighted sum with the grid's quadrature weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import GridMismatchError, NotPSDError
from .tolerances import PSD_ATOL, WEIGHT_SUM_RTOL

__all__ = [
    "Grid",
    "Curve",
    "Kernel",
    "Dataset",
    "trapezoid_weights",
    "trapezoid_grid",
    "uniform_grid",
    "inner_product",
    "l2_norm",
    "apply_kernel",
    "k_bilinear",
    "k_norm",
    "center",
]


def _frozen(a: ArrayLike, ndim: int) -> NDArray[np.float64]:
    arr = np.array(a, dtype=np.float64, copy=True)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def trapezoid_weights(points: ArrayLike) -> NDArray[np.float64]:
    """Composite trapezoid weights for an increasing set of abscissae."""
    t = np.asarray(points, dtype=np.float64)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("need at least two abscissae")
    h = np.diff(t)
    w = np.zeros_like(t)
    w[:-1] += h / 2
    w[1:] += h / 2
    return w


@dataclass(frozen=True, eq=False)
class Grid:
    """Abscissae on the interval together with positive quadrature weights."""

    points: NDArray[np.float64]
    weights: NDArray[np.float64]
    interval: tuple[float, float]

    def __post_init__(self):
        points = _frozen(self.points, 1)
        weights = _frozen(self.weights, 1)
        lower, upper = (float(v) for v in self.interval)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "interval", (lower, upper))

        if points.size < 2 or points.size != weights.size:
            raise ValueError("points and weights must have the same length >= 2")
        if not np.all(np.isfinite(points)) or not np.all(np.isfinite(weights)):
            raise ValueError("grid values must be finite")
        if not upper > lower:
            raise ValueError("interval must have positive length")
        if np.any(np.diff(points) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if points[0] < lower or points[-1] > upper:
            raise ValueError("grid points must lie inside the interval")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")
        length = upper - lower
        if abs(weights.sum() - length) > WEIGHT_SUM_RTOL * length:
            raise ValueError(
                f"weights sum to {weights.sum()!r}, expected interval length {length!r}"
            )

    @property
    def size(self) -> int:
        return self.points.size

    def __len__(self) -> int:
        return self.points.size

    def matches(self, other: "Grid") -> bool:
        if self is other:
            return True
        return (
            self.interval == other.interval
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.weights, other.weights)
        )

    def curve(self, values: ArrayLike) -> "Curve":
        return Curve(self, values)

    def evaluate(self, func) -> "Curve":
        """Sample a vectorized callable on the grid."""
        return Curve(self, func(self.points))


def trapezoid_grid(points: ArrayLike) -> Grid:
    """Grid on ``[points[0], points[-1]]`` with trapezoid weights."""
    t = np.asarray(points, dtype=np.float64)
    return Grid(t, trapezoid_weights(t), (t[0], t[-1]))


def uniform_grid(m: int, lower: float = 0.0, upper: float = 1.0) -> Grid:
    """``m`` equispaced points on ``[lower, upper]`` with trapezoid weights."""
    return trapezoid_grid(np.linspace(lower, upper, m))


@dataclass(frozen=True, eq=False)
class Curve:
    """A function on the interval, stored as its grid samples."""

    grid: Grid
    values: NDArray[np.float64]

    def __post_init__(self):
        values = _frozen(self.values, 1)
        if values.size != self.grid.size:
            raise ValueError(f"curve has {values.size} values, grid has {self.grid.size}")
        object.__setattr__(self, "values", values)

    def _other(self, other) -> NDArray[np.float64]:
        if isinstance(other, Curve):
            _check_grids(self.grid, other.grid)
            return other.values
        return other

    def __add__(self, other):
        return Curve(self.grid, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Curve(self.grid, self.values - self._other(other))

    def __rsub__(self, other):
        return Curve(self.grid, self._other(other) - self.values)

    def __mul__(self, scalar: float):
        return Curve(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar: float):
        return Curve(self.grid, self.values / float(scalar))

    def __neg__(self):
        return Curve(self.grid, -self.values)

    @classmethod
    def zeros(cls, grid: Grid) -> "Curve":
        return cls(grid, np.zeros(grid.size))


@dataclass(frozen=True, eq=False)
class Kernel:
    """A bivariate function on I x I; ``values[i, j] = K(t_i, t_j)``."""

    grid: Grid
    values: NDArray[np.float64]

    def __post_init__(self):
        values = _frozen(self.values, 2)
        m = self.grid.size
        if values.shape != (m, m):
            raise ValueError(f"kernel shape {values.shape} does not match grid size {m}")
        object.__setattr__(self, "values", values)

    def hs_norm(self) -> float:
        """Quadrature version of (int int K^2)^(1/2)."""
        w = self.grid.weights
        return float(np.sqrt(np.einsum("i,ij,j->", w, self.values**2, w)))

    def trace(self) -> float:
        """Quadrature version of int K(t, t) dt."""
        return float(self.grid.weights @ np.diag(self.values))

    def is_symmetric(self, rtol: float = 1e-12) -> bool:
        v = self.values
        scale = np.max(np.abs(v)) if v.size else 0.0
        return bool(np.max(np.abs(v - v.T)) <= rtol * scale)


@dataclass(frozen=True, eq=False)
class Dataset:
    """``n`` curves on a shared grid with their scalar responses.

    The curves are held as an ``(n, m)`` array ``X``; :attr:`curves` gives the
    per-observation :class:`Curve` view.
    """

    grid: Grid
    X: NDArray[np.float64]
    y: NDArray[np.float64]

    def __post_init__(self):
        X = _frozen(self.X, 2)
        y = _frozen(self.y, 1)
        if X.shape[1] != self.grid.size:
            raise ValueError(f"curves have {X.shape[1]} samples, grid has {self.grid.size}")
        if X.shape[0] != y.size:
            raise ValueError(f"{X.shape[0]} curves but {y.size} responses")
        if y.size < 2:
            raise ValueError("a dataset needs at least two observations")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_curves(cls, curves: Sequence[Curve], responses: ArrayLike) -> "Dataset":
        if not curves:
            raise ValueError("no curves given")
        grid = curves[0].grid
        for c in curves[1:]:
            _check_grids(grid, c.grid)
        return cls(grid, np.stack([c.values for c in curves]), responses)

    @property
    def n(self) -> int:
        return self.y.size

    @property
    def curves(self) -> list[Curve]:
        return [Curve(self.grid, row) for row in self.X]

    @property
    def responses(self) -> NDArray[np.float64]:
        return self.y

    def subset(self, index: ArrayLike) -> "Dataset":
        index = np.asarray(index)
        return Dataset(self.grid, self.X[index], self.y[index])


def _check_grids(a: Grid, b: Grid) -> None:
    if not a.matches(b):
        raise GridMismatchError("operands are defined on different grids")


def inner_product(f: Curve, g: Curve) -> float:
    """``int f g`` by quadrature."""
    _check_grids(f.grid, g.grid)
    # f * g first so the result is exactly symmetric in f and g
    return float(np.sum(f.grid.weights * (f.values * g.values)))


def l2_norm(f: Curve) -> float:
    return float(np.sqrt(inner_product(f, f)))


def apply_kernel(K: Kernel, f: Curve) -> Curve:
    """The integral transform ``t -> int f(s) K(s, t) ds``."""
    _check_grids(K.grid, f.grid)
    return Curve(f.grid, (f.grid.weights * f.values) @ K.values)


def k_bilinear(f: Curve, g: Curve, K: Kernel) -> float:
    """``int int f(s) g(t) K(s, t) ds dt``."""
    _check_grids(f.grid, g.grid)
    return inner_product(f, apply_kernel(K, g))


def k_norm(f: Curve, K: Kernel) -> float:
    """Seminorm induced by a positive semidefinite kernel.

    Raises
    ------
    NotPSDError
        If the quadratic form is more negative than round-off can explain.
    """
    q = k_bilinear(f, f, K)
    scale = inner_product(f, f) * K.hs_norm()
    if q < -PSD_ATOL * scale:
        raise NotPSDError(f"quadratic form {q:.3e} is negative; kernel is not PSD")
    return float(np.sqrt(max(0.0, q)))


def center(data: Dataset) -> tuple[Curve, float, Dataset]:
    """Subtract the mean curve and mean response.

    Returns
    -------
    mean_curve, mean_y, centered
    """
    mean_x = data.X.mean(axis=0)
    mean_y = float(data.y.mean())
    centered = Dataset(data.grid, data.X - mean_x, data.y - mean_y)
    return Curve(data.grid, mean_x), mean_y, centered
