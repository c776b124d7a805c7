"""Functional regression on the leading empirical principal components."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from ._linear import fix_sign, predict_linear, slope_from
from .covest import empirical_covariance
from .errors import RankError
from .funcore import Curve, Dataset, Kernel, center
from .tolerances import EIG_CLAMP_RTOL, SYMMETRY_RTOL

__all__ = ["EigenSystem", "PcaModel", "eigendecompose", "fit_pca", "predict_pca"]


@dataclass(frozen=True, eq=False)
class EigenSystem:
    """Eigenvalues in nonincreasing order and L2-orthonormal eigenfunctions."""

    eigenvalues: NDArray[np.float64]
    eigenfunctions: tuple[Curve, ...]

    @property
    def rank(self) -> int:
        """Number of eigenvalues that survived clamping."""
        return int(np.count_nonzero(self.eigenvalues > 0))

    def truncate(self, p: int) -> "EigenSystem":
        return EigenSystem(self.eigenvalues[:p].copy(), self.eigenfunctions[:p])


def eigendecompose(K: Kernel, r: int | None = None) -> EigenSystem:
    """Leading ``r`` eigenpairs of the integral operator with kernel ``K``.

    Solves the symmetric problem for ``W^1/2 K W^1/2`` (``W`` the diagonal of
    quadrature weights) and maps eigenvectors back with ``W^-1/2``, so the
    eigenfunctions are orthonormal under the quadrature inner product.
    Eigenvalues below ``1e-14`` times the largest are set to zero; each
    eigenfunction is signed so its largest-magnitude entry is positive.
    """
    m = K.grid.size
    r = m if r is None else r
    if not 1 <= r <= m:
        raise ValueError(f"r must lie in [1, {m}], got {r}")
    if not K.is_symmetric(SYMMETRY_RTOL):
        raise ValueError("kernel is not symmetric")
    sw = np.sqrt(K.grid.weights)
    A = sw[:, None] * K.values * sw[None, :]
    A = (A + A.T) / 2
    theta, V = np.linalg.eigh(A)
    order = np.argsort(theta)[::-1][:r]
    theta = theta[order]
    phi = (V[:, order] / sw[:, None]).T
    top = theta[0] if theta.size and theta[0] > 0 else 0.0
    theta = np.where(theta < EIG_CLAMP_RTOL * top, 0.0, theta)
    if top == 0.0:
        theta = np.zeros_like(theta)
    phi = phi * np.array([fix_sign(v) for v in phi])[:, None]
    return EigenSystem(theta, tuple(Curve(K.grid, v) for v in phi))


@dataclass(frozen=True, eq=False)
class PcaModel:
    p: int
    mean_curve: Curve
    mean_y: float
    eigensystem: EigenSystem
    coefficients: NDArray[np.float64]
    slope: Curve = field(init=False)

    def __post_init__(self):
        coef = np.array(self.coefficients, dtype=float)
        coef.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(
            self, "slope", slope_from(self.mean_curve.grid, self.eigensystem.eigenfunctions, coef)
        )

    @property
    def variant(self) -> str:
        return "pca"

    @property
    def basis(self) -> tuple[Curve, ...]:
        return self.eigensystem.eigenfunctions

    @property
    def grid(self):
        return self.mean_curve.grid


def fit_pca(data: Dataset, p: int) -> PcaModel:
    """Least squares of centred responses on the first ``p`` principal component scores.

    Raises
    ------
    RankError
        If fewer than ``p`` eigenvalues survive clamping.
    """
    if int(p) != p or p < 1:
        raise ValueError(f"p must be a positive integer, got {p!r}")
    mean_curve, mean_y, centered = center(data)
    system = eigendecompose(empirical_covariance(data), min(data.grid.size, max(p, 1)))
    if system.rank < p:
        raise RankError(f"only {system.rank} nonzero eigenvalues; cannot use p={p}", system.rank + 1)
    system = system.truncate(p)
    Phi = np.stack([f.values for f in system.eigenfunctions])
    S = (centered.X * data.grid.weights) @ Phi.T
    coef, *_ = np.linalg.lstsq(S, centered.y, rcond=None)
    return PcaModel(p, mean_curve, mean_y, system, coef)


def predict_pca(model: PcaModel, x: Curve) -> float:
    return predict_linear(model, x)
