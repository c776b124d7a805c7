"""Conventional iterative functional PLS with deflation of curves and responses.

Used as an independent cross-check of the Krylov-based fitters: it never forms
the covariance kernel or its powers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from ._linear import predict_linear, slope_from
from .errors import RankError
from .funcore import Curve, Dataset, center
from .tolerances import RANK_RTOL

__all__ = ["ClassicPlsModel", "fit_classic", "predict_classic"]


@dataclass(frozen=True, eq=False)
class ClassicPlsModel:
    p: int
    mean_curve: Curve
    mean_y: float
    weight_curves: tuple[Curve, ...]
    beta: NDArray[np.float64]
    delta: tuple[Curve, ...]
    m_inverse: NDArray[np.float64]
    coefficients: NDArray[np.float64] = field(init=False)
    slope: Curve = field(init=False)

    def __post_init__(self):
        # slope(t) = sum_{j,k} beta_k M_jk psi_j(t) = sum_j (M beta)_j psi_j(t)
        coef = np.linalg.solve(self.m_inverse, self.beta)
        coef.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "slope", slope_from(self.mean_curve.grid, self.weight_curves, coef))

    @property
    def variant(self) -> str:
        return "classic"

    @property
    def basis(self) -> tuple[Curve, ...]:
        return self.weight_curves

    @property
    def grid(self):
        return self.mean_curve.grid


def fit_classic(data: Dataset, p: int) -> ClassicPlsModel:
    """Iterative PLS: weight, regress, deflate, ``p`` times.

    At step ``j`` the weight curve is ``sum_i X_i^[j] Y_i^[j]`` normalized in L2,
    ``beta_j`` and ``delta_j`` come from simple least squares on the score
    ``int X_i^[j] psi_j``, and both curves and responses are deflated by it.

    Raises
    ------
    RankError
        If the weight curve or the score vector vanishes at step ``j``.
    """
    if int(p) != p or p < 1:
        raise ValueError(f"p must be a positive integer, got {p!r}")
    grid = data.grid
    w = grid.weights
    mean_curve, mean_y, centered = center(data)
    X = centered.X.copy()
    y = centered.y.copy()
    x_scale = float(np.sum(X**2 * w))
    y_scale = float(y @ y)

    psis, deltas, betas = [], [], []
    for j in range(1, p + 1):
        direction = y @ X
        norm = float(np.sqrt(np.sum(w * direction**2)))
        if not norm > RANK_RTOL * np.sqrt(x_scale * y_scale):
            raise RankError(f"step {j}: covariance of deflated curves and responses vanished", j)
        psi = direction / norm
        score = X @ (w * psi)
        ss = float(score @ score)
        if not ss > RANK_RTOL * x_scale:
            raise RankError(f"step {j}: degenerate score (sum of squares {ss:.3e})", j)
        beta = float(y @ score) / ss
        delta = score @ X / ss
        X = X - np.outer(score, delta)
        y = y - beta * score
        psis.append(psi)
        deltas.append(delta)
        betas.append(beta)

    Psi = np.stack(psis)
    Delta = np.stack(deltas)
    m_inverse = (Delta * w) @ Psi.T
    return ClassicPlsModel(
        p,
        mean_curve,
        mean_y,
        tuple(Curve(grid, v) for v in Psi),
        np.array(betas),
        tuple(Curve(grid, v) for v in Delta),
        m_inverse,
    )


def predict_classic(model: ClassicPlsModel, x: Curve) -> float:
    return predict_linear(model, x)
