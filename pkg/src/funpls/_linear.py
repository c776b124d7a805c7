"""Shared pieces of every fitted predictor ``x -> mean_y + int (x - mean_curve) slope``."""

from __future__ import annotations

from typing import Protocol, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .funcore import Curve, Dataset, Grid, _check_grids


class LinearFunctionalModel(Protocol):
    mean_curve: Curve
    mean_y: float
    slope: Curve


def slope_from(grid: Grid, basis: Sequence[Curve], coefficients: ArrayLike) -> Curve:
    """``sum_j coefficients[j] * basis[j]``; the single code path for every model's slope."""
    B = np.stack([c.values for c in basis])
    return Curve(grid, np.asarray(coefficients, dtype=float) @ B)


def fix_sign(values: NDArray[np.float64]) -> float:
    """+1 or -1 so that the entry of largest magnitude becomes positive."""
    return -1.0 if values[np.argmax(np.abs(values))] < 0 else 1.0


def predict_linear(model: LinearFunctionalModel, x: Curve) -> float:
    _check_grids(model.mean_curve.grid, x.grid)
    w = x.grid.weights
    return float(model.mean_y + np.sum(w * (x.values - model.mean_curve.values) * model.slope.values))


def predict_rows(model: LinearFunctionalModel, X: ArrayLike) -> NDArray[np.float64]:
    """Vectorized prediction for curves given as rows of an ``(n, m)`` array on the model grid."""
    X = np.asarray(X, dtype=float)
    w = model.mean_curve.grid.weights
    if X.ndim != 2 or X.shape[1] != w.size:
        raise ValueError(f"expected curves with {w.size} samples, got shape {X.shape}")
    return model.mean_y + (X - model.mean_curve.values) @ (w * model.slope.values)


def training_rss(model: LinearFunctionalModel, data: Dataset) -> float:
    """``n^-1 sum (Y_i - prediction_i)^2`` on the given data."""
    _check_grids(model.mean_curve.grid, data.grid)
    r = data.y - predict_rows(model, data.X)
    return float(np.mean(r**2))


def intercept(model: LinearFunctionalModel) -> float:
    """``a`` in ``a + int b x``: ``mean_y - int slope * mean_curve``."""
    w = model.mean_curve.grid.weights
    return float(model.mean_y - np.sum(w * model.slope.values * model.mean_curve.values))
