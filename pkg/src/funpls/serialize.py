"""JSON documents for fitted models and spectral models.

Floats are written with Python's shortest round-trip ``repr``, so one
dump/load cycle reproduces every value bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from ._linear import slope_from
from .errors import SpecError
from .funcore import Curve, Grid, uniform_grid
from .oracle import SpectralModel

__all__ = [
    "LinearModel",
    "grid_to_dict",
    "grid_from_dict",
    "model_to_dict",
    "model_from_dict",
    "dumps_model",
    "loads_model",
    "spectral_model_to_dict",
    "spectral_model_from_dict",
]

VARIANTS = ("raw", "qr_stabilized", "ortho_basis", "classic", "pca")


@dataclass(frozen=True, eq=False)
class LinearModel:
    """A deserialized predictor ``mean_y + int (x - mean_curve) sum_j coefficients_j basis_j``."""

    variant: str
    p: int
    mean_curve: Curve
    mean_y: float
    basis: tuple[Curve, ...]
    coefficients: NDArray[np.float64]
    slope: Curve = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "slope", slope_from(self.mean_curve.grid, self.basis, self.coefficients))

    @property
    def grid(self) -> Grid:
        return self.mean_curve.grid


def grid_to_dict(grid: Grid) -> dict:
    return {
        "points": grid.points.tolist(),
        "weights": grid.weights.tolist(),
        "interval": list(grid.interval),
    }


def grid_from_dict(d: dict) -> Grid:
    """Explicit ``{points, weights, interval}`` or the shorthand ``{m, lower, upper}``."""
    try:
        if "points" in d:
            return Grid(np.array(d["points"], float), np.array(d["weights"], float), tuple(d["interval"]))
        return uniform_grid(int(d["m"]), float(d.get("lower", 0.0)), float(d.get("upper", 1.0)))
    except (KeyError, TypeError, ValueError) as exc:
        raise SpecError(f"invalid grid: {exc}") from None


def model_to_dict(model) -> dict:
    return {
        "variant": model.variant,
        "p": int(model.p),
        "grid": grid_to_dict(model.mean_curve.grid),
        "mean_curve": model.mean_curve.values.tolist(),
        "mean_y": float(model.mean_y),
        "basis": [c.values.tolist() for c in model.basis],
        "coefficients": np.asarray(model.coefficients, float).tolist(),
    }


def model_from_dict(d: dict) -> LinearModel:
    try:
        variant = d["variant"]
        if variant not in VARIANTS:
            raise SpecError(f"unknown model variant {variant!r}")
        grid = grid_from_dict(d["grid"])
        basis = tuple(Curve(grid, row) for row in d["basis"])
        coef = np.array(d["coefficients"], dtype=float)
        if coef.size != len(basis) or int(d["p"]) != len(basis):
            raise SpecError("p, basis and coefficients disagree")
        return LinearModel(variant, int(d["p"]), Curve(grid, d["mean_curve"]), float(d["mean_y"]), basis, coef)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"invalid model document: {exc}") from None


def dumps_model(model) -> str:
    return json.dumps(model_to_dict(model))


def loads_model(text: str) -> LinearModel:
    try:
        return model_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise SpecError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def spectral_model_to_dict(model: SpectralModel) -> dict:
    return {
        "grid": grid_to_dict(model.grid),
        "eigenvalues": model.eigenvalues.tolist(),
        "eigenfunction_values": model.eigenfunctions.tolist(),
        "slope_coefficients": model.slope_coefficients.tolist(),
        "noise_sd": model.noise_sd,
        "mean_curve_values": model.mean_curve.values.tolist(),
        "intercept": model.intercept,
    }


def spectral_model_from_dict(d: dict) -> SpectralModel:
    """Full schema, or ``basis: "fourier" | "legendre"`` in place of ``eigenfunction_values``."""
    try:
        grid = grid_from_dict(d["grid"])
        mean = d.get("mean_curve_values")
        mean = Curve(grid, mean) if mean is not None else None
        theta = np.array(d["eigenvalues"], dtype=float)
        beta = d.get("slope_coefficients", np.zeros(theta.size))
        noise = float(d.get("noise_sd", 0.0))
        intercept = float(d.get("intercept", 0.0))
        if "eigenfunction_values" in d:
            return SpectralModel(grid, theta, d["eigenfunction_values"], beta, noise, mean, intercept)
        return SpectralModel.build(grid, theta, beta, noise, d.get("basis", "fourier"), mean, intercept)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"invalid spectral model: {exc}") from None
