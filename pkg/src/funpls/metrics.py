"""Numerical comparison helpers: relative norms, Gram defects, condition estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike

from .funcore import Curve, Kernel, _check_grids
from .mgs import ScalarProduct, euclidean

__all__ = ["ComparisonReport", "compare", "rel_l2", "gram_defect", "cond_estimate"]


@dataclass(frozen=True)
class ComparisonReport:
    name: str
    observed: float
    reference: float
    relative_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.relative_error <= self.tolerance

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return (
            f"[{flag}] {self.name}: observed={self.observed:.6g} "
            f"reference={self.reference:.6g} rel_err={self.relative_error:.3e} "
            f"tol={self.tolerance:.1e}"
        )


def _relative(diff: float, ref: float) -> float:
    if ref == 0.0:
        return 0.0 if diff == 0.0 else math.inf
    return diff / ref


def compare(name: str, observed: float, reference: float, tolerance: float) -> ComparisonReport:
    return ComparisonReport(
        name,
        float(observed),
        float(reference),
        _relative(abs(observed - reference), abs(reference)),
        tolerance,
    )


def rel_l2(f: Curve | Kernel, g: Curve | Kernel) -> float:
    """``||f - g|| / ||g||`` in L2 (curves) or the quadrature Hilbert-Schmidt norm (kernels).

    Relative to the second argument, so not symmetric. A zero reference gives
    ``inf`` unless ``f`` is zero too.
    """
    _check_grids(f.grid, g.grid)
    if isinstance(f, Kernel) != isinstance(g, Kernel):
        raise TypeError("rel_l2 compares two curves or two kernels")
    if isinstance(f, Kernel):
        diff = Kernel(f.grid, f.values - g.values).hs_norm()
        ref = g.hs_norm()
    else:
        w = f.grid.weights
        diff = float(np.sqrt(np.sum(w * (f.values - g.values) ** 2)))
        ref = float(np.sqrt(np.sum(w * g.values**2)))
    return _relative(diff, ref)


def gram_defect(family: ArrayLike | Sequence[Curve], sp: ScalarProduct = euclidean) -> float:
    """Largest entry of ``|G - I|`` for the Gram matrix ``G`` of the family."""
    rows = [f.values if isinstance(f, Curve) else np.asarray(f, dtype=float) for f in family]
    p = len(rows)
    G = np.array([[sp(rows[i], rows[j]) for j in range(p)] for i in range(p)])
    return float(np.max(np.abs(G - np.eye(p))))


def cond_estimate(matrix: ArrayLike) -> float:
    """Ratio of extreme singular values of the symmetrized matrix."""
    A = np.asarray(matrix, dtype=float)
    s = np.linalg.svd((A + A.T) / 2, compute_uv=False)
    if s[-1] == 0.0:
        return math.inf
    return float(s[0] / s[-1])
