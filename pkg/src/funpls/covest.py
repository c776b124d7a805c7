"""Empirical covariance kernel, cross-covariance and its Krylov sequence."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .funcore import Curve, Dataset, Grid, Kernel, apply_kernel

__all__ = [
    "KrylovSequence",
    "empirical_covariance",
    "empirical_cross_covariance",
    "krylov_sequence",
    "extend_krylov",
]


@dataclass(frozen=True, eq=False)
class KrylovSequence:
    """``terms[j - 1]`` estimates ``K^j(b)``, generated by iterating ``kernel``."""

    grid: Grid
    terms: tuple[Curve, ...]
    kernel: Kernel

    def __len__(self) -> int:
        return len(self.terms)

    def term(self, j: int) -> Curve:
        """1-based access, matching the power of the operator."""
        if j < 1:
            raise IndexError("Krylov terms are indexed from 1")
        return self.terms[j - 1]

    def matrix(self, p: int | None = None) -> np.ndarray:
        """First ``p`` terms stacked as rows."""
        terms = self.terms if p is None else self.terms[:p]
        return np.stack([t.values for t in terms])


def empirical_covariance(data: Dataset) -> Kernel:
    """``n^-1 sum (X_i - Xbar)(s) (X_i - Xbar)(t)``."""
    Xc = data.X - data.X.mean(axis=0)
    K = Xc.T @ Xc / data.n
    # exact symmetry; the product above is symmetric only up to summation order
    K = (K + K.T) / 2
    return Kernel(data.grid, K)


def empirical_cross_covariance(data: Dataset) -> Curve:
    """``n^-1 sum (X_i - Xbar)(Y_i - Ybar)``, the estimate of ``K(b)``."""
    Xc = data.X - data.X.mean(axis=0)
    yc = data.y - data.y.mean()
    return Curve(data.grid, yc @ Xc / data.n)


def extend_krylov(kernel: Kernel, seed: Curve, p: int) -> KrylovSequence:
    """Krylov sequence ``seed, K(seed), ..., K^{p-1}(seed)`` for a given kernel."""
    if p < 1:
        raise ValueError("p must be at least 1")
    terms = [seed]
    for _ in range(p - 1):
        terms.append(apply_kernel(kernel, terms[-1]))
    return KrylovSequence(seed.grid, tuple(terms), kernel)


def krylov_sequence(data: Dataset, p: int) -> KrylovSequence:
    """Empirical ``Khat(b), Khat^2(b), ..., Khat^p(b)`` with a single assembled kernel."""
    return extend_krylov(empirical_covariance(data), empirical_cross_covariance(data), p)
