"""Modified Gram-Schmidt under a pluggable scalar product."""

from __future__ import annotations

from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import RankError
from .funcore import Grid, Kernel
from .tolerances import RANK_RTOL

__all__ = ["ScalarProduct", "euclidean", "KernelProduct", "L2Product", "modified_gram_schmidt"]

ScalarProduct = Callable[[NDArray[np.float64], NDArray[np.float64]], float]


def euclidean(a: NDArray[np.float64], b: NDArray[np.float64]) -> float:
    return float(a @ b)


class L2Product:
    """Quadrature inner product ``int f g`` on a grid."""

    def __init__(self, grid: Grid):
        self.weights = grid.weights

    def __call__(self, a, b) -> float:
        return float(np.sum(self.weights * a * b))


class KernelProduct:
    """The form ``int int f(s) g(t) K(s, t) ds dt``; semidefinite for covariance kernels."""

    def __init__(self, kernel: Kernel):
        w = kernel.grid.weights
        # W K W, so <f, g> = f^T (W K W) g
        self.matrix = w[:, None] * kernel.values * w[None, :]

    def __call__(self, a, b) -> float:
        return float(a @ self.matrix @ b)


def _norm(sp: ScalarProduct, v) -> float:
    return float(np.sqrt(max(0.0, sp(v, v))))


def modified_gram_schmidt(
    vectors: ArrayLike, sp: ScalarProduct = euclidean
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Orthonormalize the rows of ``vectors`` in order.

    Parameters
    ----------
    vectors : array_like, shape (p, d)
        The family ``v_1, ..., v_p`` as rows.
    sp : callable
        Symmetric positive semidefinite scalar product on length-``d`` vectors.

    Returns
    -------
    U : ndarray, shape (p, d)
        Orthonormal rows with ``span(U[:j]) == span(vectors[:j])`` for every ``j``.
    R : ndarray, shape (p, p)
        Upper triangular, ``vectors == R.T @ U``.

    Raises
    ------
    RankError
        If the residual of ``v_j`` after projection is below ``1e-12 * ||v_j||``.
    """
    V = np.array(vectors, dtype=np.float64, ndmin=2)
    p = V.shape[0]
    U = np.empty_like(V)
    R = np.zeros((p, p))
    for j in range(p):
        u = V[j].copy()
        scale = _norm(sp, u)
        for i in range(j):
            r = sp(u, U[i])
            R[i, j] = r
            u -= r * U[i]
        norm = _norm(sp, u)
        if not norm > RANK_RTOL * scale or norm == 0.0:
            raise RankError(
                f"vector {j + 1} is numerically dependent on its predecessors "
                f"(residual norm {norm:.3e}, original {scale:.3e})",
                j + 1,
            )
        R[j, j] = norm
        U[j] = u / norm
    return U, R
