"""Empirical APLS: the raw Krylov solve and its two stabilized reformulations.

All three variants fit the same predictor in exact arithmetic,

    g_p(x) = Ybar + sum_j gamma_j int (x - Xbar) Khat^j(b),

and differ only in how the p-dimensional least-squares problem is solved:

``raw``
    normal equations ``Hhat gamma = alphahat`` assembled from the Krylov terms;
``qr_stabilized``
    modified Gram-Schmidt on the n x p score matrix, then back substitution;
``ortho_basis``
    the Krylov terms are Khat-orthonormalized into PLS basis functions first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import solve_triangular

from ._linear import fix_sign, predict_linear, predict_rows, slope_from
from .covest import KrylovSequence, empirical_covariance, empirical_cross_covariance, extend_krylov
from .errors import IllConditionedError, RankError
from .funcore import Curve, Dataset, Kernel, center
from .metrics import cond_estimate
from .mgs import KernelProduct, euclidean, modified_gram_schmidt
from .tolerances import RAW_COND_MAX

__all__ = [
    "AplsModel",
    "AplsDiagnostics",
    "build_h_hat",
    "build_h_tilde",
    "fit_apls_raw",
    "fit_apls_qr",
    "fit_apls_ortho",
    "fit_apls",
    "predict",
    "predict_rows",
]

Variant = Literal["raw", "qr_stabilized", "ortho_basis"]


@dataclass(frozen=True, eq=False)
class AplsModel:
    """A fitted APLS predictor.

    ``basis`` holds the Krylov terms for the ``raw`` and ``qr_stabilized``
    variants and the Khat-orthonormal PLS functions for ``ortho_basis``;
    ``slope = sum_j coefficients[j] * basis[j]``.
    """

    variant: Variant
    p: int
    mean_curve: Curve
    mean_y: float
    basis: tuple[Curve, ...]
    coefficients: NDArray[np.float64]
    kernel: Kernel | None = None
    slope: Curve = field(init=False)

    def __post_init__(self):
        coef = np.array(self.coefficients, dtype=float)
        coef.setflags(write=False)
        object.__setattr__(self, "coefficients", coef)
        object.__setattr__(self, "basis", tuple(self.basis))
        object.__setattr__(self, "slope", slope_from(self.mean_curve.grid, self.basis, coef))

    @property
    def grid(self):
        return self.mean_curve.grid


@dataclass(frozen=True)
class AplsDiagnostics:
    h_matrix: NDArray[np.float64]
    alpha: NDArray[np.float64]
    smallest_eigenvalue: float
    largest_eigenvalue: float
    condition_estimate: float


def _gram_l2(a: np.ndarray, b: np.ndarray, w: np.ndarray) -> np.ndarray:
    """``G[j, k] = int a_j b_k`` for row families ``a`` and ``b``."""
    return (a * w) @ b.T


def build_h_hat(seq: KrylovSequence, p: int | None = None) -> AplsDiagnostics:
    """``hhat_jk = int Khat^{j+1}(b) Khat^k(b)`` and ``alphahat_j = int Khat(b) Khat^j(b)``.

    Uses ``p + 1`` Krylov terms; ``p`` defaults to ``len(seq) - 1``.
    """
    if p is None:
        p = len(seq) - 1
    if p < 1 or len(seq) < p + 1:
        raise ValueError(f"need {p + 1} Krylov terms for a {p} x {p} matrix, have {len(seq)}")
    w = seq.grid.weights
    T = seq.matrix(p + 1)
    H = _gram_l2(T[1 : p + 1], T[:p], w)
    alpha = _gram_l2(T[:1], T[:p], w)[0]
    eig = np.linalg.eigvalsh((H + H.T) / 2)
    return AplsDiagnostics(H, alpha, float(eig[0]), float(eig[-1]), cond_estimate(H))


def build_h_tilde(seq: KrylovSequence, p: int) -> NDArray[np.float64]:
    """Symmetric Hankel estimator ``htilde_jk = int Khat^{j+k}(b) Khat(b)``.

    Needs ``2p`` Krylov terms; each moment is computed once and copied along
    its anti-diagonal, so symmetry and the Hankel pattern hold exactly.
    """
    if len(seq) < 2 * p:
        raise ValueError(f"need {2 * p} Krylov terms, have {len(seq)}")
    w = seq.grid.weights
    T = seq.matrix(2 * p)
    moments = _gram_l2(T[:1], T, w)[0]  # moments[s - 1] = int Khat^s(b) Khat(b)
    j = np.arange(1, p + 1)
    return moments[j[:, None] + j[None, :] - 1]


def _prepare(data: Dataset, n_terms: int):
    mean_curve, mean_y, centered = center(data)
    K = empirical_covariance(data)
    seq = extend_krylov(K, empirical_cross_covariance(data), n_terms)
    return mean_curve, mean_y, centered, seq


def _check_p(p: int) -> None:
    if int(p) != p or p < 1:
        raise ValueError(f"p must be a positive integer, got {p!r}")


def fit_apls_raw(data: Dataset, p: int) -> tuple[AplsModel, AplsDiagnostics]:
    """Solve ``Hhat gamma = alphahat`` directly.

    Raises
    ------
    IllConditionedError
        If the condition estimate of ``Hhat`` exceeds ``1e12``.
    """
    _check_p(p)
    mean_curve, mean_y, _, seq = _prepare(data, p + 1)
    diag = build_h_hat(seq, p)
    if not np.any(seq.term(1).values):
        # constant responses: alphahat = 0 and every gamma fits equally well; take gamma = 0
        model = AplsModel("raw", p, mean_curve, mean_y, seq.terms[:p], np.zeros(p), seq.kernel)
        return model, diag
    if not diag.condition_estimate <= RAW_COND_MAX:
        raise IllConditionedError(
            f"Hhat condition estimate {diag.condition_estimate:.3e} exceeds "
            f"{RAW_COND_MAX:.0e} at p={p}",
            diag,
        )
    # symmetric diagonal equilibration; the solution of Hhat gamma = alphahat is unchanged
    d = np.sqrt(np.abs(np.diag(diag.h_matrix)))
    d[d == 0] = 1.0
    gamma = np.linalg.solve(diag.h_matrix / np.outer(d, d), diag.alpha / d) / d
    model = AplsModel("raw", p, mean_curve, mean_y, seq.terms[:p], gamma, seq.kernel)
    return model, diag


def score_matrix(centered: Dataset, basis: np.ndarray) -> np.ndarray:
    """``S[i, j] = int X_i^c basis_j`` for a row family ``basis``."""
    return (centered.X * centered.grid.weights) @ basis.T


def fit_apls_qr(data: Dataset, p: int) -> AplsModel:
    """Orthogonalize the ``n x p`` score matrix and back-substitute ``R gamma = U^T Y^c``.

    Raises
    ------
    RankError
        Naming the 1-based score column that became dependent.
    """
    _check_p(p)
    mean_curve, mean_y, centered, seq = _prepare(data, p)
    S = score_matrix(centered, seq.matrix(p))
    try:
        U, R = modified_gram_schmidt(S.T, euclidean)
    except RankError as exc:
        raise RankError(f"score column {exc.index} is numerically dependent: {exc}", exc.index) from None
    gamma = solve_triangular(R, U @ centered.y, lower=False)
    return AplsModel("qr_stabilized", p, mean_curve, mean_y, seq.terms[:p], gamma, seq.kernel)


def fit_apls_ortho(data: Dataset, p: int) -> AplsModel:
    """Khat-orthonormal PLS basis from the Krylov terms, then least squares on its scores.

    Raises
    ------
    RankError
        If a Krylov term is Khat-degenerate given its predecessors.
    """
    _check_p(p)
    mean_curve, mean_y, centered, seq = _prepare(data, p)
    grid = data.grid
    U, _ = modified_gram_schmidt(seq.matrix(p), KernelProduct(seq.kernel))
    U = U * np.array([fix_sign(u) for u in U])[:, None]
    S = score_matrix(centered, U)
    beta, *_ = np.linalg.lstsq(S, centered.y, rcond=None)
    basis = tuple(Curve(grid, u) for u in U)
    return AplsModel("ortho_basis", p, mean_curve, mean_y, basis, beta, seq.kernel)


_FITTERS = {
    "raw": lambda data, p: fit_apls_raw(data, p)[0],
    "qr_stabilized": fit_apls_qr,
    "ortho_basis": fit_apls_ortho,
}


def fit_apls(data: Dataset, p: int, variant: Variant = "ortho_basis") -> AplsModel:
    """Fit any variant; ``ortho_basis`` is the recommended default for prediction."""
    try:
        fitter = _FITTERS[variant]
    except KeyError:
        raise ValueError(f"unknown APLS variant {variant!r}") from None
    return fitter(data, p)


def predict(model, x: Curve) -> float:
    """``mean_y + int (x - mean_curve) slope`` for any fitted model in the package."""
    return predict_linear(model, x)
