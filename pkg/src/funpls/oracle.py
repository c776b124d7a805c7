"""Population quantities of a finite-rank spectral model.

For a covariance ``K = sum_k theta_k phi_k phi_k^T`` and slope
``b = sum_k beta_k phi_k`` everything the empirical fitters estimate has a
closed form:

* ``K^j(b) = sum_k theta_k^j beta_k phi_k``;
* ``h_jk = sum_r beta_r^2 theta_r^(j+k+1)`` and ``alpha_j = h_0j``, a Hankel matrix;
* ``gamma = H^-1 alpha``, the coefficients of the best ``p``-term Krylov approximation;
* ``t_p(w) = sum_k theta_k beta_k^2 (1 - sum_j w_j theta_k^j)^2``, its squared prediction error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import RankError, SingularityError
from .funcore import Curve, Grid, Kernel, apply_kernel, k_bilinear, k_norm
from .tolerances import RANK_RTOL

__all__ = [
    "SpectralModel",
    "OracleReport",
    "orthonormal_basis",
    "population_kernel",
    "population_krylov",
    "population_hankel",
    "population_h_gamma",
    "tp_value",
    "pls_basis",
    "pls_objective",
    "population_predictor",
    "population_slope_approximation",
]


def orthonormal_basis(grid: Grid, r: int, kind: str = "fourier") -> NDArray[np.float64]:
    """``r`` functions, exactly orthonormal under the grid's quadrature, as rows.

    ``fourier`` uses ``1, cos, sin, cos, ...`` of increasing frequency and
    ``legendre`` uses Legendre polynomials; either family is re-orthonormalized
    in the weighted inner product so discrete orthonormality holds to round-off.
    """
    m = grid.size
    if not 1 <= r <= m:
        raise ValueError(f"need 1 <= r <= {m}, got {r}")
    lower, upper = grid.interval
    u = (grid.points - lower) / (upper - lower)
    if kind == "fourier":
        cols = [np.ones(m)]
        k = 1
        while len(cols) < r:
            cols.append(np.sqrt(2) * np.cos(2 * np.pi * k * u))
            cols.append(np.sqrt(2) * np.sin(2 * np.pi * k * u))
            k += 1
        F = np.stack(cols[:r], axis=1)
    elif kind == "legendre":
        F = np.polynomial.legendre.legvander(2 * u - 1, r - 1)
    else:
        raise ValueError(f"unknown basis kind {kind!r}")
    sw = np.sqrt(grid.weights)
    Q, R = np.linalg.qr(sw[:, None] * F)
    Q = Q * np.sign(np.diag(R))[None, :]
    return (Q / sw[:, None]).T


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """Finite-rank population: covariance eigenpairs, slope, noise and mean.

    Data follow ``X = mean_curve + sum_k sqrt(theta_k) xi_k phi_k`` and
    ``Y = intercept + int b X + eps`` with ``eps ~ N(0, noise_sd^2)``.
    """

    grid: Grid
    eigenvalues: NDArray[np.float64]
    eigenfunctions: NDArray[np.float64]
    slope_coefficients: NDArray[np.float64]
    noise_sd: float = 0.0
    mean_curve: Curve | None = None
    intercept: float = 0.0
    _phi_check: bool = field(default=True, repr=False)

    def __post_init__(self):
        theta = np.array(self.eigenvalues, dtype=float, ndmin=1)
        phi = np.array(self.eigenfunctions, dtype=float, ndmin=2)
        beta = np.array(self.slope_coefficients, dtype=float, ndmin=1)
        r = theta.size
        if r < 1:
            raise ValueError("need at least one eigenpair")
        if phi.shape != (r, self.grid.size):
            raise ValueError(f"eigenfunctions must have shape {(r, self.grid.size)}, got {phi.shape}")
        if beta.size != r:
            raise ValueError(f"{beta.size} slope coefficients for {r} eigenpairs")
        if np.any(theta <= 0) or np.any(np.diff(theta) > 0):
            raise ValueError("eigenvalues must be positive and nonincreasing")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be nonnegative")
        if self._phi_check:
            G = (phi * self.grid.weights) @ phi.T
            if np.max(np.abs(G - np.eye(r))) > 1e-10:
                raise ValueError("eigenfunctions are not orthonormal on the grid")
        mean = self.mean_curve if self.mean_curve is not None else Curve.zeros(self.grid)
        for arr in (theta, phi, beta):
            arr.setflags(write=False)
        object.__setattr__(self, "eigenvalues", theta)
        object.__setattr__(self, "eigenfunctions", phi)
        object.__setattr__(self, "slope_coefficients", beta)
        object.__setattr__(self, "mean_curve", mean)
        object.__setattr__(self, "noise_sd", float(self.noise_sd))
        object.__setattr__(self, "intercept", float(self.intercept))

    @classmethod
    def build(
        cls,
        grid: Grid,
        eigenvalues: ArrayLike,
        slope_coefficients: ArrayLike,
        noise_sd: float = 0.0,
        basis: str = "fourier",
        mean_curve: Curve | None = None,
        intercept: float = 0.0,
    ) -> "SpectralModel":
        theta = np.asarray(eigenvalues, dtype=float)
        return cls(
            grid,
            theta,
            orthonormal_basis(grid, theta.size, basis),
            slope_coefficients,
            noise_sd,
            mean_curve,
            intercept,
        )

    @property
    def rank(self) -> int:
        return self.eigenvalues.size

    @property
    def slope(self) -> Curve:
        """``b = sum_k beta_k phi_k``."""
        return Curve(self.grid, self.slope_coefficients @ self.eigenfunctions)

    def hs_norm(self) -> float:
        """Hilbert-Schmidt norm of the covariance operator, ``(sum theta^2)^(1/2)``."""
        return float(np.sqrt(np.sum(self.eigenvalues**2)))

    def signal_variance(self) -> float:
        """``Var(int b X) = sum theta_k beta_k^2``."""
        return float(np.sum(self.eigenvalues * self.slope_coefficients**2))

    def mean_response(self) -> float:
        """``E(Y) = a + int b EX``."""
        w = self.grid.weights
        return float(self.intercept + np.sum(w * self.slope.values * self.mean_curve.values))

    def with_slope(self, slope_coefficients: ArrayLike) -> "SpectralModel":
        return SpectralModel(
            self.grid, self.eigenvalues, self.eigenfunctions, slope_coefficients,
            self.noise_sd, self.mean_curve, self.intercept, _phi_check=False,
        )

    def with_noise(self, noise_sd: float) -> "SpectralModel":
        return SpectralModel(
            self.grid, self.eigenvalues, self.eigenfunctions, self.slope_coefficients,
            noise_sd, self.mean_curve, self.intercept, _phi_check=False,
        )

    def rescaled(self, c: float) -> "SpectralModel":
        """Measure ``X`` on a scale ``c`` times larger; responses are unchanged.

        Eigenvalues scale by ``c^2`` and the slope by ``1/c``.
        """
        return SpectralModel(
            self.grid, self.eigenvalues * c**2, self.eigenfunctions, self.slope_coefficients / c,
            self.noise_sd, self.mean_curve * c, self.intercept, _phi_check=False,
        )


@dataclass(frozen=True, eq=False)
class OracleReport:
    h_matrix: NDArray[np.float64]
    alpha: NDArray[np.float64]
    gamma: NDArray[np.float64]
    lambda_p: float
    tp_value: float
    psi_basis: tuple[Curve, ...]
    bp: Curve
    slope: Curve


def population_kernel(model: SpectralModel) -> Kernel:
    phi = model.eigenfunctions
    K = (phi.T * model.eigenvalues) @ phi
    return Kernel(model.grid, (K + K.T) / 2)


def population_krylov(model: SpectralModel, p: int) -> list[Curve]:
    """``[K(b), K^2(b), ..., K^p(b)]`` from the eigen-expansion."""
    if p < 1:
        raise ValueError("the sequence starts at K(b); p must be >= 1")
    theta, beta, phi = model.eigenvalues, model.slope_coefficients, model.eigenfunctions
    return [Curve(model.grid, (theta**j * beta) @ phi) for j in range(1, p + 1)]


def _effective_rank(model: SpectralModel) -> int:
    """Distinct eigenvalues carrying a nonzero slope coefficient; H is nonsingular up to this p."""
    active = model.eigenvalues[model.slope_coefficients != 0]
    return int(np.unique(active).size)


def population_hankel(model: SpectralModel, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form ``(H, alpha)``; every entry of ``H`` is a single moment, so it is exactly Hankel."""
    theta, beta = model.eigenvalues, model.slope_coefficients
    moments = np.array([np.sum(beta**2 * theta ** (s + 1)) for s in range(2 * p + 1)])
    j = np.arange(1, p + 1)
    H = moments[j[:, None] + j[None, :]]
    alpha = moments[j]
    return H, alpha


def _weighted_vandermonde(model: SpectralModel, p: int) -> tuple[np.ndarray, np.ndarray]:
    """``A[k, j] = sqrt(theta_k) beta_k theta_k^j``, ``c_k = sqrt(theta_k) beta_k``.

    ``t_p(w) = ||c - A w||^2``, ``H = A^T A`` and ``alpha = A^T c``.
    """
    theta, beta = model.eigenvalues, model.slope_coefficients
    c = np.sqrt(theta) * beta
    A = c[:, None] * theta[:, None] ** np.arange(1, p + 1)[None, :]
    return A, c


def tp_value(model: SpectralModel, w: ArrayLike) -> float:
    """Squared prediction error of ``int (X - EX) b`` by ``sum_j w_j int (X - EX) K^j(b)``."""
    w = np.atleast_1d(np.asarray(w, dtype=float))
    A, c = _weighted_vandermonde(model, w.size)
    return float(np.sum((c - A @ w) ** 2))


def _gamma(model: SpectralModel, p: int) -> np.ndarray:
    # least squares on the weighted Vandermonde system: same minimizer as H^-1 alpha
    # without squaring the condition number
    A, c = _weighted_vandermonde(model, p)
    scale = np.linalg.norm(A, axis=0)
    Q, R = np.linalg.qr(A / scale)
    return np.linalg.solve(R, Q.T @ c) / scale


def population_h_gamma(model: SpectralModel, p: int) -> OracleReport:
    """Closed-form ``H``, ``alpha``, ``gamma``, ``lambda(p)``, ``t_p(gamma)`` and the PLS basis.

    Raises
    ------
    SingularityError
        If ``p`` exceeds the number of distinct eigenvalues with nonzero slope coefficient.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if p > _effective_rank(model):
        raise SingularityError(
            f"H is singular for p={p}: only {_effective_rank(model)} distinct active eigenvalues"
        )
    H, alpha = population_hankel(model, p)
    gamma = _gamma(model, p)
    lam = float(np.linalg.eigvalsh(H)[0])
    krylov = population_krylov(model, p)
    bp = Curve(model.grid, gamma @ np.stack([c.values for c in krylov]))
    return OracleReport(
        H, alpha, gamma, lam, tp_value(model, gamma), tuple(pls_basis(model, p)), bp, model.slope
    )


def population_slope_approximation(model: SpectralModel, p: int) -> Curve:
    """``b_p = sum_j gamma_j K^j(b)``."""
    gamma = _gamma(model, p)
    return Curve(model.grid, gamma @ np.stack([c.values for c in population_krylov(model, p)]))


def _k_projection(K: Kernel, target: Curve, basis: Sequence[Curve]) -> Curve:
    """K-orthogonal projection of ``target`` onto ``span(basis)``."""
    if not basis:
        return Curve.zeros(target.grid)
    G = np.array([[k_bilinear(u, v, K) for v in basis] for u in basis])
    g = np.array([k_bilinear(u, target, K) for u in basis])
    coef = np.linalg.solve(G, g)
    return Curve(target.grid, coef @ np.stack([u.values for u in basis]))


def pls_objective(model: SpectralModel, previous: Sequence[Curve], w: Curve) -> float:
    """``cov{Y - g_{p-1}(X), int X w}`` with ``g_{p-1}`` fitted on ``previous``.

    For the population this equals ``<b - b_{p-1}, w>_K`` where ``b_{p-1}`` is the
    K-orthogonal projection of ``b`` onto ``span(previous)``.
    """
    K = population_kernel(model)
    b = model.slope
    residual = b - _k_projection(K, b, previous)
    return k_bilinear(residual, w, K)


def pls_basis(model: SpectralModel, p: int) -> list[Curve]:
    """The first ``p`` population PLS basis functions, built one at a time.

    ``psi_q = c_0 [K(b - sum_j (int b psi_j) psi_j) + sum_k c_k psi_k]`` where the
    ``c_k`` make ``psi_q`` K-orthogonal to its predecessors and ``c_0`` gives it
    unit K-norm, signed so that the covariance criterion is positive.

    Raises
    ------
    RankError
        If a candidate direction has vanishing K-norm.
    """
    if p > model.rank:
        raise SingularityError(f"p={p} exceeds model rank {model.rank}")
    K = population_kernel(model)
    b = model.slope
    # degeneracy is judged against the size of the first direction K(b)
    scale = k_norm(apply_kernel(K, b), K)
    psis: list[Curve] = []
    for q in range(1, p + 1):
        residual = b
        for psi in psis:
            residual = residual - float(np.sum(b.grid.weights * b.values * psi.values)) * psi
        cand = apply_kernel(K, residual)
        # the c_k solve is repeated once on the result to remove round-off left by the first pass
        for _ in range(2):
            if psis:
                G = np.array([[k_bilinear(u, v, K) for v in psis] for u in psis])
                rhs = -np.array([k_bilinear(u, cand, K) for u in psis])
                c = np.linalg.solve(G, rhs)
                cand = cand + Curve(b.grid, c @ np.stack([u.values for u in psis]))
        norm = k_norm(cand, K)
        if not norm > RANK_RTOL * scale or norm == 0.0:
            raise RankError(f"PLS direction {q} has vanishing K-norm", q)
        psi = cand / norm
        if pls_objective(model, psis, psi) < 0:
            psi = -psi
        psis.append(psi)
    return psis


def population_predictor(model: SpectralModel, p: int, x: Curve) -> float:
    """``g_p(x) = E(Y) + sum_j gamma_j int (x - EX) K^j(b)``."""
    bp = population_slope_approximation(model, p)
    w = model.grid.weights
    return float(model.mean_response() + np.sum(w * (x.values - model.mean_curve.values) * bp.values))
