"""Partial least squares for scalar-on-function linear regression.

Curves live on a :class:`Grid` with quadrature weights; every integral is a
weighted sum. The fitting entry points are :func:`fit_apls`,
:func:`fit_classic` and :func:`fit_pca`; :mod:`funpls.oracle` holds the
population quantities used to check them and :mod:`funpls.simbench` the
Monte Carlo harness.
"""

from .aplsfit import (
    AplsDiagnostics,
    AplsModel,
    build_h_hat,
    build_h_tilde,
    fit_apls,
    fit_apls_ortho,
    fit_apls_qr,
    fit_apls_raw,
    predict,
)
from .covest import KrylovSequence, empirical_covariance, empirical_cross_covariance, krylov_sequence
from .errors import (
    FunplsError,
    GridMismatchError,
    IllConditionedError,
    NotPSDError,
    RankError,
    SingularityError,
    SpecError,
)
from .funcore import (
    Curve,
    Dataset,
    Grid,
    Kernel,
    apply_kernel,
    center,
    inner_product,
    k_bilinear,
    k_norm,
    l2_norm,
    trapezoid_grid,
    uniform_grid,
)
from .mgs import KernelProduct, L2Product, euclidean, modified_gram_schmidt
from .oracle import SpectralModel, population_h_gamma, population_kernel, population_krylov, pls_basis
from .pcareg import EigenSystem, PcaModel, eigendecompose, fit_pca, predict_pca
from .plsclassic import ClassicPlsModel, fit_classic, predict_classic

__version__ = "0.1.0"
