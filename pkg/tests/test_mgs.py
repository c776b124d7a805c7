import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from funpls import KernelProduct, L2Product, RankError, euclidean, modified_gram_schmidt, uniform_grid
from funpls.funcore import Kernel
from funpls.metrics import gram_defect


def classical_gs(V):
    """Textbook classical Gram-Schmidt in double precision (projections use the original vector)."""
    U = np.zeros_like(V)
    for j, v in enumerate(V):
        u = v - sum((v @ U[i]) * U[i] for i in range(j)) if j else v.copy()
        U[j] = u / np.linalg.norm(u)
    return U


def classical_gs_mp(V, dps=50):
    """Classical Gram-Schmidt carried out with ``dps`` decimal digits."""
    with mpmath.workdps(dps):
        rows = [[mpmath.mpf(float(x)) for x in v] for v in V]
        out = []
        for v in rows:
            u = list(v)
            for q in out:
                r = mpmath.fsum(a * b for a, b in zip(v, q))
                u = [a - r * b for a, b in zip(u, q)]
            nrm = mpmath.sqrt(mpmath.fsum(a * a for a in u))
            out.append([a / nrm for a in u])
        return np.array([[float(a) for a in u] for u in out])


def ill_conditioned(p=8, d=40, gram_cond=1e10, seed=0):
    r = np.random.default_rng(seed)
    Q1, _ = np.linalg.qr(r.standard_normal((p, p)))
    Q2, _ = np.linalg.qr(r.standard_normal((d, p)))
    s = np.logspace(0, -0.5 * np.log10(gram_cond), p)
    return (Q1 * s) @ Q2.T


def test_orthonormal_input_is_reproduced(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((10, 4)))
    U, R = modified_gram_schmidt(Q.T)
    np.testing.assert_allclose(np.abs(U), np.abs(Q.T), atol=1e-14)
    np.testing.assert_allclose(R, np.eye(4), atol=1e-14)


def test_two_vector_projection():
    v = np.array([3.0, 0.0, 0.0])
    w = np.array([0.0, 2.0, 0.0])
    U, R = modified_gram_schmidt(np.stack([v, v + w]))
    np.testing.assert_array_equal(U, [[1, 0, 0], [0, 1, 0]])
    np.testing.assert_array_equal(R, [[3, 3], [0, 2]])


def test_random_family_against_extended_precision_classical(rng):
    V = rng.standard_normal((5, 20))
    U, R = modified_gram_schmidt(V)
    assert gram_defect(U) <= 1e-12
    np.testing.assert_allclose(U, classical_gs_mp(V), atol=1e-8)
    np.testing.assert_allclose(R.T @ U, V, atol=1e-12)
    assert np.allclose(R, np.triu(R))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.floats(0, 7))
def test_orthonormality_and_span(seed, p, log_cond):
    V = ill_conditioned(p=p, d=25, gram_cond=10**log_cond, seed=seed)
    U, R = modified_gram_schmidt(V)
    assert gram_defect(U) <= 1e-10
    for j in range(1, p + 1):
        # project v_j on span(u_1..u_j)
        proj = (V[j - 1] @ U[:j].T) @ U[:j]
        assert np.linalg.norm(proj - V[j - 1]) <= 1e-8 * np.linalg.norm(V[j - 1])


def test_stability_superiority_over_classical():
    V = ill_conditioned(p=8, d=40, gram_cond=1e10, seed=3)
    G = V @ V.T
    assert 1e9 < np.linalg.cond(G) < 1e11
    def off_diag(U):
        D = np.abs(U @ U.T)
        return np.max(D - np.diag(np.diag(D)))
    mgs_defect = off_diag(modified_gram_schmidt(V)[0])
    cgs_defect = off_diag(classical_gs(V))
    assert mgs_defect * 10 <= cgs_defect


def test_rank_error_names_offending_vector(rng):
    a, b = rng.standard_normal(6), rng.standard_normal(6)
    with pytest.raises(RankError) as info:
        modified_gram_schmidt(np.stack([a, b, 2 * a - b, a]))
    assert info.value.index == 3
    with pytest.raises(RankError) as info:
        modified_gram_schmidt(np.zeros((1, 4)))
    assert info.value.index == 1


def test_semidefinite_kernel_product_raises_not_nan(rng):
    g = uniform_grid(12)
    B = rng.standard_normal((12, 2))
    sp = KernelProduct(Kernel(g, B @ B.T))
    V = rng.standard_normal((3, 12))
    with pytest.raises(RankError) as info:
        modified_gram_schmidt(V, sp)
    assert info.value.index == 3


def test_l2_product_orthonormalizes_under_quadrature(rng):
    g = uniform_grid(30)
    sp = L2Product(g)
    V = rng.standard_normal((4, 30))
    U, R = modified_gram_schmidt(V, sp)
    assert gram_defect(U, sp) <= 1e-12
    np.testing.assert_allclose(R.T @ U, V, atol=1e-12)
    assert euclidean(U[0], U[0]) != pytest.approx(1.0)
