import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from asqp.errors import InvalidInput, InvalidMatrix, NoActiveRows, NotPositiveDefinite
from asqp.linalg import pinv_solve, spd_factor, svd_null_basis, tri_solve


def qr_null_space(A):
    """Independent null-space basis from a full QR of A^T."""
    k = np.linalg.matrix_rank(A)
    Qf, _ = sla.qr(A.T)
    return Qf[:, k:]


def span_equal(U, V):
    return np.allclose(U @ U.T, V @ V.T, atol=1e-12)


def test_axis_rows_null_space_is_third_axis():
    nb = svd_null_basis([[1, 0, 0], [0, 1, 0]])
    assert nb.rank == 2
    assert span_equal(nb.null_basis, np.array([[0.0], [0.0], [1.0]]))


def test_duplicate_direction_is_rank_one():
    nb = svd_null_basis([[1, 0], [2, 0]])
    assert nb.rank == 1
    assert span_equal(nb.null_basis, np.array([[0.0], [1.0]]))


def test_random_full_rank_against_qr(rng):
    A = rng.standard_normal((3, 5))
    nb = svd_null_basis(A)
    assert nb.rank == 3
    assert np.linalg.norm(A @ nb.null_basis) <= 1e-12 * nb.sigma_max
    assert span_equal(nb.null_basis, qr_null_space(A))


def test_zero_and_empty_matrices_have_full_null_space():
    nb = svd_null_basis(np.zeros((2, 3)))
    assert nb.rank == 0 and nb.null_basis.shape == (3, 3)
    nb = svd_null_basis(np.zeros((0, 4)))
    assert nb.rank == 0 and np.allclose(nb.null_basis, np.eye(4))
    nb = svd_null_basis([], n=3)
    assert nb.null_basis.shape == (3, 3)


def test_rank_tol_controls_decision():
    A = np.diag([1.0, 1e-9])
    assert svd_null_basis(A).rank == 2
    assert svd_null_basis(A, rank_tol=1e-6).rank == 1
    with pytest.raises(InvalidInput):
        svd_null_basis(A, rank_tol=0)


def test_non_finite_rejected():
    with pytest.raises(InvalidMatrix):
        svd_null_basis([[1.0, np.nan]])


def test_full_left_factor_is_square(rng):
    A = rng.standard_normal((4, 6))
    A[3] = A[0] + A[1]
    nb = svd_null_basis(A)
    assert nb.rank == 3
    assert nb.full_left.shape == (4, 4)
    assert nb.left_vectors.shape == (4, 3)
    assert np.allclose(nb.full_left[:, :3], nb.left_vectors)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), s=st.integers(1, 8), n=st.integers(1, 10))
def test_basis_invariants(seed, s, n):
    A = np.random.default_rng(seed).standard_normal((s, n))
    nb = svd_null_basis(A)
    Vk, Vn = nb.range_basis, nb.null_basis
    assert np.allclose(Vk.T @ Vk, np.eye(nb.rank), atol=1e-12)
    assert np.allclose(Vn.T @ Vn, np.eye(n - nb.rank), atol=1e-12)
    assert np.allclose(Vk.T @ Vn, 0, atol=1e-12)
    assert np.all(np.diff(nb.singular_values) <= 0)
    assert np.linalg.norm(nb.reconstruct() - A) <= 1e-10 * max(1.0, nb.sigma_max)
    PN = nb.null_projector()
    assert np.linalg.norm(PN @ PN - PN) <= 1e-10
    assert np.allclose(PN + Vk @ Vk.T, np.eye(n), atol=1e-10)


def test_pinv_identity_and_scalar():
    assert np.allclose(pinv_solve(svd_null_basis(np.eye(2)), [-1, 2]), [-1, 2])
    assert np.allclose(pinv_solve(svd_null_basis([[2.0, 0.0]]), [4, 0]), [2])


def test_pinv_against_normal_equations(rng):
    A0 = rng.standard_normal((4, 7))
    rhs = A0.T @ rng.standard_normal(4)
    lam = pinv_solve(svd_null_basis(A0), rhs)
    ref = np.linalg.solve(A0 @ A0.T, A0 @ rhs)
    assert np.linalg.norm(A0.T @ lam - rhs) <= 1e-10 * np.linalg.norm(rhs)
    assert np.allclose(lam, ref, atol=1e-10)


def test_pinv_minimum_norm(rng):
    A0 = rng.standard_normal((4, 3)) @ rng.standard_normal((3, 6))
    nb = svd_null_basis(A0)
    rhs = rng.standard_normal(6)
    lam = pinv_solve(nb, rhs)
    cokernel = nb.full_left[:, nb.rank:]
    assert cokernel.shape[1] == 1
    assert np.allclose(A0.T @ cokernel, 0, atol=1e-10)
    for t in (1e-3, -0.5, 2.0):
        assert np.linalg.norm(lam + t * cokernel[:, 0]) > np.linalg.norm(lam)


def test_pinv_errors():
    with pytest.raises(NoActiveRows):
        pinv_solve(svd_null_basis(np.zeros((1, 2))), [1, 1])
    with pytest.raises(InvalidInput):
        pinv_solve(svd_null_basis(np.eye(2)), [1, 1, 1])


def test_spd_factor_examples(rng):
    assert np.allclose(spd_factor(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]))
    assert np.allclose(spd_factor(np.eye(5)), np.eye(5))
    M = rng.standard_normal((5, 5))
    Q = M.T @ M + np.eye(5)
    L = spd_factor(Q)
    assert np.allclose(L, np.tril(L)) and np.all(np.diag(L) > 0)
    assert np.linalg.norm(L @ L.T - Q) <= 1e-12 * np.linalg.norm(Q)


def test_spd_factor_rejects_indefinite_and_asymmetric():
    with pytest.raises(NotPositiveDefinite):
        spd_factor(np.diag([1.0, -1.0]))
    with pytest.raises(NotPositiveDefinite):
        spd_factor([[1.0, 0.5], [0.0, 1.0]])


def test_tri_solve_examples(rng):
    L = np.diag([2.0, 3.0])
    assert np.allclose(tri_solve(L, [2, 3]), [1, 1])
    v = rng.standard_normal(4)
    assert np.allclose(tri_solve(np.eye(4), v), v)
    M = rng.standard_normal((6, 6))
    L = spd_factor(M @ M.T + np.eye(6))
    rhs = rng.standard_normal(6)
    assert np.linalg.norm(L @ tri_solve(L, rhs) - rhs) <= 1e-13
    assert np.linalg.norm(L.T @ tri_solve(L, rhs, transposed=True) - rhs) <= 1e-13
    with pytest.raises(InvalidInput):
        tri_solve(L, rhs[:3])


@pytest.mark.parametrize("n", [1, 5, 20])
def test_factor_then_two_solves_is_inverse(rng, n):
    M = rng.standard_normal((n, n))
    Q = M.T @ M + np.eye(n)
    rhs = rng.standard_normal(n)
    L = spd_factor(Q)
    y = tri_solve(L, tri_solve(L, rhs), transposed=True)
    ref = np.linalg.solve(Q, rhs)
    assert np.linalg.norm(y - ref) <= 1e-10 * np.linalg.norm(ref)


def test_numerical_rank_agrees_with_basis(rng):
    from asqp.linalg import numerical_rank
    for _ in range(50):
        A = rng.standard_normal((5, 3)) @ rng.standard_normal((3, 7))
        assert numerical_rank(A) == svd_null_basis(A).rank == 3
    assert numerical_rank(np.zeros((0, 4))) == 0
    assert numerical_rank(np.zeros((2, 4))) == 0
