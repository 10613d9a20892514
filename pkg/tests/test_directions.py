import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from asqp.bench import GeneratorSpec, generate
from asqp.directions import (
    direction_kkt,
    direction_projection,
    direction_sphere,
    multipliers_at_stationary,
    whiten_problem,
)
from asqp.errors import EmptyNullSpace, InvalidInput, NotPositiveDefinite, RankDeficientWorkingSet
from asqp.linalg import svd_null_basis
from asqp.model import QpProblem, Residual

from helpers import random_direction_case, rel_err, white


def spd(rng, n):
    M = rng.standard_normal((n, n))
    return M.T @ M + np.eye(n)


# -- whitening ---------------------------------------------------------------

def test_whiten_identity_leaves_data():
    p = QpProblem(np.eye(3), [1, 2, 3], A=[[1, 0, 1]], b=[1], G=[[0, 1, 0]], h=[2])
    w = whiten_problem(p)
    assert np.array_equal(w.L, np.eye(3))
    assert np.allclose(w.q_tilde, p.q) and np.allclose(w.A_tilde, p.A) and np.allclose(w.G_tilde, p.G)


def test_whiten_diagonal():
    w = whiten_problem(QpProblem(np.diag([4.0, 9.0]), [2, 3]))
    assert np.allclose(w.q_tilde, [1, 1])


def test_whiten_random_objective_and_constraints(rng):
    n = 6
    Q = spd(rng, n)
    p = QpProblem(Q, rng.standard_normal(n), rng.standard_normal((2, n)), np.zeros(2),
                  rng.standard_normal((3, n)), np.zeros(3))
    w = whiten_problem(p)
    for _ in range(20):
        x = rng.standard_normal(n)
        xt = w.to_whitened(x)
        ref = p.objective(x)
        assert abs(w.objective(xt) - ref) <= 1e-10 * max(1.0, abs(ref))
        assert np.allclose(w.A_tilde @ xt, p.A @ x, atol=1e-10)
        assert np.allclose(w.G_tilde @ xt, p.G @ x, atol=1e-10)
        assert np.linalg.norm(w.from_whitened(xt) - x) <= 1e-12 * np.linalg.norm(x)


def test_whiten_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        whiten_problem(QpProblem(np.diag([1.0, -2.0]), [0, 0]))


# -- KKT baseline ------------------------------------------------------------

def test_kkt_small_example():
    # independent check: the 3x3 saddle system solved directly
    K = np.array([[1.0, 0, 1], [0, 1, 0], [1, 0, 0]])
    ref = np.linalg.solve(K, [-2.0, -3.0, 0.0])
    assert np.allclose(ref, [0, -3, -2])
    P, lam = direction_kkt(np.eye(2), [[1, 0]], Residual(np.array([2.0, 3.0])))
    assert np.allclose(P, [0, -3]) and np.allclose(lam, [-2])


def test_kkt_square_active_matrix(rng):
    A0 = rng.standard_normal((4, 4))
    P, _ = direction_kkt(spd(rng, 4), A0, rng.standard_normal(4))
    assert np.linalg.norm(P) <= 1e-12


def test_kkt_unconstrained_newton_step():
    P, lam = direction_kkt(2 * np.eye(2), np.zeros((0, 2)), np.array([1.0, -4.0]))
    assert np.allclose(P, [-0.5, 2.0]) and lam.size == 0


def test_kkt_singular_raises():
    with pytest.raises(RankDeficientWorkingSet):
        direction_kkt(np.eye(2), [[1, 0], [2, 0]], np.ones(2))


def test_kkt_rejects_whitened_residual():
    with pytest.raises(InvalidInput):
        direction_kkt(np.eye(2), [[1, 0]], white([1, 1]))


# -- projection --------------------------------------------------------------

def test_projection_examples():
    assert np.allclose(direction_projection(svd_null_basis([[1, 0]]), white([2, 3])), [0, -3])
    assert np.allclose(direction_projection(svd_null_basis([[1, 1]]), white([1, 1])), [0, 0])


def test_projection_matches_kkt_random(rng):
    A0 = rng.standard_normal((4, 9))
    r0 = rng.standard_normal(9)
    P = direction_projection(svd_null_basis(A0), white(r0))
    Pk, _ = direction_kkt(np.eye(9), A0, r0)
    assert rel_err(P, Pk, r0) <= 1e-9
    assert np.linalg.norm(A0 @ P) <= 1e-9 * np.linalg.norm(P) * np.linalg.norm(A0, 2)


def test_projection_full_rank_is_zero(rng):
    A0 = rng.standard_normal((5, 5))
    assert np.array_equal(direction_projection(svd_null_basis(A0), white(rng.standard_normal(5))),
                          np.zeros(5))


# -- sphere ------------------------------------------------------------------

def test_sphere_one_dimensional_table_form():
    nb = svd_null_basis([[1.0, 0.0]])
    r0 = 3.0 * nb.null_basis[:, 0]
    P, sol = direction_sphere(nb, white(r0))
    assert sol.C == pytest.approx([1.5])
    assert sol.Z == pytest.approx([-3.0])
    assert np.allclose(sol.Z, -2 * sol.C)
    assert sol.theta is None
    assert np.allclose(P, -r0)


def test_sphere_zero_residual():
    P, sol = direction_sphere(svd_null_basis([[1.0, 0.0, 0.0]]), white(np.zeros(3)))
    assert not np.any(P) and not np.any(sol.Z)
    assert sol.theta == 0.0


def test_sphere_two_dimensional(rng):
    A0 = rng.standard_normal((3, 5))
    nb = svd_null_basis(A0)
    r0 = rng.standard_normal(5)
    P, sol = direction_sphere(nb, white(r0))
    assert sol.on_sphere_gap() <= 1e-12
    assert np.linalg.norm(P - direction_projection(nb, white(r0))) <= 1e-12
    # the reported angle reproduces Z on the + branch of Z = -C +/- ||C|| (cos, sin)
    u = np.array([math.cos(sol.theta), math.sin(sol.theta)])
    assert np.allclose(-sol.C + np.linalg.norm(sol.C) * u, sol.Z, atol=1e-12)


def test_sphere_empty_null_space(rng):
    with pytest.raises(EmptyNullSpace):
        direction_sphere(svd_null_basis(rng.standard_normal((3, 3))), white(np.ones(3)))


# -- multipliers -------------------------------------------------------------

def test_multipliers_examples():
    assert np.allclose(multipliers_at_stationary(svd_null_basis(np.eye(2)), white([1, -2])), [-1, 2])
    A0 = np.array([[-1.0, 0.0]])
    lam = multipliers_at_stationary(svd_null_basis(A0), white([1, 0]))
    assert np.allclose(A0.T @ lam, [-1, 0]) and lam == pytest.approx([1.0])
    lam = multipliers_at_stationary(svd_null_basis([[1.0, 0.0]]), white([0, 5]))
    assert lam == pytest.approx([0.0])


# -- properties --------------------------------------------------------------

@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_scheme_equivalence_and_certificates(seed):
    A0, r0 = random_direction_case(seed)
    n = r0.size
    nb = svd_null_basis(A0, n=n)
    Pp = direction_projection(nb, white(r0))
    Pk, _ = direction_kkt(np.eye(n), A0, r0)
    assert rel_err(Pp, Pk, r0) <= 1e-9
    sigma = nb.sigma_max
    assert np.all(np.abs(A0 @ Pp) <= 1e-9 * sigma * np.linalg.norm(Pp) + 0.0)
    if nb.nullity:
        Ps, sol = direction_sphere(nb, white(r0))
        assert rel_err(Ps, Pp, r0) <= 1e-10
        assert sol.on_sphere_gap() <= 1e-10 * max(1.0, np.linalg.norm(sol.C))
        r_red = 2 * sol.C
        assert abs(sol.Z @ sol.Z + r_red @ sol.Z) <= 1e-10 * max(1.0, sol.Z @ sol.Z)
        if np.any(Pp):
            assert r0 @ Pp < 0
            assert r0 @ Pp == pytest.approx(-np.linalg.norm(nb.null_basis.T @ r0) ** 2, rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), col=st.integers(0, 100))
def test_sign_flip_invariance(seed, col):
    A0, r0 = random_direction_case(seed, n_max=15)
    nb = svd_null_basis(A0, n=r0.size)
    if nb.nullity == 0:
        return
    V = np.array(nb.null_basis)
    V[:, col % nb.nullity] *= -1
    flipped = dataclasses.replace(nb, null_basis=V)
    assert np.linalg.norm(direction_projection(nb, white(r0)) - direction_projection(flipped, white(r0))) <= 1e-12
    assert np.linalg.norm(direction_sphere(nb, white(r0))[0] - direction_sphere(flipped, white(r0))[0]) <= 1e-12


@pytest.mark.parametrize("seed", range(10))
def test_whitened_pipeline_matches_kkt(seed):
    p = next(generate(GeneratorSpec((5, 25), 2, 6, seed=seed)))
    rng = np.random.default_rng(seed)
    rows = rng.choice(p.r, size=min(3, p.r), replace=False)
    A0 = np.vstack([p.A, p.G[rows]])
    x = rng.standard_normal(p.n)
    r0 = Residual.at(p.Q, p.q, x)
    Pk, _ = direction_kkt(p.Q, A0, r0)
    w = whiten_problem(p)
    A0w = np.vstack([w.A_tilde, w.G_tilde[rows]])
    Pt = direction_projection(svd_null_basis(A0w), w.residual(w.to_whitened(x)))
    P = w.from_whitened(Pt)
    assert rel_err(P, Pk, r0.vector) <= 1e-8
