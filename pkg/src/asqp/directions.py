"""
Direction-finding engines for the equality-constrained subproblem

    min 1/2 P^T Q P + (Q x + q)^T P   s.t.  A0 P = 0.

Three interchangeable routes are provided:

* ``direction_kkt`` factors the full saddle-point matrix (the baseline);
* ``direction_projection`` projects the negative residual onto ``Null(A0)``;
* ``direction_sphere`` works in the reduced ``n - k`` coordinates, where the
  stationarity condition is the sphere ``||Z + C|| = ||C||``.

The last two are exact only for an identity quadratic term, so they expect a
problem brought to that form by :func:`whiten_problem`.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import EmptyNullSpace, InvalidInput, RankDeficientWorkingSet
from .linalg import as_matrix, pinv_solve, spd_factor, tri_solve
from .model import Residual

__all__ = [
    "WhitenedProblem",
    "SphereSolution",
    "whiten_problem",
    "direction_kkt",
    "direction_projection",
    "direction_sphere",
    "multipliers_at_stationary",
]

# pivots below this fraction of the largest one mark the KKT matrix singular
_KKT_PIVOT_TOL = 1e-13


def _residual(r0, expect=None):
    if isinstance(r0, Residual):
        if expect is not None and r0.space != expect:
            raise InvalidInput(f"residual lives in {r0.space} space, expected {expect}")
        return np.asarray(r0.vector, dtype=float)
    return np.asarray(r0, dtype=float)


@dataclass(frozen=True, eq=False)
class WhitenedProblem:
    """A problem rewritten in ``x~ = L^T x`` coordinates, where ``Q = L L^T``.

    The objective becomes ``1/2 x~^T x~ + q~^T x~`` and the constraint blocks
    become ``A L^-T`` and ``G L^-T`` with unchanged right-hand sides.
    """

    L: np.ndarray
    q_tilde: np.ndarray
    A_tilde: np.ndarray
    G_tilde: np.ndarray
    b: np.ndarray
    h: np.ndarray

    @property
    def n(self):
        return self.L.shape[0]

    def to_whitened(self, x):
        """``x~ = L^T x``."""
        return self.L.T @ np.asarray(x, dtype=float)

    def from_whitened(self, x_tilde):
        """``x = L^-T x~``; also maps whitened directions back."""
        return tri_solve(self.L, x_tilde, transposed=True)

    def objective(self, x_tilde):
        x_tilde = np.asarray(x_tilde, dtype=float)
        return float(0.5 * x_tilde @ x_tilde + self.q_tilde @ x_tilde)

    def residual(self, x_tilde):
        return Residual.whitened(np.asarray(x_tilde, dtype=float), self.q_tilde)


def whiten_problem(problem):
    """Eliminate ``Q`` by the Cholesky change of variable ``x~ = L^T x``.

    Raises
    ------
    NotPositiveDefinite
        Propagated from :func:`asqp.linalg.spd_factor`.
    """
    L = spd_factor(problem.Q)
    q_tilde = tri_solve(L, problem.q)
    # G L^-T = (L^-1 G^T)^T
    A_tilde = tri_solve(L, problem.A.T).T if problem.m else np.zeros((0, problem.n))
    G_tilde = tri_solve(L, problem.G.T).T if problem.r else np.zeros((0, problem.n))
    return WhitenedProblem(L, q_tilde, A_tilde, G_tilde, problem.b, problem.h)


def direction_kkt(Q, A0, r0):
    """Solve ``[[Q, A0^T], [A0, 0]] (P, lam) = (-r0, 0)`` by dense LU.

    Returns
    -------
    P : ndarray, shape (n,)
    lam : ndarray, shape (s,)

    Raises
    ------
    RankDeficientWorkingSet
        If the saddle-point matrix is numerically singular.
    """
    Q = as_matrix(Q, name="Q")
    n = Q.shape[0]
    A0 = as_matrix(A0, cols=n, name="A0")
    r0 = _residual(r0, "original")
    s = A0.shape[0]
    K = np.zeros((n + s, n + s))
    K[:n, :n] = Q
    K[:n, n:] = A0.T
    K[n:, :n] = A0
    rhs = np.concatenate([-r0, np.zeros(s)])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(K, check_finite=False)
    d = np.abs(np.diag(lu))
    if d.min() <= _KKT_PIVOT_TOL * d.max():
        raise RankDeficientWorkingSet("KKT matrix is singular")
    sol = sla.lu_solve((lu, piv), rhs, check_finite=False)
    return sol[:n], sol[n:]


def direction_projection(basis, r0):
    """``P = -V_{n-k} V_{n-k}^T r0`` in whitened coordinates."""
    r0 = _residual(r0, "whitened")
    V = basis.null_basis
    return -(V @ (V.T @ r0))


@dataclass(frozen=True)
class SphereSolution:
    """Reduced-variable solution of ``Z^T Z = -r~^T Z``.

    ``Z`` is the selected point of the sphere ``||Z + C|| = ||C||`` with
    ``C = r~ / 2``. For a two-dimensional null space ``theta`` parameterises it
    as ``Z = -C + ||C|| (cos theta, sin theta)``.
    """

    C: np.ndarray
    Z: np.ndarray
    theta: float = None

    def on_sphere_gap(self):
        return abs(np.linalg.norm(self.Z + self.C) - np.linalg.norm(self.C))


def direction_sphere(basis, r0):
    """Direction from the reduced sphere characterisation.

    The KKT point of the sphere is ``Z = -2C``; for ``n - k = 2`` the angle of
    that point is reported too.

    Raises
    ------
    EmptyNullSpace
        When ``n - k = 0``; the caller should use ``P = 0``.
    """
    r0 = _residual(r0, "whitened")
    V = basis.null_basis
    if V.shape[1] == 0:
        raise EmptyNullSpace("null space of the active matrix is {0}")
    r_red = V.T @ r0
    C = 0.5 * r_red
    Z = -2.0 * C
    theta = None
    if V.shape[1] == 2:
        # Z + C = -C = ||C|| (cos, sin); undefined direction at C = 0, any angle works
        theta = math.atan2(-C[1], -C[0]) if np.any(C) else 0.0
    return V @ Z, SphereSolution(C, Z, theta)


def multipliers_at_stationary(basis, r0):
    """Least-squares multipliers from ``A0^T lam = -r0`` at a stationary point.

    Ordered like the rows of the active matrix (equalities, then working set).
    """
    return pinv_solve(basis, -_residual(r0))
