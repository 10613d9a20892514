"""
Dense decomposition services.

SVD with an explicit rank decision, orthonormal bases for the row space and
null space of the active matrix, minimum-norm multiplier solves, and the
Cholesky factor used to whiten the quadratic term.
"""

from dataclasses import dataclass

import numpy as np
from scipy import linalg as sla

from .errors import InvalidInput, InvalidMatrix, NoActiveRows, NotPositiveDefinite

__all__ = [
    "DEFAULT_RANK_TOL",
    "NullBasis",
    "as_matrix",
    "svd_null_basis",
    "numerical_rank",
    "pinv_solve",
    "spd_factor",
    "tri_solve",
]

DEFAULT_RANK_TOL = 1e-12
DEFAULT_SYM_TOL = 1e-10


def as_matrix(a, cols=None, name="matrix"):
    """Coerce ``a`` to a finite 2-D float array.

    Empty inputs are reshaped to ``(0, cols)`` when ``cols`` is given so that
    constraint blocks with zero rows stack cleanly.
    """
    arr = np.asarray(a, dtype=float)
    if arr.size == 0 and cols is not None:
        return np.zeros((0, cols))
    if arr.ndim != 2:
        raise InvalidMatrix(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidMatrix(f"{name} has non-finite entries")
    return arr


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class NullBasis:
    """SVD-derived factors of an active matrix ``A0`` (s x n).

    Attributes
    ----------
    rank : int
        Numerical rank ``k``.
    range_basis : ndarray, shape (n, k)
        Right singular vectors of the retained singular values.
    null_basis : ndarray, shape (n, n - k)
        Orthonormal completion of ``range_basis``; spans ``Null(A0)``.
    left_vectors : ndarray, shape (s, k)
        Compact left singular vectors, so ``A0 = U diag(S) V_k^T``.
    singular_values : ndarray, shape (k,)
        Retained singular values, nonincreasing.
    full_left : ndarray, shape (s, s)
        Square left factor, for callers that want the full-SVD reading.
    sigma_max : float
        Largest singular value of ``A0`` (0 for an empty or zero matrix).
    """

    rank: int
    range_basis: np.ndarray
    null_basis: np.ndarray
    left_vectors: np.ndarray
    singular_values: np.ndarray
    full_left: np.ndarray
    sigma_max: float

    @property
    def n(self):
        return self.range_basis.shape[0]

    @property
    def rows(self):
        return self.left_vectors.shape[0]

    @property
    def nullity(self):
        return self.n - self.rank

    def null_projector(self):
        """Orthogonal projector ``V_{n-k} V_{n-k}^T`` onto ``Null(A0)``."""
        return self.null_basis @ self.null_basis.T

    def reconstruct(self):
        """Rebuild ``A0`` from the compact factors."""
        return (self.left_vectors * self.singular_values) @ self.range_basis.T


def svd_null_basis(A0, rank_tol=DEFAULT_RANK_TOL, n=None):
    """Compute row-space and null-space bases of ``A0`` with a rank decision.

    Singular values ``s_i > rank_tol * s_max`` are retained. A matrix with no
    rows (pass ``n``) or with all entries zero has rank 0 and its null basis is
    the identity.

    Parameters
    ----------
    A0 : array_like, shape (s, n)
        Stacked active constraint rows.
    rank_tol : float
        Relative singular value threshold.
    n : int, optional
        Column count, required only when ``A0`` has no rows.

    Returns
    -------
    NullBasis
    """
    if not rank_tol > 0:
        raise InvalidInput("rank_tol must be positive")
    A0 = np.asarray(A0, dtype=float)
    if A0.size == 0:
        cols = n if n is not None else (A0.shape[1] if A0.ndim == 2 else 0)
        A0 = np.zeros((0, cols))
    A0 = as_matrix(A0, name="A0")
    s, cols = A0.shape
    if s == 0:
        eye = np.eye(cols)
        return NullBasis(0, _frozen(np.zeros((cols, 0))), _frozen(eye),
                         _frozen(np.zeros((0, 0))), _frozen(np.zeros(0)),
                         _frozen(np.zeros((0, 0))), 0.0)

    U, sv, Vt = np.linalg.svd(A0, full_matrices=True)
    sigma_max = float(sv[0]) if sv.size else 0.0
    k = _rank_from_values(sv, rank_tol)
    V = Vt.T
    return NullBasis(
        rank=k,
        range_basis=_frozen(V[:, :k]),
        null_basis=_frozen(V[:, k:]),
        left_vectors=_frozen(U[:, :k]),
        singular_values=_frozen(sv[:k]),
        full_left=_frozen(U),
        sigma_max=sigma_max,
    )


def _rank_from_values(sv, rank_tol):
    if sv.size == 0 or sv[0] == 0.0:
        return 0
    return int(np.count_nonzero(sv > rank_tol * sv[0]))


def numerical_rank(A, rank_tol=DEFAULT_RANK_TOL):
    """Rank by the same rule as :func:`svd_null_basis`, from singular values only."""
    A = as_matrix(A, name="A")
    if A.shape[0] == 0:
        return 0
    return _rank_from_values(np.linalg.svd(A, compute_uv=False), rank_tol)


def pinv_solve(basis, rhs):
    """Minimum-norm least-squares solution of ``A0^T lam = rhs``.

    Uses ``lam = U diag(1/S) V_k^T rhs``.
    """
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (basis.n,):
        raise InvalidInput(f"rhs has shape {rhs.shape}, expected ({basis.n},)")
    if basis.rank == 0:
        raise NoActiveRows("active matrix has rank 0")
    return basis.left_vectors @ ((basis.range_basis.T @ rhs) / basis.singular_values)


def spd_factor(Q, sym_tol=DEFAULT_SYM_TOL):
    """Lower Cholesky factor ``L`` with ``Q = L L^T``.

    Raises
    ------
    NotPositiveDefinite
        If ``Q`` is not symmetric within ``sym_tol`` (relative to its largest
        entry) or a nonpositive pivot is met.
    """
    Q = as_matrix(Q, name="Q")
    if Q.shape[0] != Q.shape[1]:
        raise InvalidInput(f"Q must be square, got {Q.shape}")
    scale = max(1.0, float(np.max(np.abs(Q)))) if Q.size else 1.0
    if Q.size and np.max(np.abs(Q - Q.T)) > sym_tol * scale:
        raise NotPositiveDefinite("Q is not symmetric")
    try:
        L = sla.cholesky(Q, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    if np.any(np.diag(L) <= 0):
        raise NotPositiveDefinite("nonpositive pivot")
    return L


def tri_solve(L, rhs, transposed=False):
    """Solve ``L y = rhs`` (or ``L^T y = rhs``) by substitution.

    ``rhs`` may be a vector or a matrix of stacked right-hand sides.
    """
    L = np.asarray(L, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    if L.ndim != 2 or L.shape[0] != L.shape[1] or rhs.shape[:1] != L.shape[:1]:
        raise InvalidInput(f"cannot solve {L.shape} factor against rhs {rhs.shape}")
    return sla.solve_triangular(L, rhs, lower=True, trans="T" if transposed else "N")
