"""
Problem representation and working-set bookkeeping.

A :class:`QpProblem` holds ``min 1/2 x^T Q x + q^T x  s.t.  A x = b, G x <= h``
together with an optional starting point. The working set is the ordered list
of inequality rows currently held at equality; stacked under ``A`` it forms the
active matrix ``A0`` that the direction schemes operate on.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleStart, InvalidInput, ProblemFormatError
from .linalg import DEFAULT_RANK_TOL, DEFAULT_SYM_TOL, numerical_rank

__all__ = [
    "DEFAULT_FEAS_TOL",
    "QpProblem",
    "Violation",
    "WorkingSet",
    "Residual",
    "validate",
    "initial_working_set",
    "stack_active",
    "feasibility_margin",
    "resolve_start",
    "objective",
    "problem_from_dict",
    "problem_to_dict",
    "load_problem",
    "save_problem",
]

DEFAULT_FEAS_TOL = 1e-8


def _vec(v):
    return np.asarray(v, dtype=float).reshape(-1)


def _mat(a, n):
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        return np.zeros((0, n))
    return np.atleast_2d(a)


@dataclass(frozen=True, eq=False)
class QpProblem:
    """A dense convex QP instance.

    Inputs are coerced to float arrays; empty ``A``/``G`` become ``(0, n)``
    blocks. Consistency is not enforced here, see :func:`validate`.
    """

    Q: np.ndarray
    q: np.ndarray
    A: np.ndarray = None
    b: np.ndarray = None
    G: np.ndarray = None
    h: np.ndarray = None
    x0: np.ndarray = None

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        n = Q.shape[1]
        set_ = object.__setattr__
        set_(self, "Q", Q)
        set_(self, "q", _vec(self.q))
        set_(self, "A", _mat(self.A if self.A is not None else [], n))
        set_(self, "b", _vec(self.b if self.b is not None else []))
        set_(self, "G", _mat(self.G if self.G is not None else [], n))
        set_(self, "h", _vec(self.h if self.h is not None else []))
        if self.x0 is not None:
            set_(self, "x0", _vec(self.x0))
        for name in ("Q", "q", "A", "b", "G", "h", "x0"):
            arr = getattr(self, name)
            if arr is not None:
                arr.flags.writeable = False

    @property
    def n(self):
        return self.Q.shape[1]

    @property
    def m(self):
        return self.A.shape[0]

    @property
    def r(self):
        return self.G.shape[0]

    def objective(self, x):
        return objective(self, x)

    def replace(self, **changes):
        kw = {k: getattr(self, k) for k in ("Q", "q", "A", "b", "G", "h", "x0")}
        kw.update(changes)
        return QpProblem(**kw)


def objective(problem, x):
    """``1/2 x^T Q x + q^T x``."""
    x = np.asarray(x, dtype=float)
    return float(0.5 * x @ (problem.Q @ x) + problem.q @ x)


@dataclass(frozen=True)
class Violation:
    """One failed problem invariant."""

    kind: str
    field: str
    residual: float
    row: int = None

    def __str__(self):
        where = f" row {self.row}" if self.row is not None else ""
        return f"{self.kind} in {self.field}{where} (residual {self.residual:.3g})"


def validate(problem, tol=DEFAULT_FEAS_TOL, sym_tol=DEFAULT_SYM_TOL):
    """Check dimensions, finiteness, symmetry of ``Q`` and feasibility of ``x0``.

    Positive definiteness is not checked here; it is caught when the solver
    factors ``Q``.

    Returns
    -------
    list of Violation
        Empty if the problem is well formed.
    """
    out = []
    p = problem
    n = p.n
    shapes = {
        "Q": (p.Q.shape, (n, n)),
        "q": (p.q.shape, (n,)),
        "A": (p.A.shape, (p.A.shape[0], n)),
        "b": (p.b.shape, (p.A.shape[0],)),
        "G": (p.G.shape, (p.G.shape[0], n)),
        "h": (p.h.shape, (p.G.shape[0],)),
    }
    if p.x0 is not None:
        shapes["x0"] = (p.x0.shape, (n,))
    for name, (got, want) in shapes.items():
        if got != want:
            out.append(Violation("DimensionMismatch", name, float(abs(np.prod(got) - np.prod(want)))))
    for name in ("Q", "q", "A", "b", "G", "h", "x0"):
        arr = getattr(p, name)
        if arr is not None and not np.all(np.isfinite(arr)):
            out.append(Violation("NonFinite", name, float("nan")))
    if out:
        return out

    asym = np.abs(p.Q - p.Q.T)
    scale = max(1.0, float(np.max(np.abs(p.Q)))) if p.Q.size else 1.0
    if asym.size and asym.max() > sym_tol * scale:
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        out.append(Violation("SymmetryViolation", "Q", float(asym[i, j]), row=int(min(i, j))))

    if p.x0 is not None:
        if p.m:
            eq = np.abs(p.A @ p.x0 - p.b)
            for i in np.flatnonzero(eq > tol):
                out.append(Violation("InfeasibleStart", "b", float(eq[i]), row=int(i)))
        if p.r:
            ineq = p.G @ p.x0 - p.h
            for i in np.flatnonzero(ineq > tol):
                out.append(Violation("InfeasibleStart", "h", float(ineq[i]), row=int(i)))
    return out


def feasibility_margin(problem, x):
    """Return ``(||A x - b||_inf, max(0, max_i G_i x - h_i))``."""
    x = np.asarray(x, dtype=float)
    eq = float(np.max(np.abs(problem.A @ x - problem.b))) if problem.m else 0.0
    ineq = float(max(0.0, np.max(problem.G @ x - problem.h))) if problem.r else 0.0
    return eq, ineq


def resolve_start(problem, tol=DEFAULT_FEAS_TOL):
    """Pick the starting point: ``x0`` if given, else the origin when it is
    trivially feasible (no equalities and ``h >= 0``)."""
    if problem.x0 is not None:
        return np.array(problem.x0)
    if problem.m == 0 and np.all(problem.h >= -tol):
        return np.zeros(problem.n)
    raise InfeasibleStart("no starting point: supply x0 (no Phase-I is available)")


@dataclass(frozen=True)
class WorkingSet:
    """Ordered inequality rows held at equality.

    ``capacity`` is ``n - m``, the largest number of inequality rows that can
    join the equalities without exceeding ``n`` stacked rows.
    """

    active: tuple = ()
    capacity: int = 0

    includes_equalities = True

    def __post_init__(self):
        act = tuple(int(i) for i in self.active)
        if len(set(act)) != len(act):
            raise InvalidInput(f"duplicate rows in working set {act}")
        if len(act) > self.capacity:
            raise InvalidInput(f"{len(act)} rows exceed working-set capacity {self.capacity}")
        object.__setattr__(self, "active", act)

    def __len__(self):
        return len(self.active)

    def __contains__(self, i):
        return int(i) in self.active

    def __iter__(self):
        return iter(self.active)

    def add(self, i):
        if i in self:
            raise InvalidInput(f"row {i} already in working set")
        return WorkingSet(self.active + (int(i),), self.capacity)

    def remove(self, i):
        if i not in self:
            raise InvalidInput(f"row {i} not in working set")
        return WorkingSet(tuple(j for j in self.active if j != i), self.capacity)

    @classmethod
    def empty_for(cls, problem):
        return cls((), max(problem.n - problem.m, 0))


@dataclass(frozen=True)
class Residual:
    """Gradient residual ``r0``.

    ``space`` is ``"original"`` for ``Q x + q`` or ``"whitened"`` for
    ``x~ + q~`` after the Cholesky change of variable.
    """

    vector: np.ndarray
    space: str = "original"

    @classmethod
    def at(cls, Q, q, x):
        return cls(np.asarray(Q @ x + q, dtype=float), "original")

    @classmethod
    def whitened(cls, x_tilde, q_tilde):
        return cls(np.asarray(x_tilde + q_tilde, dtype=float), "whitened")


def stack_active(problem, ws, G=None, A=None):
    """Stack ``A`` over ``G[ws]`` and ``b`` over ``h[ws]``.

    ``A``/``G`` can be overridden to stack transformed constraint blocks
    (e.g. the whitened ones) in the same order.
    """
    A = problem.A if A is None else A
    G = problem.G if G is None else G
    idx = list(ws.active)
    A0 = np.vstack([A, G[idx]]) if idx else np.array(A)
    rhs0 = np.concatenate([problem.b, problem.h[idx]])
    return A0, rhs0


def initial_working_set(problem, x0, tol=DEFAULT_FEAS_TOL, rank_tol=DEFAULT_RANK_TOL):
    """Inequality rows active at ``x0``.

    Candidates with ``|G_i x0 - h_i| <= tol`` are visited by ascending residual
    then ascending index; a candidate is kept only if the stacked matrix stays
    full row rank and at most ``n`` rows in total.
    """
    x0 = np.asarray(x0, dtype=float)
    eq, ineq = feasibility_margin(problem, x0)
    if eq > tol or ineq > tol:
        raise InfeasibleStart(f"x0 violates constraints (equality {eq:.3g}, inequality {ineq:.3g})")
    ws = WorkingSet.empty_for(problem)
    if problem.r == 0:
        return ws
    res = np.abs(problem.G @ x0 - problem.h)
    cand = [i for i in np.lexsort((np.arange(problem.r), res)) if res[i] <= tol]
    rows = [problem.A]
    for i in cand:
        if len(ws) >= ws.capacity:
            break
        trial = np.vstack(rows + [problem.G[i:i + 1]])
        if numerical_rank(trial, rank_tol) == trial.shape[0]:
            rows.append(problem.G[i:i + 1])
            ws = ws.add(i)
    return ws


# -- problem files ------------------------------------------------------------

_FIELDS = ("n", "Q", "q", "A", "b", "G", "h")


def _num_array(doc, name, ndim, shape=None):
    if name not in doc:
        raise ProblemFormatError(name, "missing")
    raw = doc[name]
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError):
        raise ProblemFormatError(name, "expected an array of numbers") from None
    if arr.size == 0:
        arr = arr.reshape((0,) * ndim if ndim == 1 else (0, shape[1] if shape else 0))
    if arr.ndim != ndim:
        raise ProblemFormatError(name, f"expected {ndim}-D array, got {arr.ndim}-D")
    if not np.all(np.isfinite(arr)):
        raise ProblemFormatError(name, "non-finite entry")
    if shape is not None:
        for got, want in zip(arr.shape, shape):
            if want is not None and got != want:
                raise ProblemFormatError(name, f"shape {arr.shape} does not match expected {shape}")
    return arr


def problem_from_dict(doc):
    """Build a problem from a parsed problem document, naming the first bad field."""
    if not isinstance(doc, dict):
        raise ProblemFormatError("<root>", "expected an object")
    if "n" not in doc:
        raise ProblemFormatError("n", "missing")
    n = doc["n"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise ProblemFormatError("n", "expected a positive integer")
    Q = _num_array(doc, "Q", 2, (n, n))
    q = _num_array(doc, "q", 1, (n,))
    A = _num_array(doc, "A", 2, (None, n))
    b = _num_array(doc, "b", 1, (A.shape[0],))
    G = _num_array(doc, "G", 2, (None, n))
    h = _num_array(doc, "h", 1, (G.shape[0],))
    x0 = _num_array(doc, "x0", 1, (n,)) if doc.get("x0") is not None else None
    return QpProblem(Q, q, A, b, G, h, x0)


def problem_to_dict(problem):
    doc = {
        "n": problem.n,
        "Q": problem.Q.tolist(),
        "q": problem.q.tolist(),
        "A": problem.A.tolist(),
        "b": problem.b.tolist(),
        "G": problem.G.tolist(),
        "h": problem.h.tolist(),
    }
    if problem.x0 is not None:
        doc["x0"] = problem.x0.tolist()
    return doc


def load_problem(path):
    """Read a JSON problem file (fields ``n, Q, q, A, b, G, h`` and optional ``x0``)."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ProblemFormatError("<root>", f"not valid JSON: {exc}") from None
    return problem_from_dict(doc)


def save_problem(problem, path):
    with open(path, "w", encoding="utf-8") as fh:
        # repr round-trips float64 exactly
        json.dump(problem_to_dict(problem), fh)
