"""
Primal active-set loop for dense convex QPs.

Each iteration computes a direction on the current working set. A zero
direction triggers the multiplier sign test (stop, or drop the most negative
inequality multiplier); a nonzero one is followed as far as feasibility
allows, adding the blocking row when the step is cut short.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .directions import (
    direction_kkt,
    direction_projection,
    direction_sphere,
    multipliers_at_stationary,
    whiten_problem,
)
from .errors import InfeasibleStart, InvalidProblem, RankDeficientWorkingSet
from .linalg import DEFAULT_RANK_TOL, numerical_rank, svd_null_basis
from .model import (
    DEFAULT_FEAS_TOL,
    Residual,
    initial_working_set,
    objective,
    resolve_start,
    stack_active,
    validate,
)

__all__ = [
    "SCHEMES",
    "SolverConfig",
    "Status",
    "Action",
    "IterationTrace",
    "SolveOutcome",
    "solve",
    "step_length",
    "choose_scheme",
]

_log = logging.getLogger(__name__)

SCHEMES = ("kkt", "projection", "sphere", "auto")


@dataclass(frozen=True)
class SolverConfig:
    """Solver options.

    ``direction_tol`` is relative: a direction counts as zero when
    ``||P|| <= direction_tol * max(1, ||r0||)``. ``max_iterations`` and
    ``max_zero_steps`` default to ``10 (n + r)`` and ``2 (n + r)``.
    """

    scheme: str = "auto"
    feas_tol: float = DEFAULT_FEAS_TOL
    direction_tol: float = 1e-9
    multiplier_tol: float = 1e-8
    rank_tol: float = DEFAULT_RANK_TOL
    max_iterations: int = None
    auto_threshold: int = 2
    max_zero_steps: int = None
    name: str = None

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from {SCHEMES}")
        for tol in ("feas_tol", "direction_tol", "multiplier_tol", "rank_tol"):
            if not getattr(self, tol) > 0:
                raise ValueError(f"{tol} must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")

    @property
    def label(self):
        return self.name or self.scheme


class Status(str, Enum):
    OPTIMAL = "Optimal"
    ITERATION_LIMIT = "IterationLimit"
    INFEASIBLE_START = "InfeasibleStart"
    ERROR = "Error"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Action:
    kind: str
    row: int = None

    def __str__(self):
        return self.kind if self.row is None else f"{self.kind}({self.row})"


FULL_STEP = Action("FullStep")
TERMINATED = Action("Terminated")


@dataclass(frozen=True)
class IterationTrace:
    iteration: int
    x: np.ndarray
    direction_norm: float
    alpha: float
    action: Action
    objective: float
    scheme: str


@dataclass
class SolveOutcome:
    """Result of :func:`solve`.

    ``lambda_star`` is ordered as the active matrix at termination: the ``m``
    equality multipliers, then one per row of ``working_set``.
    """

    status: Status
    x_star: np.ndarray
    objective: float
    lambda_star: np.ndarray = None
    working_set: tuple = ()
    iterations: int = 0
    trace: list = field(default_factory=list)
    message: str = ""

    @property
    def ok(self):
        return self.status is Status.OPTIMAL

    def inequality_multipliers(self, r):
        """Multipliers for all ``r`` inequality rows, zero on inactive ones."""
        lam = np.zeros(r)
        if self.lambda_star is not None and self.working_set:
            lam[list(self.working_set)] = self.lambda_star[-len(self.working_set):]
        return lam


def choose_scheme(n, working_rows, config):
    """Sphere for a small null space (``n - rows <= auto_threshold``), else projection."""
    if config.scheme != "auto":
        return config.scheme
    return "sphere" if n - working_rows <= config.auto_threshold else "projection"


def _blocking_candidates(problem, ws, x, P, feas_tol):
    """Inactive rows that stop the step ``x + alpha P`` before or at ``alpha = 1``.

    Returns ``(ratio, row)`` pairs sorted by ratio then row. A row also counts
    when it ends up active within ``feas_tol`` at the unit step; a row already
    within ``feas_tol`` of its bound has ratio 0.
    """
    if problem.r == 0:
        return []
    GP = problem.G @ P
    slack = problem.h - problem.G @ x
    eps = 1e-12 * np.linalg.norm(problem.G, axis=1) * np.linalg.norm(P)
    out = []
    for i in np.flatnonzero(GP > eps):
        if i in ws:
            continue
        # rows already active within feas_tol block immediately
        ratio = slack[i] / GP[i] if slack[i] > feas_tol else 0.0
        if ratio < 1.0 or slack[i] - GP[i] <= feas_tol:
            out.append((ratio, int(i)))
    out.sort()
    return out


def step_length(problem, ws, x, P, feas_tol=DEFAULT_FEAS_TOL):
    """Largest feasible step along ``P``, capped at 1.

    Returns
    -------
    alpha : float
    blocking : int or None
        Row that limits the step (smallest index on ties), if any.
    """
    cand = _blocking_candidates(problem, ws, np.asarray(x, float), np.asarray(P, float), feas_tol)
    if not cand:
        return 1.0, None
    ratio, i = cand[0]
    return min(1.0, ratio), i


def _full_rank_with(A0, row, rank_tol):
    trial = np.vstack([A0, row[None, :]])
    return numerical_rank(trial, rank_tol) == trial.shape[0]


def solve(problem, config=None):
    """Minimize a convex QP by the active-set method.

    Parameters
    ----------
    problem : QpProblem
    config : SolverConfig, optional

    Returns
    -------
    SolveOutcome
        Non-convergence is reported through ``status``; only structurally
        invalid problems (and a non-positive-definite ``Q``) raise.
    """
    config = config or SolverConfig()
    bad = [v for v in validate(problem, config.feas_tol) if v.kind != "InfeasibleStart"]
    if bad:
        raise InvalidProblem(bad)

    n, m, r = problem.n, problem.m, problem.r
    Q, q = problem.Q, problem.q
    max_iter = config.max_iterations or 10 * (n + r)
    max_zero = config.max_zero_steps or 2 * (n + r)

    try:
        x = resolve_start(problem, config.feas_tol)
        ws = initial_working_set(problem, x, config.feas_tol, config.rank_tol)
    except InfeasibleStart as exc:
        x = problem.x0 if problem.x0 is not None else np.full(n, np.nan)
        return SolveOutcome(Status.INFEASIBLE_START, np.array(x), float("nan"), message=str(exc))

    def outcome(status, msg="", lam=None, iters=0):
        return SolveOutcome(status, x, objective(problem, x), lam, ws.active, iters, trace, msg)

    trace = []
    if m and numerical_rank(problem.A, config.rank_tol) < m:
        return outcome(Status.ERROR, "equality rows are linearly dependent")

    white = whiten_problem(problem) if config.scheme != "kkt" else None

    iters = 0
    zero_steps = 0
    removed_prev = None
    # after an unblocked unit step the iterate minimizes over the working set,
    # so the next direction is zero by construction and is not recomputed
    stationary = None

    it = -1
    while True:
        it += 1
        scheme = choose_scheme(n, m + len(ws), config)
        basis = None
        lam = None

        if stationary is not None:
            scheme, basis, lam = stationary
            P = np.zeros(n)
            pnorm, ptol = 0.0, 1.0
            if scheme != "kkt":
                lam = None
                r0 = white.residual(white.to_whitened(x))
        else:
            if iters >= max_iter:
                return outcome(Status.ITERATION_LIMIT, f"no convergence in {max_iter} iterations",
                               iters=iters)
            iters += 1
            if scheme == "kkt":
                A0, _ = stack_active(problem, ws)
                r0 = Residual.at(Q, q, x)
                try:
                    P, lam = direction_kkt(Q, A0, r0)
                except RankDeficientWorkingSet as exc:
                    return outcome(Status.ERROR, str(exc), iters=iters)
                pnorm = np.linalg.norm(P)
            else:
                A0, _ = stack_active(problem, ws, G=white.G_tilde, A=white.A_tilde)
                basis = svd_null_basis(A0, config.rank_tol, n=n)
                if basis.rank < A0.shape[0]:
                    return outcome(Status.ERROR, "working set lost full row rank", iters=iters)
                r0 = white.residual(white.to_whitened(x))
                if scheme == "projection":
                    Pt = direction_projection(basis, r0)
                elif basis.nullity == 0:
                    Pt = np.zeros(n)
                else:
                    Pt, _ = direction_sphere(basis, r0)
                pnorm = np.linalg.norm(Pt)
                P = white.from_whitened(Pt)
            ptol = config.direction_tol * max(1.0, np.linalg.norm(r0.vector))

        stationary = None
        if pnorm <= ptol:
            rows = m + len(ws)
            if lam is None:
                lam = multipliers_at_stationary(basis, r0) if rows else np.zeros(0)
            lam_ineq = lam[m:]
            if lam_ineq.size == 0 or lam_ineq.min() >= -config.multiplier_tol:
                trace.append(IterationTrace(it, x.copy(), pnorm, 0.0, TERMINATED,
                                            objective(problem, x), scheme))
                return outcome(Status.OPTIMAL, lam=lam, iters=iters)
            low = lam_ineq.min()
            row = min(ws.active[j] for j in np.flatnonzero(lam_ineq == low))
            ws = ws.remove(row)
            removed_prev = row
            trace.append(IterationTrace(it, x.copy(), pnorm, 0.0, Action("RemovedConstraint", row),
                                        objective(problem, x), scheme))
            continue

        G_space = problem.G if scheme == "kkt" else white.G_tilde
        A0_space = A0
        alpha, blocking = 1.0, None
        for ratio, i in _blocking_candidates(problem, ws, x, P, config.feas_tol):
            if len(ws) < ws.capacity and _full_rank_with(A0_space, G_space[i], config.rank_tol):
                alpha, blocking = min(1.0, ratio), i
                break
            _log.debug("skipping dependent blocking row %d", i)

        x = x + alpha * P
        if blocking is None:
            action = FULL_STEP
            zero_steps = 0
            stationary = (scheme, basis, lam)
        else:
            if alpha == 0.0 and blocking == removed_prev:
                trace.append(IterationTrace(it, x.copy(), pnorm, alpha, Action("AddedConstraint", blocking),
                                            objective(problem, x), scheme))
                return outcome(Status.ERROR, f"cycling: row {blocking} re-added right after removal",
                               iters=iters)
            zero_steps = zero_steps + 1 if alpha == 0.0 else 0
            ws = ws.add(blocking)
            action = Action("AddedConstraint", blocking)
        removed_prev = None
        trace.append(IterationTrace(it, x.copy(), pnorm, alpha, action, objective(problem, x), scheme))
        if zero_steps > max_zero:
            return outcome(Status.ERROR, f"{zero_steps} consecutive zero steps", iters=iters)
