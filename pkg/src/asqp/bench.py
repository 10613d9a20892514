"""
Benchmark harness: random instances, an enumeration oracle, timed suites,
CSV records and Dolan-More performance profiles.
"""

import csv
import itertools
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import GeneratorSpecError, OracleInconclusive
from .linalg import numerical_rank
from .model import QpProblem
from .solver import SolverConfig, Status, solve

__all__ = [
    "GeneratorSpec",
    "RunRecord",
    "ProfileTable",
    "PerformanceProfile",
    "CAPTION_REGIMES",
    "generate",
    "oracle_solve",
    "run_problems",
    "run_suite",
    "write_records",
    "read_records",
    "dolan_more",
    "write_profile",
]

_log = logging.getLogger(__name__)

ACTIVE_PROBABILITY = 0.3
REG_DELTA = 1e-2
ENUMERATION_LIMIT = 12
CSV_COLUMNS = ("problem_id", "n", "n_e", "n_i", "solver", "status",
               "iterations", "wall_time_s", "error_norm")

# (n_e, n_i) pairs of the four experiment grids
CAPTION_REGIMES = ((1, 10), (10, 10), ("n-1", 1), ("n/2", "n/2"))


def _count(value, n, name):
    if isinstance(value, str):
        key = value.replace(" ", "").lower()
        if key == "n-1":
            return n - 1
        if key == "n/2":
            return n // 2
        try:
            value = int(key)
        except ValueError:
            raise GeneratorSpecError(f"{name}: expected an integer, 'n-1' or 'n/2', got {value!r}") from None
    if isinstance(value, bool) or int(value) != value or value < 0:
        raise GeneratorSpecError(f"{name}: expected a nonnegative integer, got {value!r}")
    return int(value)


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of a random instance family.

    ``n_e`` and ``n_i`` are absolute counts or the symbolic forms ``"n-1"``
    (equalities only) and ``"n/2"`` evaluated per drawn ``n``.
    """

    n_range: tuple
    n_e: object = 1
    n_i: object = 10
    count: int = 1
    seed: int = 0

    def __post_init__(self):
        lo, hi = (int(v) for v in self.n_range)
        object.__setattr__(self, "n_range", (lo, hi))
        if not 1 <= lo <= hi:
            raise GeneratorSpecError(f"n_range must satisfy 1 <= lo <= hi, got {self.n_range}")
        if self.count < 1:
            raise GeneratorSpecError("count must be >= 1")
        symbolic_ne = isinstance(self.n_e, str) and self.n_e.replace(" ", "").lower() == "n-1"
        for n in (lo, hi):
            n_e, n_i = self.counts(n)
            if n_e >= n:
                raise GeneratorSpecError(
                    f"n_e = {n_e} equalities fix every variable at n = {n}; the start is over-determined")
            if symbolic_ne and n_i > 1:
                # one free direction cannot host more than one active inequality
                raise GeneratorSpecError(
                    f"n_e = n-1 leaves one free direction; n_i = {n_i} inequalities can "
                    f"over-determine the start (use n_i <= 1)")

    def counts(self, n):
        return _count(self.n_e, n, "n_e"), _count(self.n_i, n, "n_i")


def _instance(spec, seed_seq):
    rng = np.random.default_rng(seed_seq)
    lo, hi = spec.n_range
    n = int(rng.integers(lo, hi + 1))
    n_e, n_i = spec.counts(n)

    M = rng.standard_normal((n, n))
    Q = M.T @ M + n * REG_DELTA * np.eye(n)
    Q = 0.5 * (Q + Q.T)
    q = rng.standard_normal(n)
    x_ref = rng.standard_normal(n)

    A = rng.standard_normal((n_e, n))
    while n_e and numerical_rank(A) < n_e:
        A = rng.standard_normal((n_e, n))
    b = A @ x_ref

    G = rng.standard_normal((n_i, n))
    active = rng.random(n_i) < ACTIVE_PROBABILITY
    slack = rng.uniform(0.1, 1.1, n_i)
    # keep the start from having more active rows than free directions
    active[np.flatnonzero(active)[n - n_e:]] = False
    slack[active] = 0.0
    h = G @ x_ref + slack
    return QpProblem(Q, q, A, b, G, h, x_ref)


def generate(spec):
    """Yield ``spec.count`` random feasible instances, deterministic in ``spec.seed``.

    ``Q = M^T M + n * 0.01 * I`` with standard normal ``M``; the constraints are
    built around a standard normal point ``x_ref`` that becomes ``x0``, with
    each inequality active there with probability 0.3 and otherwise slack by
    ``U(0.1, 1.1)``.
    """
    for child in np.random.SeedSequence(spec.seed).spawn(spec.count):
        yield _instance(spec, child)


def _enumerate_oracle(problem, tol=1e-9):
    n, m, r = problem.n, problem.m, problem.r
    Q, q = problem.Q, problem.q
    scale = 1.0 + np.linalg.norm(q)
    for size in range(0, min(r, n - m) + 1):
        for S in itertools.combinations(range(r), size):
            Aw = np.vstack([problem.A, problem.G[list(S)]])
            rhs = np.concatenate([problem.b, problem.h[list(S)]])
            s = Aw.shape[0]
            K = np.block([[Q, Aw.T], [Aw, np.zeros((s, s))]])
            try:
                sol = np.linalg.solve(K, np.concatenate([-q, rhs]))
            except np.linalg.LinAlgError:
                continue
            x, lam = sol[:n], sol[n:]
            if not np.all(np.isfinite(sol)):
                continue
            if r and np.any(problem.G @ x - problem.h > tol * (1.0 + np.abs(problem.h))):
                continue
            if np.any(lam[m:] < -tol * scale):
                continue
            return x
    raise OracleInconclusive("no enumerated active set is a KKT point")


def oracle_reference(problem):
    """Reference solution and the route used to get it.

    Returns ``(x, "enumeration")`` for at most 12 inequality rows, otherwise
    ``(x, "kkt-crosscheck")`` from the KKT-scheme solver at tight tolerances.
    """
    if problem.r <= ENUMERATION_LIMIT:
        return _enumerate_oracle(problem), "enumeration"
    cfg = SolverConfig(scheme="kkt", feas_tol=1e-10, direction_tol=1e-12, multiplier_tol=1e-12)
    out = solve(problem, cfg)
    if not out.ok:
        raise OracleInconclusive(f"cross-check solve ended with {out.status}")
    return out.x_star, "kkt-crosscheck"


def oracle_solve(problem):
    """Exact solution by exhaustive active-set enumeration.

    Every subset ``S`` of inequality rows with ``m + |S| <= n`` is tried as the
    active set: the equality-constrained KKT system on ``A`` stacked over
    ``G[S]`` is solved directly and the first primal-feasible candidate with
    nonnegative inequality multipliers is returned. Problems with more than 12
    inequality rows fall back to a tightly tolerated KKT-scheme solve.
    """
    return oracle_reference(problem)[0]


@dataclass
class RunRecord:
    problem_id: int
    n: int
    n_e: int
    n_i: int
    solver: str
    status: str
    iterations: int
    wall_time_s: float
    error_norm: float = None

    def key(self):
        """Every field except the wall time."""
        return (self.problem_id, self.n, self.n_e, self.n_i, self.solver,
                self.status, self.iterations, self.error_norm)


def _threads():
    try:
        return max(1, int(os.environ.get("ASQP_THREADS", "1")))
    except ValueError:
        return 1


def _run_cell(pid, problem, config, x_ref):
    t0 = time.perf_counter()
    try:
        out = solve(problem, config)
        status, iters, x = str(out.status), out.iterations, out.x_star
    except Exception as exc:  # recorded, never aborts the suite
        _log.warning("problem %s, solver %s: %s", pid, config.label, exc)
        status, iters, x = str(Status.ERROR), 0, None
    elapsed = time.perf_counter() - t0
    err = None
    if status == str(Status.OPTIMAL) and x_ref is not None:
        err = float(np.linalg.norm(x - x_ref))
    return RunRecord(pid, problem.n, problem.m, problem.r, config.label,
                     status, iters, elapsed, err)


def run_problems(problems, solvers, oracle=True, workers=None):
    """Time every solver on every problem, in (problem, solver) order."""
    if not solvers:
        raise ValueError("at least one solver configuration is required")
    problems = list(problems)
    refs = []
    for pid, p in enumerate(problems):
        x_ref = None
        if oracle:
            try:
                x_ref, route = oracle_reference(p)
                if route != "enumeration":
                    _log.info("problem %d: reference from %s", pid, route)
            except OracleInconclusive as exc:
                _log.warning("problem %d: %s; error norm omitted", pid, exc)
        refs.append(x_ref)
    cells = [(pid, p, cfg, refs[pid]) for pid, p in enumerate(problems) for cfg in solvers]
    workers = workers or _threads()
    if workers == 1:
        return [_run_cell(*c) for c in cells]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(lambda c: _run_cell(*c), cells))


def run_suite(spec, solvers, oracle=True, workers=None):
    """Generate ``spec`` instances and run :func:`run_problems` on them.

    Timing covers :func:`~asqp.solver.solve` only; generation and oracle runs
    are excluded. Parallelism defaults to ``ASQP_THREADS`` (1 if unset).
    """
    return run_problems(generate(spec), solvers, oracle=oracle, workers=workers)


def write_records(records, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for rec in records:
            w.writerow([rec.problem_id, rec.n, rec.n_e, rec.n_i, rec.solver, rec.status,
                        rec.iterations, repr(rec.wall_time_s),
                        "" if rec.error_norm is None else repr(rec.error_norm)])


def read_records(path):
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            out.append(RunRecord(
                int(row["problem_id"]), int(row["n"]), int(row["n_e"]), int(row["n_i"]),
                row["solver"], row["status"], int(row["iterations"]),
                float(row["wall_time_s"]),
                float(row["error_norm"]) if row["error_norm"] else None,
            ))
    return out


@dataclass
class ProfileTable:
    """Problem x solver timing matrix; ``nan`` marks a failed run."""

    solvers: list
    problems: list
    times: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.shape != (len(self.problems), len(self.solvers)):
            raise ValueError(f"times has shape {self.times.shape}, expected "
                             f"({len(self.problems)}, {len(self.solvers)})")

    @classmethod
    def from_records(cls, records):
        solvers = list(dict.fromkeys(r.solver for r in records))
        problems = list(dict.fromkeys(r.problem_id for r in records))
        times = np.full((len(problems), len(solvers)), np.nan)
        pi = {p: i for i, p in enumerate(problems)}
        si = {s: j for j, s in enumerate(solvers)}
        for r in records:
            if r.status == str(Status.OPTIMAL):
                times[pi[r.problem_id], si[r.solver]] = r.wall_time_s
        return cls(solvers, problems, times)

    def unsolved(self):
        """Mask of problems no solver finished."""
        return np.all(~np.isfinite(self.times), axis=1)

    def ratios(self):
        """``t_ps / min_s t_ps``, ``inf`` on failures and unsolved problems."""
        t = np.where(np.isfinite(self.times), self.times, np.inf)
        best = t.min(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            rat = t / best
        rat[~np.isfinite(t)] = np.inf
        rat[self.unsolved()] = np.inf
        # two zero timings compare as equal
        rat[np.isnan(rat)] = 1.0
        return rat


@dataclass
class PerformanceProfile:
    """Per-solver step functions ``rho_s(tau)`` sampled on ``tau_grid``."""

    tau_grid: np.ndarray
    curves: dict
    unsolved_problems: int = 0
    metadata: dict = field(default_factory=dict)

    def rows(self):
        for s, pts in self.curves.items():
            for tau, rho in pts:
                yield s, tau, rho


def dolan_more(table, tau_grid=None):
    """Dolan-More profiles: the fraction of problems each solver finishes
    within a factor ``tau`` of the fastest.

    ``tau_grid`` defaults to the distinct finite ratios (which always include
    1), i.e. the breakpoints of every step function. Problems that no solver
    finished are kept in the denominator and reported in
    ``unsolved_problems``.
    """
    ratios = table.ratios()
    if tau_grid is None:
        finite = ratios[np.isfinite(ratios)]
        tau_grid = np.unique(np.concatenate([[1.0], finite]))
    tau_grid = np.asarray(tau_grid, dtype=float)
    if tau_grid.ndim != 1 or tau_grid.size == 0 or tau_grid[0] != 1.0:
        raise ValueError("tau_grid must be a nonempty 1-D grid starting at 1")
    if np.any(np.diff(tau_grid) <= 0):
        raise ValueError("tau_grid must be strictly increasing")
    n_prob = ratios.shape[0]
    curves = {}
    for j, s in enumerate(table.solvers):
        col = np.sort(ratios[:, j])
        counts = np.searchsorted(col, tau_grid, side="right")
        curves[s] = [(float(t), float(c) / n_prob) for t, c in zip(tau_grid, counts)]
    unsolved = int(table.unsolved().sum())
    if unsolved:
        _log.warning("%d problems unsolved by every solver", unsolved)
    return PerformanceProfile(tau_grid, curves, unsolved, {"problems": n_prob})


def write_profile(profile, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(("solver", "tau", "rho"))
        for s, tau, rho in profile.rows():
            w.writerow((s, repr(tau), repr(rho)))
