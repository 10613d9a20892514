"""Dense active-set solver for convex quadratic programs."""

from .directions import (
    SphereSolution,
    WhitenedProblem,
    direction_kkt,
    direction_projection,
    direction_sphere,
    multipliers_at_stationary,
    whiten_problem,
)
from .errors import *  # noqa: F401,F403
from .linalg import NullBasis, pinv_solve, spd_factor, svd_null_basis, tri_solve
from .model import (
    QpProblem,
    Residual,
    WorkingSet,
    feasibility_margin,
    initial_working_set,
    load_problem,
    save_problem,
    stack_active,
    validate,
)
from .solver import SolveOutcome, SolverConfig, Status, choose_scheme, solve, step_length

__version__ = "0.1.0"
