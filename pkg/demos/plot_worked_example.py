"""
A two-variable active-set solve
===============================

Minimise ``1/2 ||x||^2`` subject to ``x_1 >= 1``, starting from the feasible
point ``(2, 1)``. The trace shows each direction, step length and working-set
change.
"""

import numpy as np

from asqp import QpProblem, SolverConfig, solve

problem = QpProblem(Q=np.eye(2), q=np.zeros(2), G=[[-1.0, 0.0]], h=[-1.0], x0=[2.0, 1.0])

for scheme in ("kkt", "projection", "sphere"):
    out = solve(problem, SolverConfig(scheme=scheme))
    print(f"--- {scheme}: {out.status}, x* = {out.x_star}, objective {out.objective:.3f}")
    for t in out.trace:
        print(f"  it {t.iteration}: |P| = {t.direction_norm:.3f}  alpha = {t.alpha:.3f}  "
              f"{t.action.kind} {t.action.row}  x = {t.x}")

# the active inequality carries a unit multiplier at the solution
print("inequality multipliers:", out.inequality_multipliers(problem.r))
