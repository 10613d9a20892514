"""
Whitening a general quadratic
=============================

A positive definite ``Q`` is removed by ``x~ = L^T x``. The projection and
sphere schemes operate in those coordinates and map the solution back.
"""

import numpy as np

from asqp import QpProblem, SolverConfig, solve, whiten_problem

rng = np.random.default_rng(11)
n = 5
M = rng.standard_normal((n, n))
Q = M.T @ M + n * 0.1 * np.eye(n)
q = rng.standard_normal(n)
G = rng.standard_normal((3, n))
problem = QpProblem(Q=Q, q=q, G=G, h=np.abs(rng.standard_normal(3)), x0=np.zeros(n))

w = whiten_problem(problem)
x = rng.standard_normal(n)
xt = w.to_whitened(x)
# 1/2 x~^T x~ + q~^T x~ equals 1/2 x^T Q x + q^T x exactly
print("objective gap", problem.objective(x) - w.objective(xt))
print("round trip", np.linalg.norm(w.from_whitened(xt) - x))

for scheme in ("kkt", "projection", "sphere"):
    out = solve(problem, SolverConfig(scheme=scheme))
    print(f"{scheme:10s} {out.status}  x* = {np.round(out.x_star, 6)}  its = {out.iterations}")
