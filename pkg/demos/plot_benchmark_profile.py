"""
Benchmarking the schemes
========================

Generate a random suite, compare each solver with the enumeration oracle and
summarise the wall times as a Dolan-More performance profile.
"""

import numpy as np

from asqp import SolverConfig
from asqp.bench import GeneratorSpec, ProfileTable, dolan_more, run_suite

spec = GeneratorSpec(n_range=(10, 30), n_e=2, n_i=8, count=30, seed=42)
records = run_suite(spec, [SolverConfig(scheme=s) for s in ("kkt", "projection", "sphere")])

for solver in ("kkt", "projection", "sphere"):
    rows = [r for r in records if r.solver == solver]
    print(f"{solver:10s} mean error {np.mean([r.error_norm for r in rows]):.1e}  "
          f"median time {np.median([r.wall_time_s for r in rows]) * 1e3:.2f} ms")

profile = dolan_more(ProfileTable.from_records(records), np.linspace(1, 4, 7))
for solver, curve in profile.curves.items():
    print(solver.ljust(10), " ".join(f"{rho:.2f}" for _, rho in curve))
