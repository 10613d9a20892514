"""
Three ways to compute the same step
===================================

With an identity quadratic term the saddle-point solve, the null-space
projection and the reduced sphere point all give the same direction.
"""

import numpy as np

from asqp import direction_kkt, direction_projection, direction_sphere, svd_null_basis
from asqp.model import Residual

rng = np.random.default_rng(3)
n, s = 6, 2
A0 = rng.standard_normal((s, n))
r0 = rng.standard_normal(n)

basis = svd_null_basis(A0)
print("rank", basis.rank, "nullity", basis.nullity)

P_kkt, lam = direction_kkt(np.eye(n), A0, r0)
P_proj = direction_projection(basis, Residual(r0, "whitened"))
P_sph, sol = direction_sphere(basis, Residual(r0, "whitened"))

print("|P_proj - P_kkt|  ", np.linalg.norm(P_proj - P_kkt))
print("|P_sph - P_proj|  ", np.linalg.norm(P_sph - P_proj))
print("|A0 P|            ", np.linalg.norm(A0 @ P_proj))
# the reduced point sits on the sphere ||Z + C|| = ||C||
print("sphere gap        ", sol.on_sphere_gap())

# a two-dimensional null space also carries an angle
A1 = rng.standard_normal((n - 2, n))
_, sol2 = direction_sphere(svd_null_basis(A1), Residual(r0, "whitened"))
print("theta", sol2.theta, "Z", sol2.Z)
