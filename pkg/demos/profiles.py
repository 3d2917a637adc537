"""
Performance profiles
====================

rho_s(tau) is the fraction of problems on which solver s is within a
factor tau of the best solver. Failures never count.
"""

import numpy as np

from hvpmodels.bench import performance_profile, run_suite

# %%
# A hand-sized example: two problems, two solvers.
for c in performance_profile([[1, 2], [4, 2]], taus=[1.0, 2.0], solvers=["a", "b"]):
    print(c.solver, dict(zip(c.taus, c.rho)))

# %%
# The small test set, Hessian-vector products as the cost.
res = run_suite("appB", ["inexact_newton", "hessian_model"], seeds=[0, 1, 2], metric="hvp")
print(f"\n{'problem':13s}" + "".join(f"{m:>16s}" for m in res.methods))
for key, row in zip(res.problems, res.table):
    print(f"{key:13s}" + "".join(f"{v:16.0f}" for v in row))
print()
for tau in (1.0, 1.5, 2.0, 4.0):
    k = int(np.searchsorted(res.curves[0].taus, tau, side="right")) - 1
    print(f"tau = {res.curves[0].taus[k]:5.2f}  " + "  ".join(f"{c.solver} {c.rho[k]:.2f}" for c in res.curves))
