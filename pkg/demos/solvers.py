"""
Three line-search solvers on the same loop
==========================================

Truncated-Newton CG spends one Hessian-vector product per inner
iteration. The model-Hessian method spends one per outer iteration and
pays in function values instead. The Newton-direction method spends n up
front, then one per iteration.
"""

from hvpmodels import make_problem, solve

print(f"{'problem':13s} {'method':22s} {'status':10s} {'iters':>6s} {'hvp':>6s} {'f-evals':>8s}")
for key in ["COSINE-10", "TRIDIA-10", "DIXON3DQ-10", "BEALE-2"]:
    name, n = key.split("-")
    P = make_problem(name, int(n))
    for method in ("inexact_newton", "hessian_model", "newton_model"):
        rec = solve(P, method=method)
        c = rec.counters
        print(f"{key:13s} {method:22s} {rec.status:10s} {c.n_iter:6d} {c.n_hvp:6d} {c.n_f:8d}")
    print()

# %%
# For larger problems with a known pattern the sparse variant keeps the
# recovery system small.
P = make_problem("TRIDIA", 200)
for method in ("inexact_newton", "hessian_model_sparse"):
    rec = solve(P, method=method)
    print(f"{P.key:13s} {method:22s} {rec.status:10s} {rec.counters.n_iter:6d} {rec.counters.n_hvp:6d}")
