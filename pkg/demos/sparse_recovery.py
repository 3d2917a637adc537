"""
Exploiting a sparsity pattern
=============================

When the Hessian pattern is known only the structural nonzeros are
unknowns, so far fewer interpolation points are needed: nnz - n instead
of n(n+1)/2 - n.
"""

import numpy as np

from hvpmodels.core import make_rng
from hvpmodels.hessian_model import assemble, determined_p, solve_determined
from hvpmodels.problems import make_problem
from hvpmodels.sampling import fixed_directions

for name, n in [("TRIDIA", 10), ("TRIDIA", 200), ("LIARWHD", 100), ("SROSENBR", 50)]:
    P = make_problem(name, n)
    print(f"{P.key:13s} nnz = {P.pattern.nnz:4d}   points: dense {determined_p(n):6d}, sparse {determined_p(n, P.pattern):4d}")

# %%
# TRIDIA is quadratic, so the sparse model reproduces its Hessian.
P = make_problem("TRIDIA", 200)
x = P.x0
dirs, v = fixed_directions(make_rng(0), P.n, determined_p(P.n, P.pattern))
r = 1e-2
pts = x + r * dirs
system = assemble(
    x, P.eval_grad(x), P.eval_f(x), pts, [P.eval_f(y) for y in pts], r * v, P.eval_hvp(x, r * v), pattern=P.pattern
)
H = solve_determined(system).H
exact = np.column_stack([P.eval_hvp(x, e) for e in np.eye(P.n)])
print("\nTRIDIA-200 relative model error:", np.linalg.norm(H - exact) / np.linalg.norm(exact))
