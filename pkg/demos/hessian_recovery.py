"""
Recovering a Hessian from function values and one product
=========================================================

A symmetric n x n Hessian has n(n+1)/2 unknowns. One Hessian-vector
product supplies n equations; quadratic interpolation at
n(n+1)/2 - n nearby points supplies the rest.
"""

import numpy as np

from hvpmodels.core import make_rng
from hvpmodels.hessian_model import assemble, determined_p, solve_determined
from hvpmodels.problems import make_problem
from hvpmodels.sampling import fixed_directions

# %%
# On a quadratic the recovery is exact, whatever the sample radius.
rng = make_rng(0)
n = 4
A = rng.standard_normal((n, n))
C = A @ A.T + np.eye(n)
f = lambda x: 0.5 * x @ C @ x
x = rng.standard_normal(n)
dirs, v = fixed_directions(rng, n, determined_p(n))
points = x + 0.5 * dirs
system = assemble(x, C @ x, f(x), points, [f(y) for y in points], v, C @ v)
H = solve_determined(system).H
print("quadratic, n = 4:  |H - C|_F =", np.linalg.norm(H - C))

# %%
# On a smooth non-quadratic function the model error shrinks linearly
# with the radius of the sample set.
P = make_problem("COSINE", 10)
x = P.x0
exact = np.column_stack([P.eval_hvp(x, e) for e in np.eye(P.n)])
dirs, v = fixed_directions(make_rng(1), P.n, determined_p(P.n))
print("\nCOSINE-10 at x0")
print(f"{'radius':>10} {'|H - hess f|':>14}")
for r in (4e-2, 2e-2, 1e-2, 5e-3, 2.5e-3):
    pts = x + r * dirs
    system = assemble(x, P.eval_grad(x), P.eval_f(x), pts, [P.eval_f(y) for y in pts], r * v, P.eval_hvp(x, r * v))
    print(f"{r:10.1e} {np.linalg.norm(solve_determined(system).H - exact):14.3e}")
