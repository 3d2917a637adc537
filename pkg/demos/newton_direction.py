"""
Recovering the Newton direction directly
========================================

Each sample point y with curvature vector z = hess f(x) (y - x) gives one
linear condition on the Newton step d:

    z' d = -f(y) + f(x) + 0.5 (y - x)' z

n such conditions determine d without ever forming the Hessian.
"""

import numpy as np

from hvpmodels.core import make_rng
from hvpmodels.newton_model import build_conditions, correct_z, descent_safeguard, solve_newton
from hvpmodels.problems import make_problem
from hvpmodels.sampling import SampleSet, ball_points

P = make_problem("COSINE", 10)
x = P.x0
exact = -np.linalg.solve(np.column_stack([P.eval_hvp(x, e) for e in np.eye(P.n)]), P.eval_grad(x))

# %%
# The error decays quadratically with the sample radius.
print(f"{'radius':>10} {'|d - d_newton|':>16}")
for r in (4e-2, 2e-2, 1e-2, 5e-3):
    pts = ball_points(make_rng(3), x, r, P.n)
    S = SampleSet(x, pts, np.array([P.eval_f(y) for y in pts]), np.array([P.eval_hvp(x, y - x) for y in pts]))
    d = solve_newton(*build_conditions(x, P.eval_f(x), S))
    print(f"{r:10.1e} {np.linalg.norm(d - exact):16.3e}")

# %%
# After a step, stale curvature vectors can be moved to the new iterate
# with two gradients instead of fresh products. The error is second order.
P = make_problem("SROSENBR", 50)
rng = make_rng(4)
x_prev = P.x0
w = ball_points(rng, np.zeros(P.n), 1.0, 1)[0]
u = rng.standard_normal(P.n)
u /= np.linalg.norm(u)
print(f"\n{'scale':>10} {'corrected z error':>18}")
for h in (1e-2, 5e-3, 2.5e-3):
    # both the sample point and the step shrink with h
    y, x = x_prev + h * w, x_prev + h * u
    z = correct_z(P.eval_hvp(x_prev, y - x_prev), P.eval_grad(x_prev), P.eval_grad(x))
    print(f"{h:10.1e} {np.linalg.norm(z - P.eval_hvp(x, y - x)):18.3e}")

# %%
# Directions outside the cone cos(d, -g) >= 0.95 are tilted onto its edge.
g = np.array([1.0, 0.0])
for d in ([-1.0, 0.1], [0.0, 1.0], [0.5, 1.0]):
    out = descent_safeguard(np.array(d), g)
    cos = -(g @ out) / np.linalg.norm(out)
    print(f"d = {d!s:12s} -> {np.round(out, 4)!s:22s} cos = {cos:.4f}")
