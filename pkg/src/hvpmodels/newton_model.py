"""Recovery of the Newton direction from curvature vectors ``z = hess(x)(y - x)``.

Substituting the Taylor model into ``f(y)`` gives one linear condition on
``d ~ -hess(x)^{-1} grad(x)`` per sample point:

    z' d = -f(y) + f(x) + 0.5 (y - x)' z

With ``p == n`` points the system is solved directly; with ``p < n`` the
solution closest to a previous direction is taken.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SingularMatrix, ZeroGradient
from .linalg import cond2, lu_solve, spd_solve

COND_RESTART = 1e8
ETA = 0.95
SAFEGUARD_MODES = ("deficit", "always", "descent")


@dataclass
class NewtonModel:
    d: np.ndarray
    Z: np.ndarray
    rhs: np.ndarray
    cond_z: float
    since_restart: int = 0
    singular: bool = False


@dataclass
class Diagnostics:
    delta_y: float
    delta_z: float
    ry_norm: float | None = None


def build_conditions(x, f_x, S):
    """Rows ``z_l'`` and right-hand sides of the direction conditions."""
    if S.zvecs is None:
        raise ValueError("sample set carries no z-vectors")
    Z = np.array(S.zvecs, dtype=float)
    disp = S.points - np.asarray(x, dtype=float)
    rhs = -S.fvals + f_x + 0.5 * np.einsum("ij,ij->i", disp, Z)
    return Z, rhs


def scaled_z_matrix(Z):
    """``Z / max_l ||z_l||``; ``None`` when every z-vector is zero."""
    dz = np.max(np.linalg.norm(Z, axis=1))
    if dz == 0.0 or not np.isfinite(dz):
        return None
    return Z / dz


def z_condition(Z) -> float:
    MZ = scaled_z_matrix(Z)
    return np.inf if MZ is None else cond2(MZ)


def solve_newton(Z, rhs, d_prev=None):
    """Direction satisfying ``Z d = rhs``.

    Square ``Z`` is solved directly (``d_prev`` unused). A wide ``Z`` gives
    the least change from ``d_prev`` (zero by default):
    ``Z Z' mu = rhs - Z d_prev``, ``d = d_prev + Z' mu``.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    rhs = np.asarray(rhs, dtype=float)
    p, n = Z.shape
    if p > n:
        raise ValueError("more conditions than unknowns; use a least-squares solve")
    if p == n:
        return lu_solve(Z, rhs)
    if d_prev is None:
        d_prev = np.zeros(n)
    d_prev = np.asarray(d_prev, dtype=float)
    mu = spd_solve(Z @ Z.T, rhs - Z @ d_prev)
    return d_prev + Z.T @ mu


def correct_z(z_prev, grad_prev, grad_cur):
    """Move a stale curvature vector to the new center: ``z + g_prev - g``."""
    return np.asarray(z_prev) + np.asarray(grad_prev) - np.asarray(grad_cur)


def descent_safeguard(d_n, g, eta: float = ETA, mode: str = "deficit"):
    """Tilt ``d_n`` towards ``-g`` until ``cos(d, -g) = eta``.

    The result is ``d_n - beta * g``. In ``"deficit"`` mode directions that
    already satisfy ``cos(d_n, -g) >= eta`` are returned unchanged; in
    ``"always"`` mode ``beta`` may be negative so the cosine is exactly
    ``eta``. ``"descent"`` mode only touches directions with
    ``g' d_n >= 0``; its output is a descent direction but may have a
    cosine below ``eta``.

    Writing ``d_n = a * (-g/|g|) + t`` with ``t`` orthogonal to ``g``, the
    cosine condition is linear in ``c = a + beta |g|``:
    ``c = eta |t| / sqrt(1 - eta^2)``.
    """
    d_n = np.asarray(d_n, dtype=float)
    g = np.asarray(g, dtype=float)
    gnorm = np.linalg.norm(g)
    if gnorm == 0.0:
        raise ZeroGradient("descent safeguard needs a nonzero gradient")
    if mode not in SAFEGUARD_MODES:
        raise ValueError(f"unknown safeguard mode {mode!r}")
    u = -g / gnorm
    a = float(d_n @ u)
    t = d_n - a * u
    tnorm = np.linalg.norm(t)
    dnorm = np.linalg.norm(d_n)
    cos = a / dnorm if dnorm > 0 else -np.inf
    if mode == "deficit" and cos >= eta:
        return d_n
    if mode == "descent" and a > 0.0:
        return d_n
    if tnorm <= 1e-15 * max(dnorm, 1.0):
        # d_n is (anti)parallel to g: no finite beta reaches eta exactly
        if a > 0.0:
            return d_n
        return (dnorm if dnorm > 0 else gnorm) * u
    c = eta * tnorm / np.sqrt(1.0 - eta * eta)
    beta = (c - a) / gnorm
    return d_n - beta * g


def maybe_restart(model: NewtonModel, threshold: float = COND_RESTART) -> bool:
    return bool(model.singular or not model.cond_z < threshold)


def diagnostics(x, S) -> Diagnostics:
    disp = S.points - np.asarray(x, dtype=float)
    dy = float(np.max(np.linalg.norm(disp, axis=1)))
    dz = float(np.max(np.linalg.norm(S.zvecs, axis=1))) if S.zvecs is not None else np.nan
    return Diagnostics(dy, dz)


def ry_diagnostic(x, S, hvp_oracle) -> float:
    """Spectral norm of ``R_y = (H My' My H)^{-1} H My'``.

    ``My`` holds the displacements scaled by their largest norm and ``H``
    is assembled column by column from ``n`` extra products, so this is a
    diagnostic only and must not be charged to a benchmark run.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    disp = S.points - x
    dy = np.max(np.linalg.norm(disp, axis=1))
    if S.p < n:
        raise ValueError("R_y needs at least n sample points")
    H = np.column_stack([hvp_oracle(x, e) for e in np.eye(n)])
    H = 0.5 * (H + H.T)
    My = disp / dy
    HMt = H @ My.T
    G = HMt @ HMt.T
    if cond2(G) * np.finfo(float).eps > 1e-2:
        raise SingularMatrix("sample geometry or Hessian is numerically singular")
    R = lu_solve(G, HMt)
    return float(np.linalg.norm(R, 2))
