"""Truncated conjugate gradients for Newton-type search directions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class CgResult:
    d: np.ndarray
    iters: int
    exit: str  # "converged" | "negative_curvature" | "max_iter"


def truncated_cg(apply_A, g, force: float, max_iter: int | None = None) -> CgResult:
    """Approximately solve ``A d = -g`` starting from ``d = 0``.

    Stops when ``||r|| <= force * ||g||``, after ``max_iter`` products
    (never more than ``n``), or on the first direction ``p`` with ``p'Ap <= 0``.
    Nonpositive curvature on the very first direction returns ``-g``;
    later, the current iterate is returned. ``iters`` counts calls to
    ``apply_A``.

    Residuals are re-orthogonalized against all earlier ones. Without
    this, rounding delays convergence enough that ``n`` iterations fall
    short of the requested accuracy already at condition numbers near 100.
    """
    g = np.asarray(g, dtype=float)
    n = g.size
    max_iter = n if max_iter is None else min(max_iter, n)
    gnorm = np.linalg.norm(g)
    d = np.zeros(n)
    if gnorm == 0.0:
        return CgResult(d, 0, "converged")
    r = g.copy()
    p = -r
    rr = r @ r
    tol = force * gnorm
    basis = np.empty((max_iter, n))
    for k in range(max_iter):
        basis[k] = r / np.sqrt(rr)
        Ap = apply_A(p)
        curv = p @ Ap
        if curv <= 0.0 or not np.isfinite(curv):
            if k == 0:
                return CgResult(-g, 1, "negative_curvature")
            return CgResult(d, k + 1, "negative_curvature")
        alpha = rr / curv
        d = d + alpha * p
        r = r + alpha * Ap
        r -= basis[: k + 1].T @ (basis[: k + 1] @ r)
        rr_new = r @ r
        if np.sqrt(rr_new) <= tol:
            return CgResult(d, k + 1, "converged")
        p = -r + (rr_new / rr) * p
        rr = rr_new
    return CgResult(d, max_iter, "max_iter")


def forcing_term(grad_norm: float) -> float:
    """``min(0.5, sqrt(||g||))``, the usual superlinear forcing sequence."""
    return min(0.5, float(np.sqrt(grad_norm)))


def make_forcing(rule: str = "sqrt"):
    """Parse ``"sqrt"`` or ``"const:<value>"`` into a forcing function."""
    if rule == "sqrt":
        return forcing_term
    if rule.startswith("const:"):
        value = float(rule.split(":", 1)[1])
        if not 0.0 < value < 1.0:
            raise ValueError("constant forcing term must lie in (0, 1)")
        return lambda grad_norm: value
    raise ValueError(f"unknown forcing rule {rule!r}")
