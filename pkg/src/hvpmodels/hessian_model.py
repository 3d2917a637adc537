"""Model Hessian recovery from interpolation data plus one Hessian-vector product.

Unknowns are the alpha coefficients of a symmetric ``H`` (see
:mod:`hvpmodels.core`). With displacements ``s = y - x`` the conditions are

* ``0.5 s' H s = f(y) - f(x) - g's`` for each interpolation point, and
* ``H v = w`` for the single product ``w = hess(x) v``.

In sparse mode the unknowns are restricted to the structural nonzeros.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DegenerateGeometry, SparsityPattern, alpha_pairs, sym_from_alpha
from .linalg import lu_solve, spd_solve
from .sampling import MIN_ANGLE, angle_between


@dataclass(frozen=True)
class EnrichedSystem:
    """Recovery system ``M alpha = delta``.

    The first ``p`` rows come from interpolation, the last ``n`` from the
    Hessian-vector product. ``pairs`` gives the ``(i, j)`` entry behind each
    column.
    """

    M: np.ndarray
    delta: np.ndarray
    n: int
    p: int
    pairs: tuple[tuple[int, int], ...]
    sparse: bool = False

    @property
    def ncols(self) -> int:
        return len(self.pairs)


@dataclass(frozen=True)
class HessianModel:
    H: np.ndarray
    alpha: np.ndarray
    mode: str  # "determined" | "least_change" | "sparse_determined"


def interpolation_rows(S, pairs):
    """Coefficients of ``0.5 s' H s`` in the alpha unknowns, one row per ``s``."""
    S = np.atleast_2d(S)
    I = np.array([i for i, _ in pairs], dtype=int)
    J = np.array([j for _, j in pairs], dtype=int)
    prod = S[:, I] * S[:, J]
    return np.where(I == J, 0.5 * prod, prod)


def product_rows(v, pairs):
    """``n x ncols`` matrix ``A`` with ``A @ alpha == H @ v``."""
    v = np.asarray(v, dtype=float)
    n = v.size
    A = np.zeros((n, len(pairs)))
    for c, (i, j) in enumerate(pairs):
        if i == j:
            A[i, c] = v[i]
        else:
            A[i, c] = v[j]
            A[j, c] = v[i]
    return A


def assemble(x, grad_x, f_x, points, fvals, v, w, pattern: SparsityPattern | None = None, check=True) -> EnrichedSystem:
    """Build the enriched interpolation system at ``x``.

    Parameters
    ----------
    x, grad_x, f_x
        Center, its gradient and its function value.
    points, fvals
        Interpolation points ``y`` (one per row) and ``f(y)``.
    v, w
        Product direction and ``w = hess(x) v``.
    pattern
        If given, only entries in the pattern are unknowns.
    check
        Reject ``v`` nearly parallel to some ``y - x``. Such a ``v`` makes
        the system rank deficient.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    points = np.asarray(points, dtype=float).reshape(-1, n)
    fvals = np.asarray(fvals, dtype=float).reshape(-1)
    S = points - x
    if check:
        for ell, s in enumerate(S):
            if angle_between(v, s) < MIN_ANGLE:
                raise DegenerateGeometry(f"product direction parallel to displacement {ell}")
    pairs = tuple(pattern.pairs) if pattern is not None else tuple(alpha_pairs(n))
    M1 = interpolation_rows(S, pairs) if len(S) else np.zeros((0, len(pairs)))
    M2 = product_rows(v, pairs)
    d1 = fvals - f_x - S @ np.asarray(grad_x, dtype=float)
    return EnrichedSystem(
        M=np.vstack([M1, M2]),
        delta=np.concatenate([d1, np.asarray(w, dtype=float)]),
        n=n,
        p=S.shape[0],
        pairs=pairs,
        sparse=pattern is not None,
    )


def solve_determined(sys: EnrichedSystem) -> HessianModel:
    """Solve the square system ``M alpha = delta`` directly.

    Raises ``SingularMatrix`` if ``M`` is numerically singular.
    """
    if sys.M.shape[0] != sys.M.shape[1]:
        raise ValueError(f"determined solve needs a square system, got {sys.M.shape}")
    alpha = lu_solve(sys.M, sys.delta)
    mode = "sparse_determined" if sys.sparse else "determined"
    return HessianModel(sym_from_alpha(alpha, sys.n, sys.pairs), alpha, mode)


def _frobenius_weights(pairs):
    return np.array([1.0 if i == j else 2.0 for i, j in pairs])


def solve_least_change(sys: EnrichedSystem, alpha_prev=None, metric: str = "alpha") -> HessianModel:
    """Feasible model closest to ``alpha_prev``.

    Solves ``min 0.5 ||alpha - alpha_prev||^2  s.t.  M alpha = delta``
    through the normal equations of its multipliers,
    ``M M' lam = delta - M alpha_prev``, then ``alpha = alpha_prev + M' lam``.

    ``metric="frobenius"`` weights off-diagonal coefficients by two, so the
    objective is exactly the Frobenius distance between the matrices.
    """
    M, delta = sys.M, sys.delta
    if alpha_prev is None:
        alpha_prev = np.zeros(sys.ncols)
    alpha_prev = np.asarray(alpha_prev, dtype=float)
    if metric == "alpha":
        winv = np.ones(sys.ncols)
    elif metric == "frobenius":
        winv = 1.0 / _frobenius_weights(sys.pairs)
    else:
        raise ValueError(f"unknown metric {metric!r}")
    MW = M * winv
    lam = spd_solve(MW @ M.T, delta - M @ alpha_prev)
    alpha = alpha_prev + MW.T @ lam
    return HessianModel(sym_from_alpha(alpha, sys.n, sys.pairs), alpha, "least_change")


def determined_p(n: int, pattern: SparsityPattern | None = None) -> int:
    """Number of interpolation points that makes the system square."""
    ncols = pattern.nnz if pattern is not None else n * (n + 1) // 2
    p = ncols - n
    if p < 0:
        raise ValueError("pattern has fewer structural nonzeros than variables")
    return p
