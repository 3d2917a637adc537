"""Dense direct solves and a 2-norm condition number.

Everything here is sized for desk-scale systems (a few hundred rows at
most), so LAPACK factorizations through scipy are used directly.
"""

import warnings

import numpy as np
import scipy.linalg as sla

from .core import SingularMatrix

#: relative pivot threshold below which a factorization is declared singular
PIVOT_TOL = 1e-14


def lu_solve(A, b):
    """Solve ``A x = b`` by LU with partial pivoting.

    Raises
    ------
    SingularMatrix
        If some pivot is below ``PIVOT_TOL * max|A|``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"lu_solve needs a square matrix, got {A.shape}")
    if A.shape[0] == 0:
        return np.zeros_like(b)
    scale = np.max(np.abs(A))
    if not np.isfinite(scale):
        raise SingularMatrix("matrix has non-finite entries")
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if np.min(pivots) < PIVOT_TOL * scale:
        raise SingularMatrix(f"pivot {np.min(pivots):.3e} below threshold (max|A| = {scale:.3e})")
    return sla.lu_solve((lu, piv), b, check_finite=False)


def spd_solve(A, b):
    """Solve a symmetric (semi)definite system, Cholesky first, LU on failure."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.shape[0] == 0:
        return np.zeros_like(b)
    try:
        c, low = sla.cho_factor(A, check_finite=False)
    except np.linalg.LinAlgError:
        return lu_solve(A, b)
    d = np.abs(np.diag(c))
    # a tiny Cholesky pivot means the matrix is semidefinite to working precision
    if np.min(d) ** 2 < PIVOT_TOL * np.max(np.abs(A)):
        return lu_solve(A, b)
    return sla.cho_solve((c, low), b, check_finite=False)


def cond2(A) -> float:
    """Ratio of extreme singular values; ``inf`` when rank deficient."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.size == 0:
        raise ValueError("cond2 of an empty matrix")
    if not np.all(np.isfinite(A)):
        return np.inf
    s = np.linalg.svd(A, compute_uv=False)
    if s[-1] == 0.0:
        return np.inf
    return float(s[0] / s[-1])
