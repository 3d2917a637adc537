"""Backtracking line search with quadratic/cubic interpolation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AscentDirection

C1 = 1e-4
MIN_STEP = 1e-10
SHRINK_LO = 0.1
SHRINK_HI = 0.5


@dataclass
class LineSearchResult:
    alpha: float
    f_new: float
    n_feval: int
    status: str  # "success" | "step_too_small"


def _quadratic_step(phi0, dphi0, a, fa):
    denom = 2.0 * (fa - phi0 - dphi0 * a)
    if denom <= 0.0:
        return np.nan
    return -dphi0 * a * a / denom


def _cubic_step(phi0, dphi0, a0, f0, a1, f1):
    """Minimizer of the cubic through ``phi(0)``, ``phi'(0)``, ``(a0, f0)``, ``(a1, f1)``."""
    e1 = f1 - phi0 - dphi0 * a1
    e0 = f0 - phi0 - dphi0 * a0
    den = a0 * a0 * a1 * a1 * (a1 - a0)
    if den == 0.0:
        return np.nan
    a = (a0 * a0 * e1 - a1 * a1 * e0) / den
    b = (-(a0**3) * e1 + a1**3 * e0) / den
    if a == 0.0:
        return -dphi0 / (2.0 * b) if b > 0.0 else np.nan
    disc = b * b - 3.0 * a * dphi0
    if disc < 0.0:
        return np.nan
    den = b + np.sqrt(disc)
    if den == 0.0:
        return np.nan
    # algebraically equal to (-b + sqrt(disc)) / (3a), without cancellation
    return -dphi0 / den


def _safeguard(trial, a_last):
    """Keep a model step inside ``[0.1, 0.5] * a_last``; halve if unusable."""
    if not np.isfinite(trial) or trial <= 0.0 or trial >= a_last:
        return 0.5 * a_last
    return min(max(trial, SHRINK_LO * a_last), SHRINK_HI * a_last)


def cubic_search(phi, phi0: float, dphi0: float, c1: float = C1, min_step: float = MIN_STEP) -> LineSearchResult:
    """Find a step satisfying ``phi(a) <= phi0 + c1 * a * dphi0``.

    The unit step is tried first. The first backtrack minimizes the
    quadratic through ``phi0``, ``dphi0`` and ``phi(1)``; later ones minimize
    the cubic that also passes through the previous trial. Each new step is
    kept in ``[0.1, 0.5]`` times the last one. Gives up, without evaluating,
    once the step would drop below ``min_step``.
    """
    if not dphi0 < 0.0:
        raise AscentDirection(f"directional derivative {dphi0} is not negative")
    nfev = 0
    a_prev = f_prev = None
    a = 1.0
    while True:
        fa = float(phi(a))
        nfev += 1
        if np.isfinite(fa) and fa <= phi0 + c1 * a * dphi0:
            return LineSearchResult(float(a), fa, nfev, "success")
        if not np.isfinite(fa):
            trial = np.nan
        elif a_prev is None:
            trial = _quadratic_step(phi0, dphi0, a, fa)
        else:
            trial = _cubic_step(phi0, dphi0, a_prev, f_prev, a, fa)
        a_next = _safeguard(trial, a)
        a_prev, f_prev = a, fa
        if a_next < min_step:
            return LineSearchResult(float(a_next), fa, nfev, "step_too_small")
        a = a_next
