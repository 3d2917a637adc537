"""Interpolation geometry: radius rule, fixed directions, rolling sample sets."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import DegenerateGeometry, unit_ball_sample

R_MIN = 1e-4
R_MAX = 1e-2
MIN_ANGLE = 1e-6
MAX_REGEN = 100


def radius(x_cur, x_prev=None) -> float:
    """Sampling radius ``min(1e-2, max(1e-4, ||x_cur - x_prev||))``.

    With no previous iterate the upper clamp ``1e-2`` is returned.
    """
    if x_prev is None:
        return R_MAX
    step = float(np.linalg.norm(np.asarray(x_cur) - np.asarray(x_prev)))
    return min(R_MAX, max(R_MIN, step))


def angle_between(u, v) -> float:
    """Angle in ``[0, pi/2]`` between the lines spanned by ``u`` and ``v``."""
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    u = np.asarray(u, dtype=float) / nu
    v = np.asarray(v, dtype=float) / nv
    c = float(u @ v)
    # atan2 of the orthogonal residual stays accurate for nearly parallel lines
    return float(np.arctan2(np.linalg.norm(u - c * v), abs(c)))


def fixed_directions(rng, n: int, p: int):
    """Draw ``p`` interpolation directions and one product direction.

    All vectors lie in the unit ball. The product direction is redrawn
    until it makes an angle of at least ``MIN_ANGLE`` with every
    interpolation direction.

    Returns
    -------
    y_dirs : ndarray, shape (p, n)
    v_dir : ndarray, shape (n,)
    """
    if p < 0:
        raise ValueError("p must be nonnegative")
    y_dirs = np.array([unit_ball_sample(rng, n) for _ in range(p)]).reshape(p, n)
    for _ in range(MAX_REGEN):
        v = unit_ball_sample(rng, n)
        if np.linalg.norm(v) > 0 and all(angle_between(v, y) >= MIN_ANGLE for y in y_dirs):
            return y_dirs, v
    raise DegenerateGeometry(f"no admissible product direction after {MAX_REGEN} draws")


@dataclass(frozen=True)
class SampleSet:
    """Interpolation points around a center, with optional curvature vectors.

    ``fvals`` and ``zvecs`` entries may be NaN for a point whose evaluation
    is still pending (right after :func:`replace_farthest`).
    """

    center: np.ndarray
    points: np.ndarray
    fvals: np.ndarray
    zvecs: np.ndarray | None = None
    ages: np.ndarray | None = None

    def __post_init__(self):
        p = self.points.shape[0]
        if p < 1:
            raise ValueError("a sample set needs at least one point")
        if self.fvals.shape != (p,):
            raise ValueError("one function value per point is required")
        if self.zvecs is not None and self.zvecs.shape != self.points.shape:
            raise ValueError("one z-vector per point is required")
        if self.ages is None:
            object.__setattr__(self, "ages", np.zeros(p, dtype=int))

    @property
    def p(self) -> int:
        return self.points.shape[0]

    @property
    def displacements(self) -> np.ndarray:
        return self.points - self.center

    @property
    def pending(self) -> np.ndarray:
        bad = np.isnan(self.fvals)
        if self.zvecs is not None:
            bad |= np.isnan(self.zvecs).any(axis=1)
        return np.flatnonzero(bad)

    def with_values(self, index, fval=None, zvec=None) -> "SampleSet":
        fvals = self.fvals.copy()
        zvecs = None if self.zvecs is None else self.zvecs.copy()
        if fval is not None:
            fvals[index] = fval
        if zvec is not None:
            zvecs[index] = zvec
        return replace(self, fvals=fvals, zvecs=zvecs)


def ball_points(rng, center, r: float, p: int) -> np.ndarray:
    """``p`` points drawn uniformly from the ball ``B(center, r)``."""
    center = np.asarray(center, dtype=float)
    return np.array([center + r * unit_ball_sample(rng, center.size) for _ in range(p)])


def replace_farthest(S: SampleSet, x_new, r: float, rng) -> SampleSet:
    """Drop the point farthest from ``x_new`` and append a fresh one.

    The fresh point is drawn from ``B(x_new, r)``; its function value (and
    z-vector, if the set carries them) is left pending as NaN. Ties go to
    the lowest index. The returned set is centered at ``x_new``.
    """
    x_new = np.asarray(x_new, dtype=float)
    dist = np.linalg.norm(S.points - x_new, axis=1)
    drop = int(np.argmax(dist))
    keep = np.arange(S.p) != drop
    new_point = x_new + r * unit_ball_sample(rng, x_new.size)
    points = np.vstack([S.points[keep], new_point])
    fvals = np.append(S.fvals[keep], np.nan)
    ages = np.append(S.ages[keep] + 1, 0)
    zvecs = None
    if S.zvecs is not None:
        zvecs = np.vstack([S.zvecs[keep], np.full(x_new.size, np.nan)])
    return SampleSet(center=x_new.copy(), points=points, fvals=fvals, zvecs=zvecs, ages=ages)
