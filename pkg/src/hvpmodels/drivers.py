"""Line-search solvers sharing one iteration loop.

``inexact_newton``
    truncated CG on true Hessian-vector products.
``hessian_model`` / ``hessian_model_sparse``
    truncated CG on a recovered model Hessian; one true product per
    iteration, plus ``p`` function values at the interpolation points.
``newton_model``
    direction recovered from curvature vectors, one fresh product per
    iteration, restarts when the curvature rows become ill conditioned.

All methods stop at ``||g|| < grad_tol`` and use the same cubic line
search, so the counters are directly comparable.
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .cg import make_forcing, truncated_cg
from .core import AscentDirection, DegenerateGeometry, SingularMatrix, make_rng
from .hessian_model import assemble, determined_p, solve_determined
from .linesearch import cubic_search
from .newton_model import (
    SAFEGUARD_MODES,
    NewtonModel,
    build_conditions,
    correct_z,
    descent_safeguard,
    maybe_restart,
    solve_newton,
    z_condition,
)
from .problems import CountingOracle, Counters, ProblemDef
from .sampling import SampleSet, ball_points, fixed_directions, radius, replace_farthest

logger = logging.getLogger(__name__)

METHODS = ("inexact_newton", "hessian_model", "hessian_model_sparse", "newton_model")


@dataclass
class SolverConfig:
    method: str = "inexact_newton"
    grad_tol: float = 1e-5
    max_iter: int = 2000
    seed: int = 0
    cond_restart: float = 1e8
    eta: float = 0.95
    c1: float = 1e-4
    min_step: float = 1e-10
    force_rule: str = "sqrt"
    safeguard: str = "deficit"
    wall_clock: float | None = 60.0
    trace: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.safeguard not in SAFEGUARD_MODES:
            raise ValueError(f"unknown safeguard mode {self.safeguard!r}")
        for name in ("grad_tol", "cond_restart", "eta", "c1", "min_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class RunRecord:
    problem: str
    n: int
    method: str
    seed: int
    counters: Counters
    status: str  # converged | max_iter | linesearch_failure | numeric_failure
    final_grad_norm: float
    final_f: float
    wall_ms: float
    x: np.ndarray | None = None
    restarts: int = 0
    fallbacks: int = 0
    trace: list | None = field(default=None, repr=False)

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def write_trace(record: RunRecord, path) -> None:
    """Dump the per-iteration log as JSON lines."""
    with open(path, "w") as fh:
        for row in record.trace or []:
            fh.write(json.dumps(row) + "\n")


# ---------------------------------------------------------------------------
# direction strategies
# ---------------------------------------------------------------------------


class InexactNewton:
    def __init__(self, problem, cfg, rng):
        self.forcing = make_forcing(cfg.force_rule)
        self.restarts = self.fallbacks = 0

    def direction(self, oracle, x, f, g, gnorm, x_prev):
        res = truncated_cg(lambda v: oracle.hvp(x, v), g, self.forcing(gnorm), oracle.n)
        return res.d, res.iters


class HessianModelMethod:
    """Directions from a recovered model Hessian.

    Interpolation directions and the product direction are drawn once and
    rescaled by the current radius at every iteration.
    """

    def __init__(self, problem, cfg, rng, sparse=False):
        self.forcing = make_forcing(cfg.force_rule)
        self.pattern = problem.pattern if sparse else None
        if sparse and self.pattern is None:
            raise ValueError(f"{problem.key} has no sparsity pattern")
        self.p = determined_p(problem.n, self.pattern)
        self.y_dirs, self.v_dir = fixed_directions(rng, problem.n, self.p)
        self.restarts = self.fallbacks = 0

    def direction(self, oracle, x, f, g, gnorm, x_prev):
        r = radius(x, x_prev)
        points = x + r * self.y_dirs
        fvals = np.array([oracle.f(y) for y in points])
        v = r * self.v_dir
        w = oracle.hvp(x, v)
        try:
            sys = assemble(x, g, f, points, fvals, v, w, pattern=self.pattern)
            H = solve_determined(sys).H
        except (SingularMatrix, DegenerateGeometry):
            self.fallbacks += 1
            return -g, 0
        # products with the model are free: no oracle call here
        res = truncated_cg(lambda u: H @ u, g, self.forcing(gnorm), oracle.n)
        return res.d, res.iters


class NewtonModelMethod:
    """Directions recovered from a rolling set of ``n`` curvature vectors."""

    def __init__(self, problem, cfg, rng):
        self.rng = rng
        self.cfg = cfg
        self.S = None
        self.g_prev = None
        self.model = None
        self.restarts = self.fallbacks = 0

    def _rebuild(self, oracle, x, r):
        n = oracle.n
        points = ball_points(self.rng, x, r, n)
        fvals = np.array([oracle.f(y) for y in points])
        zvecs = np.array([oracle.hvp(x, y - x) for y in points])
        self.S = SampleSet(center=x.copy(), points=points, fvals=fvals, zvecs=zvecs)

    def _update(self, oracle, x, g, r):
        S = replace(self.S, zvecs=correct_z(self.S.zvecs, self.g_prev, g))
        S = replace_farthest(S, x, r, self.rng)
        k = S.p - 1
        y = S.points[k]
        self.S = S.with_values(k, fval=oracle.f(y), zvec=oracle.hvp(x, y - x))

    def _model(self, x, f):
        Z, rhs = build_conditions(x, f, self.S)
        return NewtonModel(d=np.zeros(x.size), Z=Z, rhs=rhs, cond_z=z_condition(Z))

    def _solve(self, model):
        try:
            model.d = solve_newton(model.Z, model.rhs)
        except SingularMatrix:
            model.singular = True

    def direction(self, oracle, x, f, g, gnorm, x_prev):
        r = radius(x, x_prev)
        since = 0
        if self.S is None:
            self._rebuild(oracle, x, r)
        else:
            self._update(oracle, x, g, r)
            since = self.model.since_restart + 1
        model = self._model(x, f)
        model.since_restart = since
        if not maybe_restart(model, self.cfg.cond_restart):
            self._solve(model)
        if maybe_restart(model, self.cfg.cond_restart):
            self.restarts += 1
            self._rebuild(oracle, x, r)
            model = self._model(x, f)
            self._solve(model)
            if model.singular:
                # still singular right after a restart: minimum-norm least squares
                self.fallbacks += 1
                model.d = np.linalg.lstsq(model.Z, model.rhs, rcond=None)[0]
        self.model = model
        self.g_prev = g
        d = descent_safeguard(model.d, g, self.cfg.eta, self.cfg.safeguard)
        return d, 0


def _strategy(problem, cfg, rng):
    if cfg.method == "inexact_newton":
        return InexactNewton(problem, cfg, rng)
    if cfg.method == "hessian_model":
        return HessianModelMethod(problem, cfg, rng, sparse=False)
    if cfg.method == "hessian_model_sparse":
        return HessianModelMethod(problem, cfg, rng, sparse=True)
    return NewtonModelMethod(problem, cfg, rng)


# ---------------------------------------------------------------------------
# shared loop
# ---------------------------------------------------------------------------


def solve(problem: ProblemDef, cfg: SolverConfig | None = None, **overrides) -> RunRecord:
    """Run ``cfg.method`` on ``problem`` from its standard start point."""
    cfg = replace(cfg or SolverConfig(), **overrides)
    t0 = time.perf_counter()
    oracle = CountingOracle(problem)
    counters = oracle.counters
    rng = make_rng(cfg.seed, problem.key)
    trace = [] if cfg.trace else None

    x = np.array(problem.x0, dtype=float)
    x_prev = None
    f = oracle.f(x)
    gnorm = np.nan
    status = "max_iter"
    strategy = None
    try:
        strategy = _strategy(problem, cfg, rng)
        while True:
            g = oracle.grad(x)
            gnorm = float(np.linalg.norm(g))
            if not (np.isfinite(f) and np.isfinite(gnorm)):
                status = "numeric_failure"
                break
            if gnorm < cfg.grad_tol:
                status = "converged"
                break
            if counters.n_iter >= cfg.max_iter:
                break
            if cfg.wall_clock is not None and time.perf_counter() - t0 > cfg.wall_clock:
                logger.warning("%s/%s hit the %.0f s wall clock", problem.key, cfg.method, cfg.wall_clock)
                break

            d, inner = strategy.direction(oracle, x, f, g, gnorm, x_prev)
            dphi0 = float(g @ d)
            if not (np.all(np.isfinite(d)) and dphi0 < 0.0):
                strategy.fallbacks += 1
                d, dphi0 = -g, -gnorm * gnorm

            ls = cubic_search(lambda a: oracle.f(x + a * d), f, dphi0, cfg.c1, cfg.min_step)
            if ls.status != "success":
                status = "linesearch_failure"
                break
            x_prev, x, f = x, x + ls.alpha * d, ls.f_new
            counters.n_iter += 1
            if trace is not None:
                trace.append(
                    {
                        "iter": counters.n_iter,
                        "f": f,
                        "gnorm": gnorm,
                        "alpha": ls.alpha,
                        "inner": inner,
                        "hvp": counters.n_hvp,
                    }
                )
    except (SingularMatrix, DegenerateGeometry, AscentDirection, FloatingPointError) as exc:
        logger.warning("%s/%s numeric failure: %s", problem.key, cfg.method, exc)
        status = "numeric_failure"

    return RunRecord(
        problem=problem.name,
        n=problem.n,
        method=cfg.method,
        seed=cfg.seed,
        counters=counters,
        status=status,
        final_grad_norm=gnorm,
        final_f=f,
        wall_ms=1e3 * (time.perf_counter() - t0),
        x=x,
        restarts=getattr(strategy, "restarts", 0),
        fallbacks=getattr(strategy, "fallbacks", 0),
        trace=trace,
    )


def run_inexact_newton(p: ProblemDef, cfg: SolverConfig | None = None) -> RunRecord:
    return solve(p, cfg, method="inexact_newton")


def run_hessian_model(p: ProblemDef, cfg: SolverConfig | None = None, sparse: bool = False) -> RunRecord:
    return solve(p, cfg, method="hessian_model_sparse" if sparse else "hessian_model")


def run_newton_model(p: ProblemDef, cfg: SolverConfig | None = None) -> RunRecord:
    return solve(p, cfg, method="newton_model")
