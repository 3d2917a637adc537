"""Hessian-free optimization with models built from Hessian-vector products.

Two recovery schemes are provided, each paired with a line-search solver:

* :mod:`hvpmodels.hessian_model` recovers a model Hessian from quadratic
  interpolation conditions enriched with a single Hessian-vector product;
* :mod:`hvpmodels.newton_model` recovers the Newton direction directly from
  curvature vectors ``z = hess(x)(y - x)``.

:mod:`hvpmodels.drivers` runs them next to a truncated-Newton CG baseline and
:mod:`hvpmodels.bench` compares them with performance profiles.
"""

from .core import (
    AscentDirection,
    DegenerateGeometry,
    EmptyInput,
    SingularMatrix,
    SparsityPattern,
    ZeroGradient,
    make_rng,
)
from .drivers import METHODS, RunRecord, SolverConfig, run_hessian_model, run_inexact_newton, run_newton_model, solve
from .problems import ProblemDef, make_problem, problem_set, quadratic_problem, registry

__version__ = "0.1.0"

__all__ = [
    "AscentDirection",
    "DegenerateGeometry",
    "EmptyInput",
    "METHODS",
    "ProblemDef",
    "RunRecord",
    "SingularMatrix",
    "SolverConfig",
    "SparsityPattern",
    "ZeroGradient",
    "make_problem",
    "make_rng",
    "problem_set",
    "quadratic_problem",
    "registry",
    "run_hessian_model",
    "run_inexact_newton",
    "run_newton_model",
    "solve",
]
