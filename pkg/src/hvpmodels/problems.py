"""Analytic unconstrained test problems with exact Hessian-vector products.

Each problem is a native re-implementation of a CUTEst SIF model. The
Hessian-vector product is coded from the element structure of the
objective, so one call to ``eval_hvp`` is one genuine oracle call and never
forms the Hessian (the constant dense Hessian of HILBERTB is the only
exception, and there the product *is* the oracle).

Dimensions follow the problem tables the benchmark reproduces. Problem sets:

``appB``
    very small problems, used for the dense model-Hessian method,
``appC``
    sparse problems with a known Hessian pattern,
``appD``
    larger problems for the Newton-direction method.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import SparsityPattern, make_rng

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProblemDef:
    name: str
    n: int
    x0: np.ndarray
    eval_f: Callable[[np.ndarray], float]
    eval_grad: Callable[[np.ndarray], np.ndarray]
    eval_hvp: Callable[[np.ndarray, np.ndarray], np.ndarray]
    pattern: SparsityPattern | None = None
    strictly_convex: bool = False

    @property
    def key(self) -> str:
        return f"{self.name}-{self.n}"


@dataclass
class Counters:
    n_f: int = 0
    n_grad: int = 0
    n_hvp: int = 0
    n_iter: int = 0


class CountingOracle:
    """Per-run wrapper around a problem that counts every oracle call."""

    def __init__(self, problem: ProblemDef, counters: Counters | None = None):
        self.problem = problem
        self.counters = counters if counters is not None else Counters()

    @property
    def n(self):
        return self.problem.n

    def f(self, x):
        self.counters.n_f += 1
        return float(self.problem.eval_f(x))

    def grad(self, x):
        self.counters.n_grad += 1
        return self.problem.eval_grad(x)

    def hvp(self, x, v):
        self.counters.n_hvp += 1
        return self.problem.eval_hvp(x, v)


# ---------------------------------------------------------------------------
# objective definitions
# ---------------------------------------------------------------------------


def _arwhead(n):
    def f(x):
        a, xn = x[:-1], x[-1]
        return np.sum(-4.0 * a + 3.0) + np.sum((a**2 + xn**2) ** 2)

    def grad(x):
        a, xn = x[:-1], x[-1]
        s = a**2 + xn**2
        g = np.empty(n)
        g[:-1] = -4.0 + 4.0 * s * a
        g[-1] = np.sum(4.0 * s * xn)
        return g

    def hvp(x, v):
        a, xn = x[:-1], x[-1]
        s = a**2 + xn**2
        out = np.empty(n)
        out[:-1] = (4.0 * s + 8.0 * a**2) * v[:-1] + 8.0 * a * xn * v[-1]
        out[-1] = np.sum(8.0 * a * xn * v[:-1]) + np.sum(4.0 * s + 8.0 * xn**2) * v[-1]
        return out

    supports = [(i, n - 1) for i in range(n - 1)]
    return f, grad, hvp, np.ones(n), supports


def _least_squares(residuals):
    """Build f/grad/hvp from ``residuals(x) -> (r, J, curv)``.

    ``curv(v)`` must return ``sum_k r_k * (hess r_k) v``.
    """

    def f(x):
        r, _, _ = residuals(x)
        return float(r @ r)

    def grad(x):
        r, J, _ = residuals(x)
        return 2.0 * (J.T @ r)

    def hvp(x, v):
        _, J, curv = residuals(x)
        return 2.0 * (J.T @ (J @ v) + curv(v))

    return f, grad, hvp


def _beale(n):
    c = np.array([1.5, 2.25, 2.625])
    k = np.array([1.0, 2.0, 3.0])

    def residuals(x):
        x1, x2 = x
        r = x1 * (1.0 - x2**k) - c
        J = np.column_stack([1.0 - x2**k, -k * x1 * x2 ** (k - 1)])
        h12 = -k * x2 ** (k - 1)
        h22 = -k * (k - 1) * x1 * x2 ** np.maximum(k - 2, 0)

        def curv(v):
            return np.array([np.sum(r * h12) * v[1], np.sum(r * h12) * v[0] + np.sum(r * h22) * v[1]])

        return r, J, curv

    f, grad, hvp = _least_squares(residuals)
    return f, grad, hvp, np.array([1.0, 1.0]), [(0, 1)]


def _cube(n):
    def residuals(x):
        x1, x2 = x
        r = np.array([x1 - 1.0, 10.0 * (x2 - x1**3)])
        J = np.array([[1.0, 0.0], [-30.0 * x1**2, 10.0]])

        def curv(v):
            return np.array([r[1] * (-60.0 * x1) * v[0], 0.0])

        return r, J, curv

    f, grad, hvp = _least_squares(residuals)
    return f, grad, hvp, np.array([-1.2, 1.0]), [(0, 1)]


def _diagonal_quadratic(coef, x0):
    def f(x):
        return float(np.sum(coef * x**2))

    def grad(x):
        return 2.0 * coef * x

    def hvp(x, v):
        return 2.0 * coef * v

    return f, grad, hvp, x0, [(i,) for i in range(len(coef))]


def _dqdrtic(n):
    coef = np.zeros(n)
    coef[: n - 2] += 1.0
    coef[1 : n - 1] += 100.0
    coef[2:] += 100.0
    return _diagonal_quadratic(coef, np.full(n, 3.0))


def _testquad(n):
    # 0.5 * sum_i i * x_i^2
    return _diagonal_quadratic(0.5 * np.arange(1.0, n + 1), np.ones(n))


def _dixon3dq(n):
    def f(x):
        return float((x[0] - 1.0) ** 2 + np.sum((x[1:-1] - x[2:]) ** 2) + (x[-1] - 1.0) ** 2)

    def _lin(u, shift0, shiftn):
        g = np.zeros(n)
        g[0] += 2.0 * (u[0] - shift0)
        d = u[1:-1] - u[2:]
        g[1:-1] += 2.0 * d
        g[2:] -= 2.0 * d
        g[-1] += 2.0 * (u[-1] - shiftn)
        return g

    def grad(x):
        return _lin(x, 1.0, 1.0)

    def hvp(x, v):
        return _lin(v, 0.0, 0.0)

    supports = [(0,), (n - 1,)] + [(i, i + 1) for i in range(1, n - 1)]
    return f, grad, hvp, np.full(n, -1.0), supports


def _tridia(n):
    w = np.arange(2.0, n + 1)  # weights i = 2..n

    def f(x):
        e = 2.0 * x[1:] - x[:-1]
        return float((x[0] - 1.0) ** 2 + np.sum(w * e**2))

    def _lin(u, shift0):
        g = np.zeros(n)
        g[0] = 2.0 * (u[0] - shift0)
        e = 2.0 * w * (2.0 * u[1:] - u[:-1])
        g[1:] += 2.0 * e
        g[:-1] -= e
        return g

    def grad(x):
        return _lin(x, 1.0)

    def hvp(x, v):
        return _lin(v, 0.0)

    supports = [(i, i + 1) for i in range(n - 1)]
    return f, grad, hvp, np.ones(n), supports


def _hilbertb(n):
    i = np.arange(1.0, n + 1)
    A = 1.0 / (i[:, None] + i[None, :] - 1.0) + 10.0 * np.eye(n)

    def f(x):
        return float(0.5 * x @ A @ x)

    def grad(x):
        return A @ x

    def hvp(x, v):
        return A @ v

    return f, grad, hvp, np.full(n, -3.0), [tuple(range(n))]


def _engval2(n):
    def residuals(x):
        x1, x2, x3 = x
        u = 5.0 * x3 - x1 + 1.0
        r = np.array(
            [
                x1**2 + x2**2 + x3**2 - 1.0,
                x1**2 + x2**2 + (x3 - 2.0) ** 2 - 1.0,
                x1 + x2 + x3 - 1.0,
                x1 + x2 - x3 + 1.0,
                x1**3 + 3.0 * x2**2 + u**2 - 36.0,
            ]
        )
        J = np.array(
            [
                [2.0 * x1, 2.0 * x2, 2.0 * x3],
                [2.0 * x1, 2.0 * x2, 2.0 * (x3 - 2.0)],
                [1.0, 1.0, 1.0],
                [1.0, 1.0, -1.0],
                [3.0 * x1**2 - 2.0 * u, 6.0 * x2, 10.0 * u],
            ]
        )
        H5 = np.array([[6.0 * x1 + 2.0, 0.0, -10.0], [0.0, 6.0, 0.0], [-10.0, 0.0, 50.0]])

        def curv(v):
            return 2.0 * (r[0] + r[1]) * v + r[4] * (H5 @ v)

        return r, J, curv

    f, grad, hvp = _least_squares(residuals)
    return f, grad, hvp, np.array([1.0, 2.0, 0.0]), [(0, 1, 2)]


def _box3(n):
    t = 0.1 * np.arange(1.0, 11.0)
    c = np.exp(-t) - np.exp(-10.0 * t)

    def residuals(x):
        x1, x2, x3 = x
        e1 = np.exp(-t * x1)
        e2 = np.exp(-t * x2)
        r = e1 - e2 - x3 * c
        J = np.column_stack([-t * e1, t * e2, -c])

        def curv(v):
            return np.array([np.sum(r * t**2 * e1) * v[0], -np.sum(r * t**2 * e2) * v[1], 0.0])

        return r, J, curv

    f, grad, hvp = _least_squares(residuals)
    return f, grad, hvp, np.array([0.0, 10.0, 1.0]), [(0, 1, 2)]


def _cosine(n):
    def f(x):
        return float(np.sum(np.cos(x[:-1] ** 2 - 0.5 * x[1:])))

    def grad(x):
        s = np.sin(x[:-1] ** 2 - 0.5 * x[1:])
        g = np.zeros(n)
        g[:-1] -= 2.0 * x[:-1] * s
        g[1:] += 0.5 * s
        return g

    def hvp(x, v):
        a = x[:-1]
        u = a**2 - 0.5 * x[1:]
        cu, su = np.cos(u), np.sin(u)
        du = 2.0 * a * v[:-1] - 0.5 * v[1:]
        out = np.zeros(n)
        out[:-1] -= cu * du * 2.0 * a + 2.0 * su * v[:-1]
        out[1:] += 0.5 * cu * du
        return out

    supports = [(i, i + 1) for i in range(n - 1)]
    return f, grad, hvp, np.ones(n), supports


def _engval1(n):
    def f(x):
        q = x[:-1] ** 2 + x[1:] ** 2
        return float(np.sum(q**2 - 4.0 * x[:-1] + 3.0))

    def grad(x):
        q = x[:-1] ** 2 + x[1:] ** 2
        g = np.zeros(n)
        g[:-1] += 4.0 * q * x[:-1] - 4.0
        g[1:] += 4.0 * q * x[1:]
        return g

    def hvp(x, v):
        a, b = x[:-1], x[1:]
        q = a**2 + b**2
        qv = 2.0 * a * v[:-1] + 2.0 * b * v[1:]
        out = np.zeros(n)
        out[:-1] += 4.0 * qv * a + 4.0 * q * v[:-1]
        out[1:] += 4.0 * qv * b + 4.0 * q * v[1:]
        return out

    supports = [(i, i + 1) for i in range(n - 1)]
    return f, grad, hvp, np.full(n, 2.0), supports


def _liarwhd(n):
    def f(x):
        return float(np.sum(4.0 * (x**2 - x[0]) ** 2 + (x - 1.0) ** 2))

    def grad(x):
        e = x**2 - x[0]
        g = 16.0 * e * x + 2.0 * (x - 1.0)
        g[0] -= 8.0 * np.sum(e)
        return g

    def hvp(x, v):
        e = x**2 - x[0]
        a = 2.0 * x * v - v[0]
        out = 16.0 * a * x + 16.0 * e * v + 2.0 * v
        out[0] -= 8.0 * np.sum(a)
        return out

    supports = [(0, i) for i in range(n)]
    return f, grad, hvp, np.full(n, 4.0), supports


def _srosenbr(n):
    if n % 2:
        raise ValueError("SROSENBR needs an even dimension")

    def f(x):
        o, e = x[0::2], x[1::2]
        return float(np.sum(100.0 * (e - o**2) ** 2 + (1.0 - o) ** 2))

    def grad(x):
        o, e = x[0::2], x[1::2]
        r = e - o**2
        g = np.empty(n)
        g[0::2] = -400.0 * r * o - 2.0 * (1.0 - o)
        g[1::2] = 200.0 * r
        return g

    def hvp(x, v):
        o, e = x[0::2], x[1::2]
        vo, ve = v[0::2], v[1::2]
        out = np.empty(n)
        out[0::2] = (1200.0 * o**2 - 400.0 * e + 2.0) * vo - 400.0 * o * ve
        out[1::2] = -400.0 * o * vo + 200.0 * ve
        return out

    x0 = np.empty(n)
    x0[0::2] = -1.2
    x0[1::2] = 1.0
    supports = [(2 * k, 2 * k + 1) for k in range(n // 2)]
    return f, grad, hvp, x0, supports


def _dqrtic(n):
    i = np.arange(1.0, n + 1)

    def f(x):
        return float(np.sum((x - i) ** 4))

    def grad(x):
        return 4.0 * (x - i) ** 3

    def hvp(x, v):
        return 12.0 * (x - i) ** 2 * v

    return f, grad, hvp, np.full(n, 2.0), [(k,) for k in range(n)]


def _edensch(n):
    def f(x):
        a, b = x[:-1], x[1:]
        return float(16.0 + np.sum((a - 2.0) ** 4 + (a * b - 2.0 * b) ** 2 + (b + 1.0) ** 2))

    def grad(x):
        a, b = x[:-1], x[1:]
        t = b * (a - 2.0)
        g = np.zeros(n)
        g[:-1] += 4.0 * (a - 2.0) ** 3 + 2.0 * t * b
        g[1:] += 2.0 * t * (a - 2.0) + 2.0 * (b + 1.0)
        return g

    def hvp(x, v):
        a, b = x[:-1], x[1:]
        va, vb = v[:-1], v[1:]
        t = b * (a - 2.0)
        out = np.zeros(n)
        out[:-1] += (12.0 * (a - 2.0) ** 2 + 2.0 * b**2) * va + 4.0 * t * vb
        out[1:] += 4.0 * t * va + (2.0 * (a - 2.0) ** 2 + 2.0) * vb
        return out

    supports = [(i, i + 1) for i in range(n - 1)]
    return f, grad, hvp, np.full(n, 8.0), supports


def _bdqrtic(n):
    T = n - 4
    K = np.column_stack([np.arange(T) + k for k in range(4)] + [np.full(T, n - 1)])
    c = np.array([1.0, 2.0, 3.0, 4.0, 5.0])

    def f(x):
        q = np.sum(c * x[K] ** 2, axis=1)
        return float(np.sum((-4.0 * x[:T] + 3.0) ** 2) + np.sum(q**2))

    def grad(x):
        xk = x[K]
        q = np.sum(c * xk**2, axis=1)
        g = np.zeros(n)
        g[:T] += 32.0 * x[:T] - 24.0
        np.add.at(g, K, 4.0 * q[:, None] * c * xk)
        return g

    def hvp(x, v):
        xk, vk = x[K], v[K]
        q = np.sum(c * xk**2, axis=1)
        s = np.sum(2.0 * c * xk * vk, axis=1)
        out = np.zeros(n)
        out[:T] += 32.0 * v[:T]
        np.add.at(out, K, 4.0 * s[:, None] * c * xk + 4.0 * q[:, None] * c * vk)
        return out

    return f, grad, hvp, np.ones(n), [tuple(row) for row in K]


_BUILDERS = {
    "ARWHEAD": (_arwhead, False),
    "BEALE": (_beale, False),
    "BDQRTIC": (_bdqrtic, False),
    "BOX3": (_box3, False),
    "COSINE": (_cosine, False),
    "CUBE": (_cube, False),
    "DIXON3DQ": (_dixon3dq, True),
    "DQDRTIC": (_dqdrtic, True),
    "DQRTIC": (_dqrtic, False),
    "EDENSCH": (_edensch, False),
    "ENGVAL1": (_engval1, False),
    "ENGVAL2": (_engval2, False),
    "HILBERTB": (_hilbertb, True),
    "LIARWHD": (_liarwhd, False),
    "SROSENBR": (_srosenbr, False),
    "TESTQUAD": (_testquad, True),
    "TRIDIA": (_tridia, True),
}

PROBLEM_SETS = {
    "appB": [
        ("ARWHEAD", 10),
        ("BEALE", 2),
        ("BOX3", 3),
        ("COSINE", 10),
        ("CUBE", 2),
        ("DIXON3DQ", 10),
        ("DQDRTIC", 10),
        ("ENGVAL2", 3),
        ("HILBERTB", 10),
        ("TRIDIA", 10),
    ],
    "appC": [
        ("BDQRTIC", 10),
        ("COSINE", 200),
        ("DQRTIC", 10),
        ("EDENSCH", 200),
        ("ENGVAL1", 200),
        ("LIARWHD", 100),
        ("SROSENBR", 50),
        ("TRIDIA", 200),
    ],
    "appD": [
        ("DIXON3DQ", 200),
        ("DQDRTIC", 100),
        ("EDENSCH", 200),
        ("ENGVAL1", 200),
        ("LIARWHD", 200),
        ("SROSENBR", 50),
        ("SROSENBR", 100),
        ("TESTQUAD", 100),
        ("TRIDIA", 200),
    ],
}


def make_problem(name: str, n: int) -> ProblemDef:
    """Instantiate problem ``name`` in dimension ``n``."""
    try:
        builder, convex = _BUILDERS[name.upper()]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}") from None
    f, grad, hvp, x0, supports = builder(n)
    pattern = SparsityPattern.from_supports(n, supports)
    if any((i, i) not in pattern for i in range(n)):
        # every variable enters nonlinearly in all problems here; keep the
        # diagonal structural so the sparse recovery system stays square
        pattern = SparsityPattern.from_pairs(n, list(pattern.pairs) + [(i, i) for i in range(n)])
    return ProblemDef(
        name=name.upper(),
        n=n,
        x0=np.asarray(x0, dtype=float),
        eval_f=f,
        eval_grad=grad,
        eval_hvp=hvp,
        pattern=pattern,
        strictly_convex=convex,
    )


def registry() -> list[ProblemDef]:
    """Every distinct (name, dimension) instance across all problem sets."""
    seen = []
    for entries in PROBLEM_SETS.values():
        for entry in entries:
            if entry not in seen:
                seen.append(entry)
    return [make_problem(name, n) for name, n in sorted(seen)]


def problem_set(name: str) -> list[ProblemDef]:
    if name not in PROBLEM_SETS:
        raise KeyError(f"unknown problem set {name!r}; choose from {sorted(PROBLEM_SETS)}")
    return [make_problem(p, n) for p, n in PROBLEM_SETS[name]]


def select_problems(selector: str) -> list[ProblemDef]:
    """Resolve a comma-separated list of ``NAME`` or ``NAME-n`` tokens.

    A bare name selects every registered dimension of that problem.
    """
    available = registry()
    chosen = []
    for token in (t.strip() for t in selector.split(",")):
        if not token:
            continue
        if "-" in token:
            name, dim = token.rsplit("-", 1)
            hits = [make_problem(name, int(dim))]
        else:
            hits = [p for p in available if p.name == token.upper()]
            if not hits:
                raise KeyError(f"unknown problem {token!r}")
        for p in hits:
            if p.key not in {q.key for q in chosen}:
                chosen.append(p)
    return chosen


# ---------------------------------------------------------------------------
# derivative checks
# ---------------------------------------------------------------------------


@dataclass
class FdReport:
    problem: str
    grad_max_err: float
    hvp_max_err: float
    grad_failures: list[int] = field(default_factory=list)
    hvp_failures: list[tuple[int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.grad_failures and not self.hvp_failures

    def __str__(self):
        status = "ok" if self.ok else "MISMATCH"
        text = f"{self.problem}: {status} (grad err {self.grad_max_err:.2e}, hvp err {self.hvp_max_err:.2e})"
        if self.grad_failures:
            text += f"; gradient components {self.grad_failures}"
        if self.hvp_failures:
            text += f"; hvp (probe, component) {self.hvp_failures}"
        return text


class MismatchReport(AssertionError):
    """Raised by :func:`fd_check` when an oracle disagrees with finite differences."""

    def __init__(self, report: FdReport):
        super().__init__(str(report))
        self.report = report


def fd_check(p: ProblemDef, x=None, rng=None, grad_rtol=1e-5, hvp_rtol=1e-4, n_probes=5) -> FdReport:
    """Compare the gradient and HVP oracles against central differences.

    Errors are measured componentwise, relative to ``max(1, ||.||_inf)`` of
    the analytic quantity.

    Raises
    ------
    MismatchReport
        If any component exceeds its tolerance; the report lists them.
    """
    x = np.array(p.x0 if x is None else x, dtype=float)
    rng = make_rng(0, p.key) if rng is None else rng
    n = p.n
    h = 1e-6 * (1.0 + np.linalg.norm(x))

    g = np.asarray(p.eval_grad(x), dtype=float)
    g_fd = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        g_fd[i] = (p.eval_f(x + e) - p.eval_f(x - e)) / (2.0 * h)
    gscale = max(1.0, np.max(np.abs(g)))
    gerr = np.abs(g_fd - g) / gscale
    grad_failures = [int(i) for i in np.flatnonzero(gerr > grad_rtol)]

    hvp_failures = []
    herr_max = 0.0
    for k in range(n_probes):
        v = rng.standard_normal(n)
        v /= np.linalg.norm(v)
        hv = np.asarray(p.eval_hvp(x, v), dtype=float)
        hv_fd = (p.eval_grad(x + h * v) - p.eval_grad(x - h * v)) / (2.0 * h)
        hscale = max(1.0, np.max(np.abs(hv)))
        herr = np.abs(hv_fd - hv) / hscale
        herr_max = max(herr_max, float(np.max(herr)))
        hvp_failures.extend((k, int(i)) for i in np.flatnonzero(herr > hvp_rtol))

    report = FdReport(p.key, float(np.max(gerr)), herr_max, grad_failures, hvp_failures)
    if not report.ok:
        raise MismatchReport(report)
    return report


def custom_problem(name, f, grad, hvp, x0, pattern=None) -> ProblemDef:
    """Wrap user callables as a :class:`ProblemDef`."""
    x0 = np.asarray(x0, dtype=float)
    return ProblemDef(name=name, n=x0.size, x0=x0, eval_f=f, eval_grad=grad, eval_hvp=hvp, pattern=pattern)


def quadratic_problem(C, b=None, x0=None, name="QUADRATIC") -> ProblemDef:
    """``f(x) = 0.5 x'Cx + b'x`` with exact oracles."""
    C = np.asarray(C, dtype=float)
    n = C.shape[0]
    b = np.zeros(n) if b is None else np.asarray(b, dtype=float)
    x0 = np.ones(n) if x0 is None else np.asarray(x0, dtype=float)
    return custom_problem(
        name,
        lambda x: float(0.5 * x @ C @ x + b @ x),
        lambda x: C @ x + b,
        lambda x, v: C @ v,
        x0,
    )
