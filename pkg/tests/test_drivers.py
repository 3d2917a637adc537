import json

import numpy as np
import pytest

from conftest import random_spd
from hvpmodels import drivers
from hvpmodels.cg import make_forcing, truncated_cg
from hvpmodels.core import make_rng
from hvpmodels.drivers import SolverConfig, run_hessian_model, run_inexact_newton, run_newton_model, solve, write_trace
from hvpmodels.linesearch import cubic_search
from hvpmodels.problems import custom_problem, make_problem, quadratic_problem


def test_identity_quadratic_one_iteration():
    rec = run_inexact_newton(quadratic_problem(np.eye(4)))
    assert rec.converged and rec.counters.n_iter == 1
    np.testing.assert_allclose(rec.x, 0.0, atol=1e-14)


def test_tridia_inexact_newton():
    rec = run_inexact_newton(make_problem("TRIDIA", 10))
    assert rec.converged and rec.final_grad_norm < 1e-5


def test_stationary_start():
    p = quadratic_problem(np.eye(3), x0=np.zeros(3))
    for method in drivers.METHODS[:2] + drivers.METHODS[3:]:
        rec = solve(p, method=method)
        assert rec.converged and rec.counters.n_iter == 0 and rec.counters.n_hvp == 0


def test_hessian_model_matches_newton_on_quadratic():
    rng = make_rng(31)
    C = random_spd(rng, 5)
    p = quadratic_problem(C, rng.standard_normal(5), 3 * rng.standard_normal(5))
    a = solve(p, method="inexact_newton", trace=True)
    b = solve(p, method="hessian_model", trace=True)
    assert a.counters.n_iter == b.counters.n_iter
    fa = [t["f"] for t in a.trace]
    fb = [t["f"] for t in b.trace]
    np.testing.assert_allclose(fb, fa, rtol=1e-8, atol=1e-12)
    np.testing.assert_allclose(b.x, a.x, atol=1e-8)


def test_beale_costs():
    rec = run_hessian_model(make_problem("BEALE", 2))
    c = rec.counters
    assert rec.converged
    assert c.n_hvp == c.n_iter
    # f(x0), one interpolation value per iteration, at least one trial step
    assert c.n_f - 1 - c.n_iter >= c.n_iter


def test_tridia_sparse_costs():
    p = make_problem("TRIDIA", 10)
    assert p.pattern.nnz == 19
    rec = run_hessian_model(p, sparse=True, cfg=SolverConfig(trace=True))
    assert rec.converged and rec.counters.n_hvp == rec.counters.n_iter
    assert rec.counters.n_f >= 1 + 10 * rec.counters.n_iter


def test_newton_model_quadratic_one_step():
    # eigenvalues in [1, 1.5] keep the Newton step within the eta cone
    rng = make_rng(5)
    Q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    C = Q @ np.diag(rng.uniform(1.0, 1.5, 5)) @ Q.T
    rec = run_newton_model(quadratic_problem(C, rng.standard_normal(5), rng.standard_normal(5)))
    assert rec.converged and rec.counters.n_iter == 1 and rec.counters.n_hvp == 5


def test_newton_model_descent_mode_any_quadratic():
    rng = make_rng(6)
    C = random_spd(rng, 6)
    rec = solve(quadratic_problem(C, rng.standard_normal(6)), method="newton_model", safeguard="descent")
    assert rec.converged and rec.counters.n_iter == 1 and rec.counters.n_hvp == 6


def test_newton_model_restart_on_degenerate_geometry(monkeypatch):
    real = drivers.ball_points
    calls = []

    def degenerate_once(rng, center, r, p):
        calls.append(p)
        pts = real(rng, center, r, p)
        if len(calls) == 1:
            pts[:] = center + r * np.linspace(0.1, 1.0, p)[:, None] * np.ones(len(center)) / np.sqrt(len(center))
        return pts

    monkeypatch.setattr(drivers, "ball_points", degenerate_once)
    p = make_problem("DQDRTIC", 10)
    rec = solve(p, method="newton_model", trace=True)
    assert rec.restarts >= 1
    assert rec.trace[0]["hvp"] == 20


def test_newton_model_srosenbr_beats_baseline():
    p = make_problem("SROSENBR", 50)
    a = run_inexact_newton(p)
    c = run_newton_model(p)
    assert c.converged and c.counters.n_hvp < a.counters.n_hvp


def _reference_inexact_newton(p, tol=1e-5, max_iter=2000):
    """Plain loop written from the algorithm description, with its own counters."""
    n_f = n_g = n_hvp = it = 0
    x = p.x0.copy()
    f = p.eval_f(x)
    n_f += 1
    forcing = make_forcing("sqrt")

    def hvp(v):
        nonlocal n_hvp
        n_hvp += 1
        return p.eval_hvp(x, v)

    while True:
        g = p.eval_grad(x)
        n_g += 1
        if np.linalg.norm(g) < tol or it >= max_iter:
            break
        d = truncated_cg(hvp, g, forcing(np.linalg.norm(g))).d
        counter = [0]

        def phi(a):
            counter[0] += 1
            return p.eval_f(x + a * d)

        ls = cubic_search(phi, f, float(g @ d))
        n_f += counter[0]
        x = x + ls.alpha * d
        f = ls.f_new
        it += 1
    return x, (n_f, n_g, n_hvp, it)


@pytest.mark.parametrize("name, n", [("BEALE", 2), ("TRIDIA", 10), ("COSINE", 10)])
def test_shared_loop_matches_reference(name, n):
    p = make_problem(name, n)
    rec = run_inexact_newton(p)
    x_ref, counts = _reference_inexact_newton(p)
    c = rec.counters
    assert (c.n_f, c.n_grad, c.n_hvp, c.n_iter) == counts
    np.testing.assert_array_equal(rec.x, x_ref)


SMALL = ["BEALE-2", "BOX3-3", "COSINE-10", "DQDRTIC-10", "TRIDIA-10", "HILBERTB-10"]


@pytest.mark.parametrize("key", SMALL)
@pytest.mark.parametrize("method", drivers.METHODS)
def test_monotone_and_descent(key, method, monkeypatch):
    name, n = key.split("-")
    seen = []
    real = drivers.cubic_search

    def checked(phi, phi0, dphi0, *args):
        seen.append(dphi0)
        return real(phi, phi0, dphi0, *args)

    monkeypatch.setattr(drivers, "cubic_search", checked)
    rec = solve(make_problem(name, int(n)), method=method, trace=True)
    assert all(d < 0 for d in seen)
    f = [t["f"] for t in rec.trace]
    assert all(b < a for a, b in zip(f, f[1:]))
    if rec.converged:
        assert rec.final_grad_norm < 1e-5


@pytest.mark.parametrize("key", SMALL + ["ARWHEAD-10", "ENGVAL2-3"])
def test_hvp_accounting(key):
    name, n = key.split("-")
    p = make_problem(name, int(n))
    b = solve(p, method="hessian_model")
    assert b.counters.n_hvp == b.counters.n_iter
    c = solve(p, method="newton_model")
    if c.status in ("converged", "max_iter"):
        assert c.counters.n_hvp == p.n + (c.counters.n_iter - 1) + p.n * c.restarts


def test_numeric_failure_status():
    p = custom_problem("NANNY", lambda x: np.nan, lambda x: x, lambda x, v: v, np.ones(2))
    assert solve(p).status == "numeric_failure"


def test_wall_clock_clamp():
    rec = solve(make_problem("SROSENBR", 50), method="newton_model", wall_clock=0.0)
    assert rec.status == "max_iter" and rec.counters.n_iter == 0


def test_max_iter_status():
    rec = solve(make_problem("CUBE", 2), max_iter=3)
    assert rec.status == "max_iter" and rec.counters.n_iter == 3


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(method="bfgs")
    with pytest.raises(ValueError):
        SolverConfig(grad_tol=0.0)
    with pytest.raises(ValueError):
        SolverConfig(safeguard="never")


def test_sparse_needs_pattern():
    with pytest.raises(ValueError):
        solve(quadratic_problem(np.eye(2)), method="hessian_model_sparse")


def test_trace_file(tmp_path):
    rec = solve(make_problem("BEALE", 2), trace=True)
    path = tmp_path / "trace.jsonl"
    write_trace(rec, path)
    rows = [json.loads(line) for line in path.read_text().splitlines()]
    assert len(rows) == rec.counters.n_iter
    assert set(rows[0]) == {"iter", "f", "gnorm", "alpha", "inner", "hvp"}
    assert rows[-1]["hvp"] == rec.counters.n_hvp
