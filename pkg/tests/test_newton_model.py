import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import brentq

from conftest import quad, random_spd
from hvpmodels.core import SingularMatrix, ZeroGradient, make_rng
from hvpmodels.newton_model import (
    NewtonModel,
    build_conditions,
    correct_z,
    descent_safeguard,
    diagnostics,
    maybe_restart,
    ry_diagnostic,
    scaled_z_matrix,
    solve_newton,
    z_condition,
)
from hvpmodels.sampling import SampleSet, ball_points

C2 = np.array([[2.0, 1.0], [1.0, 3.0]])


def _quad_set(C, x, pts, b=None):
    f, _ = quad(C, b)
    pts = np.asarray(pts, dtype=float)
    return SampleSet(x, pts, np.array([f(y) for y in pts]), np.array([C @ (y - x) for y in pts]))


def test_two_row_example():
    x = np.ones(2)
    S = _quad_set(C2, x, [[2, 1], [1, 2]])
    Z, rhs = build_conditions(x, 3.5, S)
    np.testing.assert_array_equal(Z, [[2, 1], [1, 3]])
    np.testing.assert_allclose(rhs, [-3, -4])
    np.testing.assert_allclose(solve_newton(Z, rhs), [-1, -1])


def test_stationary_point_gives_zero_rhs():
    rng = make_rng(2)
    C = random_spd(rng, 3)
    x = np.zeros(3)
    S = _quad_set(C, x, ball_points(rng, x, 0.1, 3))
    Z, rhs = build_conditions(x, 0.0, S)
    np.testing.assert_allclose(rhs, 0.0, atol=1e-15)
    np.testing.assert_allclose(solve_newton(Z, rhs), 0.0, atol=1e-14)


def test_build_conditions_needs_z():
    S = SampleSet(np.zeros(2), np.ones((2, 2)), np.zeros(2))
    with pytest.raises(ValueError):
        build_conditions(np.zeros(2), 0.0, S)


def test_single_row_min_norm():
    np.testing.assert_allclose(solve_newton([[1.0, 0.0]], [5.0]), [5, 0])


def test_random_quadratic_newton_step():
    rng = make_rng(17)
    n = 5
    C = random_spd(rng, n)
    b = rng.standard_normal(n)
    x = rng.standard_normal(n)
    f, g = quad(C, b)
    S = _quad_set(C, x, ball_points(rng, x, 0.5, n), b)
    d = solve_newton(*build_conditions(x, f(x), S))
    np.testing.assert_allclose(d, -np.linalg.solve(C, g(x)), rtol=1e-8)


def test_solve_newton_errors():
    with pytest.raises(SingularMatrix):
        solve_newton([[1.0, 2.0], [2.0, 4.0]], [1.0, 2.0])
    with pytest.raises(ValueError):
        solve_newton(np.ones((3, 2)), np.ones(3))


@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
def test_underdetermined_monotone(n, seed):
    rng = make_rng(seed)
    C = random_spd(rng, n)
    b = rng.standard_normal(n)
    x = rng.standard_normal(n)
    f, g = quad(C, b)
    p = int(rng.integers(1, n))
    S = _quad_set(C, x, ball_points(rng, x, 1.0, p), b)
    Z, rhs = build_conditions(x, f(x), S)
    d_prev = rng.standard_normal(n)
    d = solve_newton(Z, rhs, d_prev)
    newton = -np.linalg.solve(C, g(x))
    np.testing.assert_allclose(Z @ d, rhs, rtol=1e-8, atol=1e-8 * np.abs(rhs).max())
    assert np.linalg.norm(d - newton) <= np.linalg.norm(d_prev - newton) * (1 + 1e-10)


def test_correct_z_examples():
    C = C2
    y, x_prev, x = np.array([1.0, 0.0]), np.zeros(2), np.array([0.5, 0.0])
    z = correct_z(C @ (y - x_prev), C @ x_prev, C @ x)
    np.testing.assert_allclose(z, C @ (y - x), atol=1e-15)
    z0 = np.array([1.0, 2.0])
    np.testing.assert_array_equal(correct_z(z0, np.ones(2), np.ones(2)), z0)


@given(st.integers(1, 10), st.integers(0, 2**32 - 1))
def test_correct_z_exact_on_quadratics(n, seed):
    rng = make_rng(seed)
    C = random_spd(rng, n)
    _, g = quad(C, rng.standard_normal(n))
    y, x_prev, x = rng.standard_normal((3, n))
    z = correct_z(C @ (y - x_prev), g(x_prev), g(x))
    assert np.max(np.abs(z - C @ (y - x))) <= 1e-12 * max(1.0, np.abs(C).max() * np.abs(y - x).max())


def _cos(d, g):
    return float(-(g @ d) / (np.linalg.norm(d) * np.linalg.norm(g)))


def test_safeguard_keeps_steep_direction():
    g = np.array([1.0, 2.0])
    np.testing.assert_array_equal(descent_safeguard(-g, g), -g)


def test_safeguard_orthogonal_beta():
    g = np.array([1.0, 0.0])
    d = np.array([0.0, 1.0])
    beta_oracle = brentq(lambda b: b / np.sqrt(1 + b * b) - 0.95, 0.0, 100.0)
    out = descent_safeguard(d, g)
    beta = -(out - d)[0]
    assert beta == pytest.approx(beta_oracle, rel=1e-10)
    assert beta == pytest.approx(3.0424, abs=1e-4)


def test_safeguard_ascent_direction():
    # a generic ascent direction is tilted to cosine exactly eta;
    # an exactly parallel +g has no finite beta (see the parallel test below)
    g = np.array([1.0, 0.5, -0.25])
    d = np.array([2.0, 0.0, 1.0])
    assert g @ d > 0
    out = descent_safeguard(d, g)
    assert _cos(out, g) == pytest.approx(0.95, abs=1e-12)
    beta = -(out - d) @ g / (g @ g)
    root = brentq(lambda b: _cos(d - b * g, g) - 0.95, 0.0, 1e3)
    assert beta == pytest.approx(root, rel=1e-9)


def test_safeguard_parallel_ascent_flips():
    g = np.array([3.0, 4.0])
    out = descent_safeguard(g, g)
    np.testing.assert_allclose(out, -g)


def test_safeguard_modes():
    g = np.array([1.0, 0.0])
    d = np.array([-1.0, 0.2])  # cosine above eta
    assert _cos(descent_safeguard(d, g, mode="always"), g) == pytest.approx(0.95)
    np.testing.assert_array_equal(descent_safeguard(d, g, mode="deficit"), d)
    shallow = np.array([-0.1, 1.0])
    np.testing.assert_array_equal(descent_safeguard(shallow, g, mode="descent"), shallow)
    assert _cos(descent_safeguard(-shallow, g, mode="descent"), g) == pytest.approx(0.95)
    with pytest.raises(ValueError):
        descent_safeguard(d, g, mode="sometimes")


def test_safeguard_zero_gradient():
    with pytest.raises(ZeroGradient):
        descent_safeguard(np.ones(2), np.zeros(2))


@given(st.integers(1, 12), st.integers(0, 2**32 - 1), st.sampled_from(["deficit", "always"]))
def test_safeguard_cosine_bound(n, seed, mode):
    rng = make_rng(seed)
    g = rng.standard_normal(n)
    d = rng.standard_normal(n)
    out = descent_safeguard(d, g, 0.95, mode)
    assert -(g @ out) >= 0.95 * np.linalg.norm(g) * np.linalg.norm(out) - 1e-10


@given(st.integers(1, 12), st.integers(0, 2**32 - 1), st.sampled_from([1e-8, 1e-3, 1e3, 1e8]))
def test_safeguard_cosine_bound_any_scale(n, seed, scale):
    rng = make_rng(seed)
    g = rng.standard_normal(n) / scale
    d = rng.standard_normal(n) * scale
    assert _cos(descent_safeguard(d, g), g) >= 0.95 - 1e-10


def _model(cond, singular=False):
    return NewtonModel(np.zeros(2), np.eye(2), np.zeros(2), cond, singular=singular)


def test_maybe_restart():
    assert maybe_restart(_model(1e9))
    assert not maybe_restart(_model(1e3))
    assert maybe_restart(_model(1e3, singular=True))
    assert maybe_restart(_model(np.inf))


def test_z_condition_scaling():
    Z = np.array([[2.0, 0.0], [0.0, 0.5]])
    np.testing.assert_allclose(scaled_z_matrix(Z), Z / 2.0)
    assert z_condition(Z) == pytest.approx(4.0)
    assert scaled_z_matrix(np.zeros((2, 2))) is None
    assert z_condition(np.zeros((2, 2))) == np.inf


def test_diagnostics():
    x = np.zeros(2)
    S = _quad_set(np.eye(2), x, [[0.1, 0.0], [0.0, 0.3]])
    dg = diagnostics(x, S)
    assert dg.delta_y == pytest.approx(0.3) and dg.delta_z == pytest.approx(0.3)


def test_ry_identity_geometry():
    x = np.zeros(3)
    S = _quad_set(np.eye(3), x, 0.1 * np.eye(3))
    assert ry_diagnostic(x, S, lambda x, v: v) == pytest.approx(1.0)


def test_ry_matches_pseudoinverse_identity():
    rng = make_rng(6)
    n = 4
    C = random_spd(rng, n)
    x = rng.standard_normal(n)
    S = _quad_set(C, x, ball_points(rng, x, 0.2, n))
    ry = ry_diagnostic(x, S, lambda x, v: C @ v)
    Z = S.zvecs
    dz = np.max(np.linalg.norm(Z, axis=1))
    dy = np.max(np.linalg.norm(S.points - x, axis=1))
    pinv_norm = np.linalg.norm(np.linalg.pinv(Z / dz), 2)
    assert pinv_norm == pytest.approx(dz / dy * ry, rel=1e-6)


def test_ry_singular_geometry():
    x = np.zeros(2)
    S = _quad_set(np.eye(2), x, [[0.1, 0.0], [0.2, 0.0]])
    with pytest.raises(SingularMatrix):
        ry_diagnostic(x, S, lambda x, v: v)
