import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hvpmodels.core import SingularMatrix, make_rng
from hvpmodels.linalg import cond2, lu_solve, spd_solve


def test_lu_examples():
    np.testing.assert_allclose(lu_solve(np.eye(3), [1, 2, 3]), [1, 2, 3])
    np.testing.assert_allclose(lu_solve([[2, 1], [1, 3]], [3, 4]), [1, 1])
    with pytest.raises(SingularMatrix):
        lu_solve([[1, 1], [1, 1]], [1, 2])


def test_lu_rejects_non_square_and_nonfinite():
    with pytest.raises(ValueError):
        lu_solve(np.ones((2, 3)), [1, 2])
    with pytest.raises(SingularMatrix):
        lu_solve([[np.inf, 0], [0, 1]], [1, 1])


def test_spd_examples():
    np.testing.assert_allclose(spd_solve(4 * np.eye(2), [8, 4]), [2, 1])
    np.testing.assert_allclose(spd_solve([[2, 1], [1, 2]], [3, 3]), [1, 1])
    with pytest.raises(SingularMatrix):
        spd_solve([[1, 1], [1, 1]], [1, 2])


def test_spd_solve_falls_back_on_indefinite():
    A = np.array([[1.0, 2.0], [2.0, 1.0]])
    np.testing.assert_allclose(A @ spd_solve(A, [1.0, 0.0]), [1.0, 0.0], atol=1e-12)


def test_cond2_examples():
    assert cond2(np.eye(3)) == pytest.approx(1.0)
    assert cond2(np.diag([10.0, 1.0])) == pytest.approx(10.0)
    assert cond2(np.diag([1.0, 1e-9])) >= 1e8
    assert cond2(np.zeros((2, 2))) == np.inf
    assert cond2([[np.nan, 0], [0, 1]]) == np.inf


@given(st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_spd_and_lu_agree(n, seed):
    rng = make_rng(seed)
    G = rng.standard_normal((n, n))
    A = G @ G.T + np.eye(n)
    b = rng.standard_normal(n)
    x1, x2 = spd_solve(A, b), lu_solve(A, b)
    assert np.linalg.norm(x1 - x2) <= 1e-8 * np.linalg.norm(x2)


@given(st.integers(2, 12), st.integers(0, 2**32 - 1))
def test_cond2_orthogonal_invariance(n, seed):
    rng = make_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    V, _ = np.linalg.qr(rng.standard_normal((n, n)))
    D = np.diag(np.exp(rng.uniform(0, 5, n)))
    assert cond2(Q @ D @ V.T) == pytest.approx(cond2(D), rel=1e-3)
