import numpy as np
import pytest
from scipy.optimize import linprog

from lccmsa.simplex import DenseSimplex, ScipyLinprog


def test_small_lp():
    # min -x1 - x2  s.t. x1 + 2 x2 + s1 = 4, 3 x1 + x2 + s2 = 6
    c = np.array([-1.0, -1.0, 0.0, 0.0])
    A = np.array([[1.0, 2.0, 1.0, 0.0], [3.0, 1.0, 0.0, 1.0]])
    b = np.array([4.0, 6.0])
    res = DenseSimplex().solve(c, A, b)
    assert res.success
    assert res.fun == pytest.approx(-2.8)
    assert np.allclose(res.x[:2], [1.6, 1.2])


def test_infeasible_and_unbounded():
    res = DenseSimplex().solve(np.zeros(2), np.array([[1.0, 1.0]]), np.array([-1.0]))
    assert res.status == "infeasible"
    res = DenseSimplex().solve(np.array([-1.0, 0.0]), np.array([[1.0, -1.0]]), np.array([1.0]))
    assert res.status == "unbounded"


def test_redundant_rows():
    A = np.array([[1.0, 1.0, 1.0], [2.0, 2.0, 2.0]])
    b = np.array([1.0, 2.0])
    res = DenseSimplex().solve(np.array([1.0, 2.0, 3.0]), A, b)
    assert res.success and res.fun == pytest.approx(1.0)


def test_matches_highs_on_random_lps():
    rng = np.random.default_rng(7)
    for _ in range(200):
        K, D = int(rng.integers(1, 5)), int(rng.integers(5, 10))
        A = rng.standard_normal((K, D))
        b = A @ np.abs(rng.standard_normal(D))
        c = np.abs(rng.standard_normal(D)) + rng.standard_normal(D) * 0.3
        ref = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
        res = DenseSimplex().solve(c, A, b)
        if ref.status == 0:
            assert res.success
            assert res.fun == pytest.approx(ref.fun, abs=1e-8, rel=1e-8)
            assert np.all(res.x >= -1e-12)
            assert np.max(np.abs(A @ res.x - b)) <= 1e-9 * (1 + np.max(np.abs(b)))
        elif ref.status == 3:
            assert res.status == "unbounded"


def test_scipy_adapter_interface():
    res = ScipyLinprog().solve(np.array([1.0, 1.0]), np.array([[1.0, 1.0]]), np.array([1.0]))
    assert res.success and res.fun == pytest.approx(1.0)
