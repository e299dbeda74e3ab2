from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lccmsa.errors import EmptyNullSpace, InconsistentSystem, NotSymmetric, ShapeMismatch
from lccmsa.numerics import (
    equality_tolerance,
    matrix_rank,
    min_norm_solution,
    orthonormal_null_space_basis,
    pseudoinverse,
    restore_equality,
    symmetric_eigendecomposition,
)


def rank_by_row_reduction(A) -> int:
    """Exact rank of an integer matrix via fraction Gaussian elimination."""
    M = [[Fraction(int(v)) for v in row] for row in A]
    rows, cols = len(M), len(M[0])
    rank = 0
    for col in range(cols):
        pivot = next((r for r in range(rank, rows) if M[r][col] != 0), None)
        if pivot is None:
            continue
        M[rank], M[pivot] = M[pivot], M[rank]
        for r in range(rows):
            if r != rank and M[r][col] != 0:
                factor = M[r][col] / M[rank][col]
                M[r] = [a - factor * p for a, p in zip(M[r], M[rank])]
        rank += 1
    return rank


# -- null space ---------------------------------------------------------------

def test_null_space_single_row():
    nb = orthonormal_null_space_basis(np.array([[1.0, 1.0]]))
    assert nb.N == 1 and nb.rank == 1
    v = nb.B[:, 0]
    assert np.allclose(np.abs(v), 1 / np.sqrt(2), atol=1e-15)
    assert v[0] == pytest.approx(-v[1])


def test_null_space_full_rank_raises():
    with pytest.raises(EmptyNullSpace):
        orthonormal_null_space_basis(np.eye(2))


def test_null_space_rank_matches_exact_oracle():
    rng = np.random.default_rng(1)
    for _ in range(50):
        # Integer matrices with planted dependencies.
        base = rng.integers(-3, 4, size=(2, 7))
        A = np.vstack([base, base[0] + 2 * base[1]])
        exact = rank_by_row_reduction(A)
        nb = orthonormal_null_space_basis(A.astype(float))
        assert nb.rank == exact == matrix_rank(A)
        assert nb.N == 7 - exact
    A = rng.standard_normal((3, 7))
    nb = orthonormal_null_space_basis(A)
    assert nb.N == 4
    assert np.max(np.abs(A @ nb.B)) <= 1e-9


def test_null_space_invariants_500_random_shapes():
    rng = np.random.default_rng(2)
    for _ in range(500):
        D = int(rng.integers(2, 31))
        K = int(rng.integers(1, D))
        A = rng.standard_normal((K, D)) * 10.0 ** rng.uniform(-2, 2)
        nb = orthonormal_null_space_basis(A)
        assert nb.N == D - K
        assert np.max(np.abs(nb.B.T @ nb.B - np.eye(nb.N))) <= 1e-10
        assert np.max(np.abs(A @ nb.B)) <= 1e-9 * (1 + np.max(np.abs(A).sum(axis=1)))


def test_null_space_rejects_bad_input():
    with pytest.raises(ValueError):
        orthonormal_null_space_basis(np.ones((1, 3)), rank_tol=0.0)
    with pytest.raises(ShapeMismatch):
        orthonormal_null_space_basis(np.zeros((0, 3)))


def test_null_space_deterministic():
    A = np.random.default_rng(3).standard_normal((4, 9))
    assert np.array_equal(orthonormal_null_space_basis(A).B, orthonormal_null_space_basis(A).B)


# -- min norm solution ----------------------------------------------------------

def test_min_norm_examples():
    assert np.allclose(min_norm_solution(np.array([[1.0, 1.0]]), np.array([2.0])), [1.0, 1.0])
    assert np.allclose(min_norm_solution(np.eye(2), np.array([3.0, -1.0])), [3.0, -1.0])
    with pytest.raises(InconsistentSystem):
        min_norm_solution(np.array([[1.0, 1.0], [2.0, 2.0]]), np.array([1.0, 3.0]))


def test_min_norm_not_beaten_by_random_feasible_points():
    rng = np.random.default_rng(4)
    for _ in range(20):
        A = rng.standard_normal((3, 8))
        b = rng.standard_normal(3)
        x = min_norm_solution(A, b)
        assert np.max(np.abs(A @ x - b)) <= equality_tolerance(b)
        B = orthonormal_null_space_basis(A).B
        others = x + rng.standard_normal((100, B.shape[1])) @ B.T
        assert np.all(np.linalg.norm(others, axis=1) >= np.linalg.norm(x) - 1e-12)


# -- eigendecomposition ---------------------------------------------------------

def test_eig_examples():
    U, w = symmetric_eigendecomposition(np.eye(3))
    assert np.allclose(w, 1.0)
    U, w = symmetric_eigendecomposition(np.diag([4.0, 1.0]))
    assert np.allclose(w, [1.0, 4.0])
    assert np.allclose(np.abs(U), [[0.0, 1.0], [1.0, 0.0]])


def test_eig_rejects_asymmetric():
    with pytest.raises(NotSymmetric):
        symmetric_eigendecomposition(np.array([[1.0, 2.0], [0.0, 1.0]]))


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 50), seed=st.integers(0, 2**32 - 1), scale=st.floats(-3, 3))
def test_eig_reconstruction(n, seed, scale):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, n))
    C = (G @ G.T + 1e-3 * np.eye(n)) * 10.0 ** scale
    U, w = symmetric_eigendecomposition(C)
    assert np.all(np.diff(w) >= 0)
    assert np.max(np.abs(U.T @ U - np.eye(n))) <= 1e-9
    assert np.max(np.abs(C - (U * w) @ U.T)) <= 1e-8 * (1 + np.max(np.abs(C).sum(axis=1)))


# -- pseudoinverse --------------------------------------------------------------

def test_pinv_examples():
    assert np.allclose(pseudoinverse(np.eye(3)), np.eye(3))
    assert np.allclose(pseudoinverse(np.array([[2.0]])), [[0.5]])
    Y = np.random.default_rng(5).standard_normal((30, 6))
    P = pseudoinverse(Y)
    assert np.max(np.abs(P @ Y - np.eye(6))) <= 1e-8
    # Normal-equations oracle.
    assert np.allclose(P, np.linalg.solve(Y.T @ Y, Y.T), atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(L=st.integers(1, 40), d=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
def test_pinv_moore_penrose_conditions(L, d, seed):
    Y = np.random.default_rng(seed).standard_normal((L, d + 1))
    P = pseudoinverse(Y)
    assert P.shape == (d + 1, L)
    assert np.allclose(Y @ P @ Y, Y, atol=1e-8)
    assert np.allclose(P @ Y @ P, P, atol=1e-8)
    assert np.allclose((Y @ P).T, Y @ P, atol=1e-8)
    assert np.allclose((P @ Y).T, P @ Y, atol=1e-8)


# -- equality restoration -------------------------------------------------------

def test_restore_equality_reduces_residual_and_keeps_zeros():
    rng = np.random.default_rng(6)
    A = rng.standard_normal((2, 6))
    x = np.abs(rng.standard_normal(6))
    x[1] = 0.0
    b = A @ x
    drifted = x + 1e-7 * rng.standard_normal(6) * (x > 0)
    fixed = restore_equality(drifted, A, b)
    assert fixed[1] == 0.0
    assert np.max(np.abs(A @ fixed - b)) < np.max(np.abs(A @ drifted - b))
    assert np.max(np.abs(A @ fixed - b)) <= equality_tolerance(b)
    exact = np.array([1.0, 1.0])
    assert restore_equality(exact, np.array([[1.0, 1.0]]), np.array([2.0])) is exact
