"""
Dense linear algebra used by the evolution strategy.

Matrices are 2d numpy arrays and vectors are 1d numpy arrays.  Everything
here is a pure function of its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyNullSpace, InconsistentSystem, NotSymmetric, ShapeMismatch


@dataclass(frozen=True)
class NullSpaceBasis:
    """Orthonormal basis ``B`` (D x N) of null(A)."""

    B: np.ndarray
    rank: int

    @property
    def N(self) -> int:
        return self.B.shape[1]

    @property
    def D(self) -> int:
        return self.B.shape[0]


def _as_matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[np.newaxis, :]
    if A.ndim != 2 or A.size == 0:
        raise ShapeMismatch(f"expected a non-empty 2d matrix, got shape {A.shape}")
    return A


def orthonormal_null_space_basis(A, rank_tol: float = 1e-10) -> NullSpaceBasis:
    """
    Orthonormal basis of the null space of ``A`` via the SVD.

    Singular values below ``rank_tol * sigma_max`` count as zero.  Raises
    EmptyNullSpace when ``A`` has full column rank.
    """
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    A = _as_matrix(A)
    D = A.shape[1]
    _, s, vt = np.linalg.svd(A, full_matrices=True)
    if s.size == 0 or s[0] == 0.0:
        rank = 0
    else:
        rank = int(np.count_nonzero(s > rank_tol * s[0]))
    if rank >= D:
        raise EmptyNullSpace(f"A has full column rank {rank}; null space is empty")
    B = np.ascontiguousarray(vt[rank:].T)
    return NullSpaceBasis(B=B, rank=rank)


def matrix_rank(A, rank_tol: float = 1e-10) -> int:
    A = _as_matrix(A)
    s = np.linalg.svd(A, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rank_tol * s[0]))


def equality_tolerance(b) -> float:
    """Admissible ``max|Ax - b|`` for a point to count as lying on Ax = b."""
    b = np.asarray(b, dtype=float)
    return 1e-9 * (1.0 + (np.max(np.abs(b)) if b.size else 0.0))


def min_norm_solution(A, b) -> np.ndarray:
    """Minimum Euclidean norm solution of the consistent system ``Ax = b``."""
    A = _as_matrix(A)
    b = np.asarray(b, dtype=float).ravel()
    if b.shape[0] != A.shape[0]:
        raise ShapeMismatch(f"A has {A.shape[0]} rows but b has {b.shape[0]} entries")
    x, *_ = np.linalg.lstsq(A, b, rcond=None)
    residual = np.max(np.abs(A @ x - b)) if b.size else 0.0
    if residual > equality_tolerance(b):
        raise InconsistentSystem(f"Ax = b has no solution (least-squares residual {residual:.3e})")
    return x


def symmetric_eigendecomposition(C, sym_tol: float = 1e-9):
    """
    Eigendecomposition ``C = U diag(w) U^T`` with eigenvalues ascending.

    Returns ``(U, w)``.  ``C`` must already be symmetric up to ``sym_tol``
    (relative to ``max(1, ||C||_inf)``).
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {C.shape}")
    scale = max(1.0, float(np.max(np.abs(C)))) if C.size else 1.0
    asym = float(np.max(np.abs(C - C.T))) if C.size else 0.0
    if asym > sym_tol * scale:
        raise NotSymmetric(f"matrix asymmetry {asym:.3e} exceeds tolerance")
    w, U = np.linalg.eigh(C)
    return U, w


def pseudoinverse(Y) -> np.ndarray:
    """Moore-Penrose pseudoinverse."""
    Y = _as_matrix(Y)
    return np.linalg.pinv(Y)


def restore_equality(x, A, b) -> np.ndarray:
    """
    Remove round-off drift from ``Ax = b`` with a minimum-norm correction on
    the strictly positive components of ``x``; zero components stay zero.
    Returns ``x`` unchanged when the correction does not reduce the residual.
    """
    x = np.asarray(x, dtype=float)
    r = A @ x - b
    err = float(np.max(np.abs(r), initial=0.0))
    if err == 0.0:
        return x
    support = x > 0.0
    delta, *_ = np.linalg.lstsq(A[:, support], -r, rcond=None)
    out = x.copy()
    out[support] += delta
    out[out < 0.0] = 0.0
    if float(np.max(np.abs(A @ out - b), initial=0.0)) < err:
        return out
    return x
