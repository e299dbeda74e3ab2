"""
Repair of points that left the non-negative orthant while staying on Ax = b.

Two methods are provided: the l1-closest feasible point (a linear program)
and the cheap O(D) move toward a random interior reference point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleRegion, PreconditionViolated, StalledDirection
from .numerics import equality_tolerance, orthonormal_null_space_basis
from .simplex import DenseSimplex, LPSolver

_DEFAULT_SOLVER = DenseSimplex()


@dataclass(frozen=True)
class ReferencePointSet:
    """Feasible points (one per row) that the iterative projection moves toward."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float, ndmin=2)
        if pts.shape[0] == 0:
            raise ValueError("reference point set must not be empty")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    def is_feasible(self, A, b) -> bool:
        A = np.asarray(A, dtype=float)
        res = np.abs(self.points @ A.T - np.asarray(b, dtype=float))
        return bool(np.all(res <= equality_tolerance(b)) and np.all(self.points >= -1e-12))


def is_feasible(x, A, b) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.all(x >= -1e-12)
                and np.max(np.abs(np.asarray(A) @ x - b), initial=0.0) <= equality_tolerance(b))


def l1_projection_lp(x, A, b):
    """
    LP data ``(c, A_lp, b_lp)`` for ``min ||x' - x||_1`` over ``Ax' = b, x' >= 0``.

    Variables are ``(x', e_plus, e_minus)`` with ``x' - e_plus + e_minus = x``;
    at the optimum ``e_plus + e_minus = |x' - x|``.
    """
    x = np.asarray(x, dtype=float).ravel()
    A = np.array(A, dtype=float, ndmin=2)
    K, D = A.shape
    I = np.eye(D)
    A_lp = np.block([[A, np.zeros((K, 2 * D))], [I, -I, I]])
    b_lp = np.concatenate([np.asarray(b, dtype=float).ravel(), x])
    c = np.concatenate([np.zeros(D), np.ones(2 * D)])
    return c, A_lp, b_lp


def project_l1(x, A, b, solver: LPSolver | None = None) -> np.ndarray:
    """Feasible point with minimal l1 distance to ``x``."""
    x = np.asarray(x, dtype=float).ravel()
    if is_feasible(x, A, b):
        return x.copy()
    c, A_lp, b_lp = l1_projection_lp(x, A, b)
    res = (solver or _DEFAULT_SOLVER).solve(c, A_lp, b_lp)
    if res.status == "infeasible":
        raise InfeasibleRegion("{x : Ax = b, x >= 0} is empty")
    if not res.success:
        raise InfeasibleRegion(f"l1 projection LP failed with status {res.status!r}")
    xhat = res.x[:x.shape[0]].copy()
    xhat[xhat < 0.0] = 0.0
    return xhat


def init_reference_points(x, count: int, A, b, rng, solver: LPSolver | None = None,
                          null_basis: np.ndarray | None = None) -> ReferencePointSet:
    """
    ``count`` feasible points.  Each starts from a uniform sample ``u`` in
    ``[-||x||, ||x||]^D`` (``[-1, 1]^D`` when ``x`` is zero), is moved onto
    the affine set ``Ax = b`` along the null space (``x + B B^T u``, the
    orthogonal projection when ``x`` is the min-norm solution) and is then
    l1-projected onto the non-negative orthant.

    Without the affine step the l1 projections of raw samples pile up on a
    few degenerate vertices, and repairs toward them stall the search.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    x = np.asarray(x, dtype=float).ravel()
    A = np.array(A, dtype=float, ndmin=2)
    if null_basis is None:
        null_basis = orthonormal_null_space_basis(A).B
    radius = float(np.linalg.norm(x)) or 1.0
    pts = []
    for _ in range(count):
        u = rng.uniform(-radius, radius, size=x.shape[0])
        pts.append(project_l1(x + null_basis @ (null_basis.T @ u), A, b, solver))
    return ReferencePointSet(np.array(pts))


def _move_toward(x: np.ndarray, p: np.ndarray) -> np.ndarray:
    d = p - x
    neg = x < 0.0
    if np.any(neg & (d == 0.0)):
        raise StalledDirection("a negative component has zero movement toward the reference point")
    mask = neg & (np.abs(d) > 0.0)
    if not np.any(mask):
        return x.copy()
    idx = np.flatnonzero(mask)
    ratios = -x[idx] / d[idx]
    alpha = ratios.max()
    if alpha <= 0.5:
        j = idx[np.argmax(ratios)]
        out = x + alpha * d
        scale = np.abs(x) + alpha * np.abs(d)
    else:
        # Same point written as p + (1 - alpha)(x - p) with 1 - alpha_i =
        # p_i / d_i; for far-away x this avoids cancelling two huge terms.
        betas = p[idx] / d[idx]
        k = int(np.argmin(betas))
        j, beta = idx[k], betas[k]
        out = p - beta * d
        scale = np.abs(p) + abs(beta) * np.abs(d)
    out[j] = 0.0
    # Round-off can leave components a few ulps below zero.
    slack = 8.0 * np.finfo(float).eps * scale + 1e-300
    out[(out < 0.0) & (out >= -slack)] = 0.0
    return out


def project_iterative(x, A, b, P: ReferencePointSet, rng, check: bool = True) -> np.ndarray:
    """
    Move ``x`` toward a uniformly chosen ``p`` in ``P`` just far enough that
    its worst negative component reaches zero.  Runs in O(D) when
    ``check`` is off; the check verifies ``Ax = b`` first.
    """
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] == 0:
        raise PreconditionViolated("empty vector")
    if check:
        res = np.max(np.abs(np.asarray(A) @ x - b), initial=0.0)
        if res > equality_tolerance(b):
            raise PreconditionViolated(f"x is not on Ax = b (residual {res:.3e})")
    p = P.points[rng.integers(len(P))]
    return _move_toward(x, p)


def repair(x, A, b, P: ReferencePointSet, rng, method: str = "iterative",
           solver: LPSolver | None = None, check: bool = True) -> np.ndarray:
    """
    Project ``x`` with the chosen method.  A stalled iterative move is
    retried with fresh reference points (up to ``len(P)`` tries) before
    falling back to the l1 projection.
    """
    if method == "l1":
        return project_l1(x, A, b, solver)
    if method != "iterative":
        raise ValueError(f"unknown projection method {method!r}")
    for _ in range(len(P)):
        try:
            return project_iterative(x, A, b, P, rng, check=check)
        except StalledDirection:
            check = False
    return project_l1(x, A, b, solver)
