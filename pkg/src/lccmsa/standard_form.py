"""
Conversion of linearly constrained problems to the standard form

    min f(x)  s.t.  A x = b,  x >= 0.

The general transform works on ``W y <= c`` (optionally ``W_eq y = c_eq``)
plus finite box bounds and uses the variable layout

    x = (x', x'', u, v, w),   y = x' - x'',

with slack ``u`` for the inequalities and ``v``/``w`` for the lower/upper
bounds.  Problems that already have ``y >= 0`` and no upper bound can use
the slack-only layout ``x = (y, u)`` instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import InfeasibleSeed, NonFiniteBound, ShapeMismatch
from .numerics import equality_tolerance

TRANSFORM_KINDS = ("general", "equality", "slack_only")


@dataclass
class GeneralLinearProblem:
    """``min f'(y)`` s.t. ``W_ineq y <= c_ineq``, ``W_eq y = c_eq``, ``lower <= y <= upper``."""

    W_ineq: np.ndarray
    c_ineq: np.ndarray
    W_eq: np.ndarray
    c_eq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    objective: Callable[[np.ndarray], float]
    objective_name: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float).ravel()
        self.upper = np.asarray(self.upper, dtype=float).ravel()
        d = self.lower.shape[0]
        self.W_ineq = np.asarray(self.W_ineq, dtype=float).reshape(-1, d)
        self.c_ineq = np.asarray(self.c_ineq, dtype=float).ravel()
        self.W_eq = np.asarray(self.W_eq, dtype=float).reshape(-1, d)
        self.c_eq = np.asarray(self.c_eq, dtype=float).ravel()
        if self.upper.shape[0] != d:
            raise ShapeMismatch("lower and upper differ in length")
        if self.W_ineq.shape[0] != self.c_ineq.shape[0] or self.W_eq.shape[0] != self.c_eq.shape[0]:
            raise ShapeMismatch("constraint matrices and right-hand sides differ in row count")
        both = np.isfinite(self.lower) & np.isfinite(self.upper)
        if np.any(self.lower[both] > self.upper[both]):
            raise ValueError("lower bound exceeds upper bound")

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def is_feasible(self, y, tol: float = 1e-9) -> bool:
        y = np.asarray(y, dtype=float)
        ok = np.all(self.W_ineq @ y <= self.c_ineq + tol)
        ok &= np.all(np.abs(self.W_eq @ y - self.c_eq) <= tol)
        ok &= np.all(y >= self.lower - tol) and np.all(y <= self.upper + tol)
        return bool(ok)


@dataclass
class StandardFormProblem:
    """Standard-form triple (A, b, f) plus what is needed to map back."""

    A: np.ndarray
    b: np.ndarray
    objective: Callable[[np.ndarray], float]
    orig_dim: int
    orig_ineq_count: int
    transform_kind: str = "general"
    constraint_evals: int = 0

    def __post_init__(self):
        self.A = np.array(self.A, dtype=float, ndmin=2)
        self.b = np.asarray(self.b, dtype=float).ravel()
        if self.A.shape[0] != self.b.shape[0]:
            raise ShapeMismatch("A and b differ in row count")
        if self.transform_kind not in TRANSFORM_KINDS:
            raise ValueError(f"unknown transform kind {self.transform_kind!r}")

    @property
    def D(self) -> int:
        return self.A.shape[1]

    @property
    def K(self) -> int:
        return self.A.shape[0]

    def back_transform(self, x) -> np.ndarray:
        return back_transform(x, self.orig_dim, self.orig_ineq_count, self.transform_kind)

    def is_feasible(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= -1e-12) and np.max(np.abs(self.A @ x - self.b), initial=0.0) <= equality_tolerance(self.b))

    def canonical(self, x) -> np.ndarray:
        """
        Equivalent point with bounded split pairs.

        In the general transform ``y = y_plus - y_minus``, so adding the same
        amount to both parts changes neither ``Ax`` nor the objective.  Pairs
        whose smaller part exceeds ``1 + ||b||_inf`` are shifted down to that
        level; every other point (and every other transform) is returned as is.
        """
        x = np.asarray(x, dtype=float)
        if self.transform_kind != "general":
            return x
        n = self.orig_dim
        cap = 1.0 + float(np.max(np.abs(self.b), initial=0.0))
        excess = np.minimum(x[:n], x[n:2 * n]) - cap
        if not np.any(excess > 0.0):
            return x
        excess = np.maximum(excess, 0.0)
        out = x.copy()
        out[:n] -= excess
        out[n:2 * n] -= excess
        return out


def _check_bounds(lower, upper):
    lower = np.asarray(lower, dtype=float).ravel()
    upper = np.asarray(upper, dtype=float).ravel()
    if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
        raise NonFiniteBound("the general transform requires finite bounds on every variable")
    if lower.shape != upper.shape:
        raise ShapeMismatch("lower and upper differ in length")
    return lower, upper


def _block_rows(first: np.ndarray, k_slack: int, dprime: int) -> np.ndarray:
    I = np.eye(dprime)
    Z = np.zeros
    rows = first.shape[0]
    return np.block([
        [first, -first, Z((rows, k_slack)), Z((rows, dprime)), Z((rows, dprime))],
        [I, -I, Z((dprime, k_slack)), -I, Z((dprime, dprime))],
        [I, -I, Z((dprime, k_slack)), Z((dprime, dprime)), I],
    ])


def transform_inequalities(W, c, lower, upper):
    """Standard form of ``W y <= c, lower <= y <= upper``; returns ``(A, b)``."""
    lower, upper = _check_bounds(lower, upper)
    dprime = lower.shape[0]
    W = np.asarray(W, dtype=float).reshape(-1, dprime)
    c = np.asarray(c, dtype=float).ravel()
    if W.shape[0] != c.shape[0]:
        raise ShapeMismatch("W and c differ in row count")
    k = W.shape[0]
    A = _block_rows(W, k, dprime)
    A[:k, 2 * dprime:2 * dprime + k] = np.eye(k)
    b = np.concatenate([c, lower, upper])
    return A, b


def transform_equalities(W, c, lower, upper, k_ineq: int):
    """
    Standard form of ``W y = c`` with bounds.  The slack block is kept (all
    zero, width ``k_ineq``) so rows line up with ``transform_inequalities``.
    """
    lower, upper = _check_bounds(lower, upper)
    dprime = lower.shape[0]
    W = np.asarray(W, dtype=float).reshape(-1, dprime)
    c = np.asarray(c, dtype=float).ravel()
    if W.shape[0] != c.shape[0]:
        raise ShapeMismatch("W and c differ in row count")
    A = _block_rows(W, int(k_ineq), dprime)
    b = np.concatenate([c, lower, upper])
    return A, b


def transform_nonneg_inequalities(W, c):
    """Slack-only form ``[W | I] (y, u) = c`` for problems with native ``y >= 0``."""
    W = np.array(W, dtype=float, ndmin=2)
    c = np.asarray(c, dtype=float).ravel()
    if W.shape[0] != c.shape[0]:
        raise ShapeMismatch("W and c differ in row count")
    A = np.hstack([W, np.eye(W.shape[0])])
    return A, c.copy()


def back_transform(x, dprime: int, k_ineq: int, kind: str = "general") -> np.ndarray:
    """Map a standard-form vector back to the original variables."""
    x = np.asarray(x, dtype=float).ravel()
    if kind == "slack_only":
        if x.shape[0] != dprime + k_ineq:
            raise ShapeMismatch(f"expected length {dprime + k_ineq}, got {x.shape[0]}")
        return x[:dprime].copy()
    if x.shape[0] != 4 * dprime + k_ineq:
        raise ShapeMismatch(f"expected length {4 * dprime + k_ineq}, got {x.shape[0]}")
    return x[:dprime] - x[dprime:2 * dprime]


def lift_feasible_point(y, W, c, lower, upper, alpha: float = 1.0) -> np.ndarray:
    """
    Standard-form point ``(x', x'', u, v, w)`` for a feasible original ``y``.

    ``x'_k = max(alpha, y_k)`` keeps the split variables off the zero
    boundary when ``alpha > 0``.
    """
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    lower, upper = _check_bounds(lower, upper)
    y = np.asarray(y, dtype=float).ravel()
    W = np.asarray(W, dtype=float).reshape(-1, y.shape[0])
    c = np.asarray(c, dtype=float).ravel()
    u = c - W @ y
    v = y - lower
    w = upper - y
    tol = 1e-9
    if np.any(u < -tol) or np.any(v < -tol) or np.any(w < -tol):
        raise InfeasibleSeed("y violates W y <= c or its bounds")
    xp = np.maximum(alpha, y)
    xpp = xp - y
    # Clamp the sub-tolerance violations accepted above.
    return np.concatenate([xp, xpp, np.maximum(u, 0.0), np.maximum(v, 0.0), np.maximum(w, 0.0)])


def lift_nonneg_point(y, W, c) -> np.ndarray:
    y = np.asarray(y, dtype=float).ravel()
    W = np.array(W, dtype=float, ndmin=2)
    u = np.asarray(c, dtype=float).ravel() - W @ y
    if np.any(y < -1e-9) or np.any(u < -1e-9):
        raise InfeasibleSeed("y violates W y <= c or y >= 0")
    return np.concatenate([np.maximum(y, 0.0), np.maximum(u, 0.0)])


class BackTransformedObjective:
    """``f(x) = f'(back_transform(x))``; a class so it pickles for worker pools."""

    def __init__(self, objective, dprime: int, k_ineq: int, kind: str):
        self.objective = objective
        self.dprime = dprime
        self.k_ineq = k_ineq
        self.kind = kind

    def __call__(self, x) -> float:
        return self.objective(back_transform(x, self.dprime, self.k_ineq, self.kind))


def to_standard_form(problem: GeneralLinearProblem) -> StandardFormProblem:
    """
    Choose a transform for ``problem`` and wrap its objective.

    Natively non-negative problems without upper bounds or equalities use the
    slack-only layout; everything else needs finite bounds.
    """
    dprime = problem.dim
    k = problem.W_ineq.shape[0]
    if (np.all(problem.lower == 0.0) and np.all(np.isinf(problem.upper))
            and problem.W_eq.shape[0] == 0 and k > 0):
        A, b = transform_nonneg_inequalities(problem.W_ineq, problem.c_ineq)
        kind = "slack_only"
    else:
        A, b = transform_inequalities(problem.W_ineq, problem.c_ineq, problem.lower, problem.upper)
        kind = "general"
        if problem.W_eq.shape[0]:
            A_eq, b_eq = transform_equalities(problem.W_eq, problem.c_eq, problem.lower, problem.upper, k)
            m = problem.W_eq.shape[0]
            # Only the equality rows are new; the bound rows would duplicate.
            A = np.vstack([A_eq[:m], A])
            b = np.concatenate([b_eq[:m], b])
            kind = "equality" if k == 0 else "general"
    return StandardFormProblem(A, b, BackTransformedObjective(problem.objective, dprime, k, kind), dprime, k, kind)


# -- JSON problem documents -------------------------------------------------

def _bound_array(values, dim, default):
    if values is None:
        return np.full(dim, default)
    return np.array([default if v is None else float(v) for v in values], dtype=float)


def _bound_list(values):
    return [None if not np.isfinite(v) else float(v) for v in values]


def problem_from_dict(doc: dict, objective_resolver=None) -> GeneralLinearProblem:
    """
    Build a problem from the JSON layout with fields ``W_ineq``, ``c_ineq``,
    ``W_eq``, ``c_eq``, ``lower``, ``upper`` and ``objective``.  ``null``
    bounds mean unbounded.  ``objective`` names a builtin resolved by
    ``objective_resolver(name, dim, doc)``.
    """
    if objective_resolver is None:
        from .problems import resolve_objective as objective_resolver
    W_ineq = doc.get("W_ineq") or []
    W_eq = doc.get("W_eq") or []
    if "lower" in doc and doc["lower"] is not None:
        dim = len(doc["lower"])
    elif W_ineq:
        dim = len(W_ineq[0])
    elif W_eq:
        dim = len(W_eq[0])
    else:
        raise ShapeMismatch("cannot infer the problem dimension")
    name = doc.get("objective")
    if not isinstance(name, str):
        raise ValueError("field 'objective' must name a builtin objective")
    return GeneralLinearProblem(
        W_ineq=np.array(W_ineq, dtype=float).reshape(-1, dim),
        c_ineq=np.array(doc.get("c_ineq") or [], dtype=float),
        W_eq=np.array(W_eq, dtype=float).reshape(-1, dim),
        c_eq=np.array(doc.get("c_eq") or [], dtype=float),
        lower=_bound_array(doc.get("lower"), dim, -np.inf),
        upper=_bound_array(doc.get("upper"), dim, np.inf),
        objective=objective_resolver(name, dim, doc),
        objective_name=name,
        extra={k: v for k, v in doc.items() if k not in
               ("W_ineq", "c_ineq", "W_eq", "c_eq", "lower", "upper", "objective")},
    )


def problem_to_dict(problem: GeneralLinearProblem) -> dict:
    doc = {
        "W_ineq": problem.W_ineq.tolist(),
        "c_ineq": problem.c_ineq.tolist(),
        "W_eq": problem.W_eq.tolist(),
        "c_eq": problem.c_eq.tolist(),
        "lower": _bound_list(problem.lower),
        "upper": _bound_list(problem.upper),
        "objective": problem.objective_name,
    }
    doc.update(problem.extra)
    return doc


def load_problem(path) -> GeneralLinearProblem:
    with open(Path(path)) as fh:
        return problem_from_dict(json.load(fh))
