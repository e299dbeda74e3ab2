"""
Recovery of linear constraint coefficients from black-box evaluations, and
the pre-processing step that turns a box-bounded black-box problem into
standard form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonLinearConstraintDetected, RankDeficientSamples
from .numerics import matrix_rank, pseudoinverse
from .standard_form import BackTransformedObjective, StandardFormProblem, transform_inequalities

HOLDOUT_TOL = 1e-6


@dataclass
class RecoveredConstraints:
    """``A_ineq y <= b_ineq`` and ``A_eq y = b_eq`` recovered from samples."""

    A_ineq: np.ndarray
    b_ineq: np.ndarray
    A_eq: np.ndarray
    b_eq: np.ndarray


class CountingConstraints:
    """Wraps a constraint function; one call returns every constraint value."""

    def __init__(self, fn: Callable):
        self.fn = fn
        self.calls = 0

    def __call__(self, y) -> np.ndarray:
        self.calls += 1
        return np.atleast_1d(np.asarray(self.fn(np.asarray(y, dtype=float)), dtype=float))


def _evaluate(fn, Y) -> np.ndarray:
    if fn is None:
        return np.zeros((Y.shape[0], 0))
    return np.array([np.atleast_1d(np.asarray(fn(y), dtype=float)) for y in Y]).reshape(Y.shape[0], -1)


def _fit(Y1_pinv, values):
    """Coefficients and right-hand side of ``values ~ Y w + w0``."""
    W = Y1_pinv @ values  # (D' + 1) x K
    return W[:-1].T.copy(), -W[-1].copy()


def approximate_linear_constraints(g, h, center, spread: float, L: int, rng,
                                   holdout: int = 20) -> RecoveredConstraints:
    """
    Fit ``g(y) = A_ineq y - b_ineq`` and ``h(y) = A_eq y - b_eq`` by least
    squares on ``L`` Gaussian samples around ``center``.

    ``holdout`` extra samples (0 disables them) check the fit; a residual
    above 1e-6 on them or on the fitting samples raises
    NonLinearConstraintDetected.
    """
    center = np.asarray(center, dtype=float).ravel()
    dprime = center.shape[0]
    if spread <= 0:
        raise ValueError("spread must be positive")
    if L < dprime + 1:
        raise RankDeficientSamples(f"need at least {dprime + 1} samples, got {L}")
    Y = center + spread * rng.standard_normal((L, dprime))
    Y1 = np.hstack([Y, np.ones((L, 1))])
    if matrix_rank(Y1) < dprime + 1:
        raise RankDeficientSamples("sample matrix has deficient column rank")
    Gv = _evaluate(g, Y)
    Hv = _evaluate(h, Y)
    Y1_pinv = pseudoinverse(Y1)
    A_ineq, b_ineq = _fit(Y1_pinv, Gv)
    A_eq, b_eq = _fit(Y1_pinv, Hv)

    checks = [(Y, Gv, Hv)]
    if holdout:
        Yh = center + spread * rng.standard_normal((holdout, dprime))
        checks.append((Yh, _evaluate(g, Yh), _evaluate(h, Yh)))
    for Ys, Gs, Hs in checks:
        for A, bb, vals in ((A_ineq, b_ineq, Gs), (A_eq, b_eq, Hs)):
            if vals.size == 0:
                continue
            res = np.abs(Ys @ A.T - bb - vals) / (1.0 + np.abs(vals))
            if res.max() > HOLDOUT_TOL:
                raise NonLinearConstraintDetected(
                    f"linear fit residual {res.max():.3e} exceeds {HOLDOUT_TOL:g}")
    return RecoveredConstraints(A_ineq, b_ineq, A_eq, b_eq)


def preprocess_blackbox_problem(objective: Callable, g: Callable, lower, upper, rng,
                                L: int | None = None, spread: float = 1.0) -> StandardFormProblem:
    """
    Standard form of ``min objective(y)`` s.t. ``g(y) <= 0`` and box bounds,
    with ``g`` known only as a black box.  The ``L`` sampling calls
    (default ``10 (D' + 1)``) are recorded in ``constraint_evals``.
    """
    lower = np.asarray(lower, dtype=float).ravel()
    upper = np.asarray(upper, dtype=float).ravel()
    dprime = lower.shape[0]
    L = 10 * (dprime + 1) if L is None else int(L)
    counter = CountingConstraints(g)
    rec = approximate_linear_constraints(counter, None, np.zeros(dprime), spread, L, rng, holdout=0)
    A, b = transform_inequalities(rec.A_ineq, rec.b_ineq, lower, upper)
    k = rec.A_ineq.shape[0]
    return StandardFormProblem(A, b, BackTransformedObjective(objective, dprime, k, "general"),
                               dprime, k, "general", constraint_evals=counter.calls)
