"""
Dense two-phase simplex for ``min c^T x  s.t.  A x = b, x >= 0``.

Bland's rule (lowest index enters, lowest basic index leaves on ties) is
used throughout so the method cannot cycle.  Any object with a matching
``solve(c, A_eq, b_eq) -> LPResult`` method can replace ``DenseSimplex``
wherever a solver is accepted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np


@dataclass
class LPResult:
    x: np.ndarray | None
    fun: float
    status: str  # "optimal" | "infeasible" | "unbounded" | "iteration_limit"
    iterations: int = 0

    @property
    def success(self) -> bool:
        return self.status == "optimal"


class LPSolver(Protocol):
    def solve(self, c, A_eq, b_eq) -> LPResult: ...


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])


class DenseSimplex:
    """Tableau simplex with Bland's anti-cycling rule."""

    def __init__(self, tol: float = 1e-9, max_iter: int = 100_000):
        self.tol = tol
        self.max_iter = max_iter

    def _run(self, T: np.ndarray, basis: list[int], ncols: int, iters: int) -> tuple[str, int]:
        tol = self.tol
        m = T.shape[0] - 1
        while True:
            if iters >= self.max_iter:
                return "iteration_limit", iters
            reduced = T[-1, :ncols]
            candidates = np.flatnonzero(reduced < -tol)
            if candidates.size == 0:
                return "optimal", iters
            col = int(candidates[0])
            column = T[:m, col]
            pos = np.flatnonzero(column > tol)
            if pos.size == 0:
                return "unbounded", iters
            ratios = T[pos, -1] / column[pos]
            best = ratios.min()
            ties = pos[ratios <= best + tol * max(1.0, abs(best))]
            row = int(min(ties, key=lambda r: basis[r]))
            _pivot(T, row, col)
            basis[row] = col
            iters += 1

    def solve(self, c, A_eq, b_eq) -> LPResult:
        c = np.asarray(c, dtype=float).ravel()
        A = np.array(A_eq, dtype=float, ndmin=2)
        b = np.asarray(b_eq, dtype=float).ravel().copy()
        m, n = A.shape
        if c.shape[0] != n or b.shape[0] != m:
            raise ValueError("inconsistent LP dimensions")

        # Row scaling keeps pivot tolerances meaningful for badly scaled data.
        scale = np.max(np.abs(np.column_stack([A, b])), axis=1)
        scale[scale == 0.0] = 1.0
        A = A / scale[:, None]
        b = b / scale
        neg = b < 0
        A[neg] *= -1.0
        b[neg] *= -1.0

        # Reuse unit columns as the starting basis; artificials fill the gaps.
        basis = [-1] * m
        for j in range(n):
            col = A[:, j]
            nz = np.flatnonzero(col)
            if nz.size == 1 and col[nz[0]] == 1.0 and basis[nz[0]] == -1:
                basis[nz[0]] = j
        missing = [i for i in range(m) if basis[i] == -1]
        n_art = len(missing)
        T = np.zeros((m + 1, n + n_art + 1))
        T[:m, :n] = A
        T[:m, -1] = b
        for k, i in enumerate(missing):
            T[i, n + k] = 1.0
            basis[i] = n + k

        iters = 0
        if n_art:
            T[-1, n:n + n_art] = 1.0
            for i in missing:
                T[-1] -= T[i]
            status, iters = self._run(T, basis, n + n_art, iters)
            if status == "iteration_limit":
                return LPResult(None, np.nan, status, iters)
            if -T[-1, -1] > self.tol * max(1.0, float(np.max(b, initial=0.0))):
                return LPResult(None, np.nan, "infeasible", iters)
            # Drive remaining artificials out; rows where that fails are redundant.
            redundant = []
            for i in range(m):
                if basis[i] >= n:
                    row = T[i, :n]
                    cand = np.flatnonzero(np.abs(row) > self.tol)
                    if cand.size:
                        _pivot(T, i, int(cand[0]))
                        basis[i] = int(cand[0])
                    else:
                        redundant.append(i)
            keep = [i for i in range(m) if i not in redundant]
            T = np.vstack([T[keep][:, list(range(n)) + [T.shape[1] - 1]], T[-1:, list(range(n)) + [T.shape[1] - 1]]])
            basis = [basis[i] for i in keep]
            A = A[keep]
            b = b[keep]
            m = len(keep)

        T[-1, :] = 0.0
        T[-1, :n] = c
        for i, j in enumerate(basis):
            if c[j] != 0.0:
                T[-1] -= c[j] * T[i]
        status, iters = self._run(T, basis, n, iters)
        if status != "optimal":
            return LPResult(None, np.nan, status, iters)

        x = np.zeros(n)
        if m:
            # Re-solve the basic system on the scaled data to shed pivoting round-off.
            try:
                xb = np.linalg.solve(A[:, basis], b)
            except np.linalg.LinAlgError:
                xb = T[:m, -1]
            x[basis] = xb
        x[(x < 0) & (x > -1e-9 * max(1.0, float(np.max(np.abs(x), initial=0.0))))] = 0.0
        return LPResult(x, float(c @ x), "optimal", iters)


class ScipyLinprog:
    """Adapter around scipy's HiGHS backend with the same interface."""

    def solve(self, c, A_eq, b_eq) -> LPResult:
        from scipy.optimize import linprog

        res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=(0, None), method="highs")
        status = {0: "optimal", 1: "iteration_limit", 2: "infeasible", 3: "unbounded"}.get(res.status, "failed")
        if status != "optimal":
            return LPResult(None, np.nan, status, int(getattr(res, "nit", 0)))
        return LPResult(np.asarray(res.x), float(res.fun), status, int(res.nit))
