"""Independent reference implementations used by the tests."""

from itertools import combinations

import numpy as np


def l1_distance_by_enumeration(x, A, b, tol=1e-9):
    """
    min ||x' - x||_1 over Ax' = b, x' >= 0 by enumerating vertices of the
    arrangement of the hyperplanes x'_i = 0 and x'_i = x_i intersected with
    Ax' = b.  The objective is linear on every cell and the feasible set is
    pointed, so some such vertex is optimal.
    """
    x = np.asarray(x, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    D = x.shape[0]
    planes = [(i, 0.0) for i in range(D)] + [(i, x[i]) for i in range(D)]
    best = np.inf
    rank = np.linalg.matrix_rank(A)
    for subset in combinations(range(2 * D), D - rank):
        rows = [A] + [np.eye(D)[[planes[j][0]]] for j in subset]
        rhs = [b] + [np.array([planes[j][1]]) for j in subset]
        M = np.vstack(rows)
        if np.linalg.matrix_rank(M) < D:
            continue
        v, *_ = np.linalg.lstsq(M, np.concatenate(rhs), rcond=None)
        if np.max(np.abs(M @ v - np.concatenate(rhs))) > tol or np.any(v < -tol):
            continue
        best = min(best, float(np.abs(v - x).sum()))
    return best


def quadratic_min_by_active_sets(H, g, G, h):
    """
    min 0.5 y^T H y + g^T y s.t. G y <= h for SPD ``H`` by solving the
    equality-constrained problem of every active set and keeping the best
    feasible KKT point with non-negative multipliers.
    """
    D = H.shape[0]
    best_y, best_f = None, np.inf
    for k in range(0, min(D, G.shape[0]) + 1):
        for act in combinations(range(G.shape[0]), k):
            Ga = G[list(act)]
            K = np.block([[H, Ga.T], [Ga, np.zeros((k, k))]])
            if np.linalg.matrix_rank(K) < D + k:
                continue
            sol = np.linalg.solve(K, np.concatenate([-g, h[list(act)]]))
            y, lam = sol[:D], sol[D:]
            if np.any(lam < -1e-10) or np.any(G @ y > h + 1e-10):
                continue
            f = 0.5 * y @ H @ y + g @ y
            if f < best_f:
                best_y, best_f = y, f
    return best_y, best_f
