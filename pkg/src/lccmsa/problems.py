"""
Benchmark problems: the Klee-Minty cube and randomly constrained versions
of eight classic black-box objectives.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionOutOfRange, UnknownKind
from .standard_form import GeneralLinearProblem, StandardFormProblem, problem_to_dict, to_standard_form

OBJECTIVE_KINDS = (
    "sphere",
    "separable_ellipsoid",
    "linear_slope",
    "rotated_ellipsoid",
    "discus",
    "bent_cigar",
    "different_powers",
    "rastrigin",
)
CONVEX_KINDS = tuple(k for k in OBJECTIVE_KINDS if k != "rastrigin")
BOX = 5.0


def _ramp(D: int) -> np.ndarray:
    """``(i - 1) / (D - 1)`` for i = 1..D, zero when D = 1."""
    if D == 1:
        return np.zeros(1)
    return np.arange(D) / (D - 1)


def rotation_matrix(D: int, seed: int) -> np.ndarray:
    """Seeded random orthogonal matrix (QR of a Gaussian matrix, sign-fixed)."""
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(rng.standard_normal((D, D)))
    return q * np.sign(np.diag(r))


def eval_objective(kind: str, x, rotation: np.ndarray | None = None) -> float:
    """Unshifted objective value; ``rotation`` is only used by the rotated ellipsoid."""
    x = np.asarray(x, dtype=float)
    D = x.shape[0]
    if kind == "sphere":
        return float(x @ x)
    if kind == "separable_ellipsoid":
        return float(np.sum(10.0 ** (6.0 * _ramp(D)) * x * x))
    if kind == "linear_slope":
        return float(np.sum(10.0 ** _ramp(D) * x))
    if kind == "rotated_ellipsoid":
        y = x if rotation is None else rotation @ x
        return float(np.sum(10.0 ** (6.0 * _ramp(D)) * y * y))
    if kind == "discus":
        return float(1e6 * x[0] ** 2 + np.sum(x[1:] ** 2))
    if kind == "bent_cigar":
        return float(x[0] ** 2 + 1e6 * np.sum(x[1:] ** 2))
    if kind == "different_powers":
        return float(np.sum(np.abs(x) ** (2.0 + 4.0 * _ramp(D))))
    if kind == "rastrigin":
        return float(10.0 * (D - np.sum(np.cos(2.0 * np.pi * x))) + x @ x)
    raise UnknownKind(f"unknown objective kind {kind!r}")


def objective_gradient(kind: str, x, rotation: np.ndarray | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    D = x.shape[0]
    if kind == "sphere":
        return 2.0 * x
    if kind == "separable_ellipsoid":
        return 2.0 * 10.0 ** (6.0 * _ramp(D)) * x
    if kind == "linear_slope":
        return 10.0 ** _ramp(D)
    if kind == "rotated_ellipsoid":
        R = np.eye(D) if rotation is None else rotation
        return 2.0 * R.T @ (10.0 ** (6.0 * _ramp(D)) * (R @ x))
    if kind == "discus":
        w = np.ones(D)
        w[0] = 1e6
        return 2.0 * w * x
    if kind == "bent_cigar":
        w = np.full(D, 1e6)
        w[0] = 1.0
        return 2.0 * w * x
    if kind == "different_powers":
        p = 2.0 + 4.0 * _ramp(D)
        return p * np.sign(x) * np.abs(x) ** (p - 1.0)
    if kind == "rastrigin":
        return 20.0 * np.pi * np.sin(2.0 * np.pi * x) + 2.0 * x
    raise UnknownKind(f"unknown objective kind {kind!r}")


def objective_hessian(kind: str, x, rotation: np.ndarray | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    D = x.shape[0]
    if kind == "linear_slope":
        return np.zeros((D, D))
    if kind == "different_powers":
        p = 2.0 + 4.0 * _ramp(D)
        return np.diag(p * (p - 1.0) * np.abs(x) ** (p - 2.0))
    if kind == "rastrigin":
        return np.diag(40.0 * np.pi ** 2 * np.cos(2.0 * np.pi * x) + 2.0)
    if kind == "rotated_ellipsoid":
        R = np.eye(D) if rotation is None else rotation
        return 2.0 * R.T @ np.diag(10.0 ** (6.0 * _ramp(D))) @ R
    # Remaining kinds are separable quadratics: the Hessian is twice the weights.
    e = np.eye(D)
    return np.array([objective_gradient(kind, e[i], rotation) for i in range(D)])


class ShiftedObjective:
    """``f(y) = kind(y - shift)``; picklable, unlike a closure."""

    def __init__(self, kind: str, shift, rotation: np.ndarray | None = None):
        if kind not in OBJECTIVE_KINDS:
            raise UnknownKind(f"unknown objective kind {kind!r}")
        self.kind = kind
        self.shift = np.asarray(shift, dtype=float)
        self.rotation = rotation

    def __call__(self, y) -> float:
        return eval_objective(self.kind, np.asarray(y, dtype=float) - self.shift, self.rotation)

    def gradient(self, y) -> np.ndarray:
        return objective_gradient(self.kind, np.asarray(y, dtype=float) - self.shift, self.rotation)

    def hessian(self, y) -> np.ndarray:
        return objective_hessian(self.kind, np.asarray(y, dtype=float) - self.shift, self.rotation)


class KleeMintyObjective:
    """Negated Klee-Minty objective ``-(2^(n-1) y_1 + ... + 2 y_(n-1) + y_n)``."""

    def __init__(self, n: int):
        self.weights = 2.0 ** np.arange(n - 1, -1, -1)

    def __call__(self, y) -> float:
        return -float(self.weights @ np.asarray(y, dtype=float)[:self.weights.shape[0]])


@dataclass
class ProblemInstance:
    name: str
    dim_original: int
    general: GeneralLinearProblem
    f_opt: float
    x_opt: np.ndarray | None = None
    seed: int = 0
    reference_only: bool = False
    interior_point: np.ndarray | None = None
    constraint_function: Callable | None = field(default=None, repr=False)

    def standard_form(self) -> StandardFormProblem:
        """Standard form built directly from the known constraint matrices."""
        return to_standard_form(self.general)

    def to_dict(self) -> dict:
        doc = problem_to_dict(self.general)
        doc["f_opt"] = self.f_opt
        doc["reference_only"] = self.reference_only
        doc["name"] = self.name
        doc["seed"] = self.seed
        if self.x_opt is not None:
            doc["x_opt"] = np.asarray(self.x_opt).tolist()
        return doc


def klee_minty(n: int) -> ProblemInstance:
    """
    n-dimensional Klee-Minty cube, negated for minimisation.

    Row i reads ``2^i y_1 + 2^(i-1) y_2 + ... + 4 y_(i-1) + y_i <= 5^i``.
    """
    if not 1 <= n <= 15:
        raise DimensionOutOfRange(f"Klee-Minty dimension must be in 1..15, got {n}")
    i = np.arange(1, n + 1)[:, None]
    j = np.arange(1, n + 1)[None, :]
    W = np.where(j < i, 2.0 ** (i - j + 1), 0.0) + np.eye(n)
    c = 5.0 ** np.arange(1, n + 1)
    x_opt = np.zeros(n)
    x_opt[-1] = 5.0 ** n
    general = GeneralLinearProblem(
        W_ineq=W, c_ineq=c, W_eq=np.zeros((0, n)), c_eq=np.zeros(0),
        lower=np.zeros(n), upper=np.full(n, np.inf),
        objective=KleeMintyObjective(n), objective_name="klee_minty",
        extra={"klee_minty_n": n},
    )
    return ProblemInstance(name=f"kleeminty", dim_original=n, general=general,
                           f_opt=-(5.0 ** n), x_opt=x_opt)


def resolve_objective(name: str, dim: int, doc: dict | None = None):
    """Builtin objective for the JSON problem format."""
    doc = doc or {}
    if name == "klee_minty":
        return KleeMintyObjective(dim)
    if name not in OBJECTIVE_KINDS:
        raise UnknownKind(f"unknown objective {name!r}")
    shift = doc.get("objective_shift") or np.zeros(dim)
    rotation = None
    if name == "rotated_ellipsoid":
        rotation = rotation_matrix(dim, int(doc.get("rotation_seed", 0)))
    return ShiftedObjective(name, shift, rotation)


# -- randomly constrained instances -------------------------------------------

class LinearConstraints:
    """Black-box ``g(y) = W y - c``; ``g(y) <= 0`` means feasible."""

    def __init__(self, W, c):
        self.W = np.asarray(W, dtype=float)
        self.c = np.asarray(c, dtype=float)

    def __call__(self, y) -> np.ndarray:
        return self.W @ np.asarray(y, dtype=float) - self.c


def _feasible_starts(W, c, y_int, count, rng):
    """``y_int`` plus random box points pulled toward ``y_int`` until feasible."""
    D = y_int.shape[0]
    starts = [y_int.copy()]
    while len(starts) < count:
        y = rng.uniform(-BOX, BOX, size=D)
        # The box and W y <= c are convex and y_int is interior, so some
        # point on the segment from y_int is feasible.
        for theta in 0.5 ** np.arange(40):
            cand = y_int + theta * (y - y_int)
            if np.all(W @ cand <= c):
                starts.append(cand)
                break
    return starts


def _active_rows(W_all, c_all, y, tol=1e-7):
    return np.flatnonzero(W_all @ y - c_all >= -tol * (1.0 + np.abs(c_all)))


def _kkt_polish(fun: ShiftedObjective, W_all, c_all, y, iters: int = 100):
    """Newton iterations on the KKT system of the constraints active at ``y``."""
    act = _active_rows(W_all, c_all, y)
    Wa, ca = W_all[act], c_all[act]
    k = act.shape[0]
    D = y.shape[0]
    y = y.copy()
    lam = np.zeros(k)
    if k:
        lam = np.linalg.lstsq(Wa.T, -fun.gradient(y), rcond=None)[0]
    for _ in range(iters):
        grad = fun.gradient(y)
        F = np.concatenate([grad + Wa.T @ lam, Wa @ y - ca])
        if np.max(np.abs(F), initial=0.0) < 1e-14 * (1.0 + np.max(np.abs(grad))):
            break
        J = np.block([[fun.hessian(y), Wa.T], [Wa, np.zeros((k, k))]])
        step = np.linalg.lstsq(J, -F, rcond=None)[0]
        y = y + step[:D]
        lam = lam + step[D:]
        if np.max(np.abs(step)) < 1e-16 * (1.0 + np.max(np.abs(y))):
            break
    return y, lam


QUADRATIC_KINDS = ("sphere", "separable_ellipsoid", "rotated_ellipsoid", "discus", "bent_cigar")


def _slsqp(fun, jac, y0, G, h):
    """SLSQP on ``min fun`` s.t. ``G y <= h``."""
    from scipy.optimize import minimize

    cons = [{"type": "ineq", "fun": lambda y: h - G @ y, "jac": lambda y: -G}]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = minimize(fun, y0, jac=jac, method="SLSQP", constraints=cons,
                       options={"ftol": 1e-15, "maxiter": 1000})
    return res.x


def _candidates(fun: ShiftedObjective, G, h, starts):
    """Local solutions from each start, in the original coordinates."""
    kind = fun.kind
    if kind == "linear_slope":
        from scipy.optimize import linprog

        res = linprog(fun.gradient(starts[0]), A_ub=G, b_ub=h, bounds=(None, None), method="highs")
        return [res.x] if res.status == 0 else []
    if kind in QUADRATIC_KINDS:
        # Whiten: with R^T R = H / 2 and z = R (y - shift) the objective is ||z||^2.
        R = np.linalg.cholesky(fun.hessian(fun.shift) / 2.0).T
        Rinv = np.linalg.inv(R)
        Gz = G @ Rinv
        hz = h - G @ fun.shift
        norms = np.linalg.norm(Gz, axis=1)
        Gz, hz = Gz / norms[:, None], hz / norms
        out = []
        for y0 in starts:
            z = _slsqp(lambda z: z @ z, lambda z: 2.0 * z, R @ (y0 - fun.shift), Gz, hz)
            out.append(fun.shift + Rinv @ z)
        return out
    return [_slsqp(fun, fun.gradient, y0, G, h) for y0 in starts]


def _pull_inside(G, h, y_int, y):
    """Largest point of the segment from ``y_int`` to ``y`` with ``G y <= h``."""
    d = y - y_int
    gd = G @ d
    slack = h - G @ y_int
    over = gd > slack
    if not np.any(over):
        return y
    theta = float(np.min(slack[over] / gd[over]))
    return y_int + theta * d


def solve_reference(fun: ShiftedObjective, W, c, y_int, starts: int, rng):
    """
    Best feasible point over local solves from ``starts`` feasible start
    points, each refined by a KKT Newton polish on its active constraints
    when that keeps feasibility.
    """
    D = y_int.shape[0]
    G = np.vstack([W, np.eye(D), -np.eye(D)])
    h = np.concatenate([c, np.full(D, BOX), np.full(D, BOX)])
    best_y, best_f = y_int.copy(), fun(y_int)
    for y in _candidates(fun, G, h, _feasible_starts(W, c, y_int, starts, rng)):
        if not np.all(np.isfinite(y)):
            continue
        y_pol, lam = _kkt_polish(fun, G, h, y)
        if np.all(np.isfinite(y_pol)) and np.all(lam >= -1e-9) and fun(y_pol) <= fun(y) + 1e-12 * abs(fun(y)):
            y = y_pol
        y = _pull_inside(G, h, y_int, y)
        if fun(y) < best_f:
            best_y, best_f = y, fun(y)
    return best_y, float(best_f)


def constrained_synthetic(kind: str, dim: int, m: int, seed: int,
                          oracle_starts: int | None = None) -> ProblemInstance:
    """
    ``kind`` objective on ``[-5, 5]^dim`` with ``m`` random linear
    inequalities ``W y <= c``.

    Draw order from ``default_rng(seed)``: W (m x dim), the interior point,
    the optimum shift, the rotation seed, then the oracle's start points.
    The interior point has slack exactly 1 in every constraint.
    """
    if kind not in OBJECTIVE_KINDS:
        raise UnknownKind(f"unknown objective kind {kind!r}")
    if m < 1:
        raise ValueError("need at least one constraint")
    if dim < 1:
        raise DimensionOutOfRange("dimension must be positive")
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((m, dim))
    y_int = np.clip(rng.standard_normal(dim), -BOX + 1.0, BOX - 1.0)
    c = W @ y_int + 1.0
    shift = rng.uniform(-2.0, 2.0, size=dim)
    rotation_seed = int(rng.integers(2**63))
    rotation = rotation_matrix(dim, rotation_seed) if kind == "rotated_ellipsoid" else None
    fun = ShiftedObjective(kind, shift, rotation)
    reference_only = kind == "rastrigin"
    if oracle_starts is None:
        oracle_starts = 1000 if reference_only else 16
    x_opt, f_opt = solve_reference(fun, W, c, y_int, oracle_starts, rng)
    general = GeneralLinearProblem(
        W_ineq=W, c_ineq=c, W_eq=np.zeros((0, dim)), c_eq=np.zeros(0),
        lower=np.full(dim, -BOX), upper=np.full(dim, BOX),
        objective=fun, objective_name=kind,
        extra={"objective_shift": shift.tolist(), "rotation_seed": rotation_seed},
    )
    return ProblemInstance(
        name=f"{kind}/m{m}", dim_original=dim, general=general, f_opt=f_opt,
        x_opt=x_opt, seed=seed, reference_only=reference_only, interior_point=y_int,
        constraint_function=LinearConstraints(W, c),
    )
