"""
The (mu/mu_I, lambda)-CMSA-ES for linearly constrained problems in
standard form ``min f(x) s.t. Ax = b, x >= 0``.

Mutations live in the null space of ``A`` so offspring stay on the affine
set; offspring that leave the non-negative orthant are projected back.
Only feasible points are ever passed to the objective.

Random draws are taken from a ``numpy.random.Generator`` in a fixed order:
reference points, the initial centroid perturbation, then per generation
one block of ``lambda x (N + 1)`` standard normals (per offspring: one for
the step size, N for the null-space direction) followed by the reference
point choices of the repairs, in offspring order.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, fields, replace
from typing import Callable, Sequence, TextIO

import numpy as np

from .errors import DegenerateCovariance
from .numerics import (
    equality_tolerance,
    min_norm_solution,
    orthonormal_null_space_basis,
    restore_equality,
    symmetric_eigendecomposition,
)
from .projection import ReferencePointSet, init_reference_points, repair
from .standard_form import StandardFormProblem

TERMINATION_REASONS = ("max_generations", "sigma_floor", "abs_delta", "rel_delta", "bsf_stall", "budget")


@dataclass
class StrategyParams:
    """
    Strategy and stopping parameters.  ``None`` entries are filled in by
    :meth:`resolve` from the standard-form dimension D and the null-space
    dimension N.
    """

    lam: int | None = None            # 4 D
    mu: int | None = None             # floor(lam / 4)
    sigma_init: float | None = None   # 1 / sqrt(D)
    tau: float | None = None          # 1 / sqrt(2 N)
    tau_c: float | None = None        # 1 + N (N - 1) / (2 mu)
    t: float = 1e12
    G: int = 10
    G_lag: int | None = None          # 50 N
    g_stop: int = 10_000
    sigma_stop: float = 1e-6
    eps_abs: float = 1e-9
    eps_rel: float = 1e-9
    ref_point_count: int | None = None  # 10 N
    max_total_evals: float = math.inf
    sqrt_stride: int = 1
    projection: str = "iterative"

    def resolve(self, D: int, N: int) -> "StrategyParams":
        lam = self.lam if self.lam is not None else 4 * D
        mu = self.mu if self.mu is not None else lam // 4
        out = replace(
            self,
            lam=lam,
            mu=mu,
            sigma_init=self.sigma_init if self.sigma_init is not None else 1.0 / math.sqrt(D),
            tau=self.tau if self.tau is not None else 1.0 / math.sqrt(2 * N),
            tau_c=self.tau_c if self.tau_c is not None else 1.0 + N * (N - 1) / (2.0 * mu),
            G_lag=self.G_lag if self.G_lag is not None else 50 * N,
            ref_point_count=self.ref_point_count if self.ref_point_count is not None else 10 * N,
        )
        out.validate()
        return out

    def validate(self) -> None:
        if not (1 <= self.mu < self.lam):
            raise ValueError(f"need 1 <= mu < lambda, got mu={self.mu}, lambda={self.lam}")
        if self.t <= 1:
            raise ValueError("condition threshold t must exceed 1")
        if self.tau_c < 1:
            raise ValueError("tau_c must be at least 1")
        for name in ("sigma_init", "sigma_stop", "eps_abs", "eps_rel"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.tau < 0 or self.G < 1 or self.G_lag < 1 or self.ref_point_count < 1 or self.sqrt_stride < 1:
            raise ValueError("invalid strategy parameters")
        if self.projection not in ("iterative", "l1"):
            raise ValueError(f"unknown projection {self.projection!r}")

    @classmethod
    def from_dict(cls, overrides: dict | None) -> "StrategyParams":
        overrides = dict(overrides or {})
        if "lambda" in overrides:
            overrides["lam"] = overrides.pop("lambda")
        known = {f.name for f in fields(cls)}
        unknown = set(overrides) - known
        if unknown:
            raise KeyError(f"unknown strategy parameter(s): {', '.join(sorted(unknown))}")
        return cls(**overrides)


@dataclass
class Individual:
    f_value: float
    x: np.ndarray
    z: np.ndarray
    s: np.ndarray
    sigma: float


@dataclass
class EsState:
    centroid: np.ndarray
    sigma: float
    C: np.ndarray
    generation: int
    bsf: Individual
    g_bsf: int
    centroid_history: list = field(default_factory=list)
    eval_counts: dict = field(default_factory=lambda: {"objective": 0, "constraint": 0})

    @property
    def total_evals(self) -> int:
        return self.eval_counts["objective"] + self.eval_counts["constraint"]


@dataclass
class OptResult:
    best: Individual
    termination: str
    generations: int
    eval_counts: dict
    history: list  # (total evaluations, best-so-far f) at every improvement
    final_sigma: float = float("nan")

    @property
    def total_evals(self) -> int:
        return self.eval_counts["objective"] + self.eval_counts["constraint"]


# -- covariance square root ---------------------------------------------------

def regularization_shift(lambda_min: float, lambda_max: float, t: float) -> float:
    """
    Shift ``r`` added to the eigenvalues of sqrt(C) so that the condition
    number of the regularized covariance is (approximately) ``t``.  Zero when
    ``lambda_max / lambda_min <= t``.
    """
    if lambda_max <= t * lambda_min:
        return 0.0
    a = math.sqrt(max(lambda_min, 0.0))
    b = math.sqrt(lambda_max)
    radicand = lambda_max / t**2 + lambda_max / t - 2.0 * a * b / t
    r = b / t - a + math.sqrt(max(radicand, 0.0))
    return max(r, 0.0)


def compute_sqrt_c_normalized(C, t: float) -> np.ndarray:
    """Regularized symmetric square root of ``C`` scaled to unit determinant."""
    C = np.asarray(C, dtype=float)
    C = 0.5 * (C + C.T)
    U, w = symmetric_eigendecomposition(C)
    w = np.maximum(w, 0.0)
    if w[-1] <= 0.0:
        raise DegenerateCovariance("all eigenvalues of C are zero")
    r = regularization_shift(w[0], w[-1], t)
    roots = np.sqrt(w) + r
    scale = math.exp(-np.sum(np.log(roots)) / roots.shape[0])
    return (U * (roots * scale)) @ U.T


def update_covariance(C, mean_ssT, tau_c: float) -> np.ndarray:
    return (1.0 - 1.0 / tau_c) * np.asarray(C) + (1.0 / tau_c) * np.asarray(mean_ssT)


# -- offspring ---------------------------------------------------------------

def _offspring_from_normals(normals: np.ndarray, centroid, sigma, M, B, tau):
    """Vectorised mutation for a block of per-offspring normals ``(n, N + 1)``."""
    sig = sigma * np.exp(tau * normals[:, 0])
    S = normals[:, 1:] @ M.T
    Z = sig[:, None] * (S @ B.T)
    return sig, S, Z, centroid + Z


def sample_offspring(state: EsState, M, B, rng, tau: float) -> Individual:
    """One unevaluated offspring (``f_value`` is NaN)."""
    N = B.shape[1]
    normals = rng.standard_normal((1, N + 1))
    sig, S, Z, X = _offspring_from_normals(normals, state.centroid, state.sigma, M, B, tau)
    return Individual(float("nan"), X[0], Z[0], S[0], float(sig[0]))


def repair_individual(ind: Individual, centroid, B, A, b, P: ReferencePointSet, rng,
                      method: str = "iterative") -> Individual:
    """Project an offspring with negative components and recompute z and s."""
    if not np.any(ind.x < 0.0):
        return ind
    x = repair(ind.x, A, b, P, rng, method=method)
    z = x - centroid
    s = B.T @ z / ind.sigma
    return Individual(ind.f_value, x, z, s, ind.sigma)


# -- selection ---------------------------------------------------------------

def _select(f_values, mu: int) -> np.ndarray:
    return np.argsort(np.asarray(f_values), kind="stable")[:mu]


def rank_and_recombine(offspring: Sequence[Individual], mu: int):
    """
    Means of z, s, sigma and of s s^T over the ``mu`` best offspring.
    Ties keep sampling order.
    """
    idx = _select([o.f_value for o in offspring], mu)
    sel = [offspring[i] for i in idx]
    S = np.array([o.s for o in sel])
    mean_z = np.mean([o.z for o in sel], axis=0)
    mean_s = S.mean(axis=0)
    mean_sigma = float(np.mean([o.sigma for o in sel]))
    mean_ssT = S.T @ S / len(sel)
    return mean_z, mean_s, mean_sigma, mean_ssT


def check_termination(state: EsState, params: StrategyParams) -> str | None:
    """First satisfied stopping reason, in the order of TERMINATION_REASONS."""
    g = state.generation
    if g > params.g_stop:
        return "max_generations"
    if state.sigma < params.sigma_stop:
        return "sigma_floor"
    hist = state.centroid_history
    if g >= params.G and len(hist) > params.G:
        old = hist[-params.G - 1]
        if np.linalg.norm(state.centroid - old) < params.eps_abs:
            return "abs_delta"
        old_norm = np.linalg.norm(old)
        if old_norm > 0 and abs(np.linalg.norm(state.centroid) / old_norm - 1.0) < params.eps_rel:
            return "rel_delta"
    if g - state.g_bsf >= params.G_lag:
        return "bsf_stall"
    if state.total_evals + params.lam + 1 > params.max_total_evals:
        return "budget"
    return None


# -- main loop ---------------------------------------------------------------

TRACE_COLUMNS = ("generation", "sigma", "best_f", "bsf_f", "evals_objective", "evals_constraint")


def optimize(problem: StandardFormProblem, params: StrategyParams | None = None, rng=None,
             trace: TextIO | None = None, callback: Callable[[EsState], None] | None = None) -> OptResult:
    """
    Minimise ``problem.objective`` over ``{x : Ax = b, x >= 0}``.

    ``rng`` is a ``numpy.random.Generator`` or a seed.  When ``trace`` is a
    writable text stream one CSV row is written per generation.
    """
    rng = np.random.default_rng(rng)
    A, b = problem.A, problem.b
    basis = orthonormal_null_space_basis(A)
    B = basis.B
    D, N = B.shape
    params = (params or StrategyParams()).resolve(D, N)
    f = problem.objective
    counts = {"objective": 0, "constraint": int(problem.constraint_evals)}
    history: list[tuple[int, float]] = []

    def evaluate(x) -> float:
        counts["objective"] += 1
        return float(f(x))

    x0 = min_norm_solution(A, b)
    P = init_reference_points(x0, params.ref_point_count, A, b, rng, null_basis=B)
    scale = float(np.linalg.norm(x0)) or 1.0
    x0 = x0 + scale * (B @ rng.standard_normal(N))
    tol = equality_tolerance(b)

    def repair_point(x):
        # Far-out points carry round-off proportional to their size; the move
        # toward a reference point shrinks it, so the entry check is skipped.
        x = repair(x, A, b, P, rng, method=params.projection, check=False)
        if np.max(np.abs(A @ x - b), initial=0.0) > tol:
            x = restore_equality(x, A, b)
        return x

    if np.any(x0 < 0.0):
        x0 = repair_point(x0)

    f0 = evaluate(x0)
    bsf = Individual(f0, x0, np.zeros(D), np.zeros(N), params.sigma_init)
    history.append((counts["objective"] + counts["constraint"], f0))
    state = EsState(centroid=x0, sigma=params.sigma_init, C=np.eye(N), generation=0,
                    bsf=bsf, g_bsf=0, centroid_history=[x0], eval_counts=counts)

    writer = None
    if trace is not None:
        writer = csv.writer(trace, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)

    lam, mu = params.lam, params.mu
    M = None
    termination = check_termination(state, params)
    while termination is None:
        g = state.generation
        if M is None or g % params.sqrt_stride == 0:
            try:
                M = compute_sqrt_c_normalized(state.C, params.t)
            except DegenerateCovariance:
                # Every selected step was zero (offspring repaired onto the
                # centroid); keep the previous shape.
                if M is None:
                    M = np.eye(N)
        normals = rng.standard_normal((lam, N + 1))
        sig, S, Z, X = _offspring_from_normals(normals, state.centroid, state.sigma, M, B, params.tau)
        for l in range(lam):
            raw = X[l]
            x = repair_point(raw) if np.any(raw < 0.0) else raw
            # Directions along which neither Ax nor f changes would otherwise
            # drift without bound; use the bounded equivalent point.
            x = problem.canonical(x)
            if x is not raw:
                X[l] = x
                Z[l] = x - state.centroid
                S[l] = B.T @ Z[l] / sig[l]
        fvals = np.empty(lam)
        for l in range(lam):
            fvals[l] = evaluate(X[l])
            if fvals[l] < state.bsf.f_value:
                state.bsf = Individual(fvals[l], X[l].copy(), Z[l].copy(), S[l].copy(), float(sig[l]))
                state.g_bsf = g + 1
                history.append((state.total_evals, fvals[l]))

        idx = _select(fvals, mu)
        # Mean of the selected points equals centroid + <z> and stays >= 0 in
        # floating point; averaging round-off on Ax = b is removed before reuse.
        new_centroid = restore_equality(X[idx].mean(axis=0), A, b)
        mean_z = new_centroid - state.centroid
        S_sel = S[idx]
        mean_s = S_sel.mean(axis=0)
        mean_sigma = float(sig[idx].mean())
        fc = evaluate(new_centroid)
        if fc < state.bsf.f_value:
            state.bsf = Individual(fc, new_centroid.copy(), mean_z, mean_s, mean_sigma)
            state.g_bsf = g + 1
            history.append((state.total_evals, fc))

        state.centroid = new_centroid
        state.sigma = mean_sigma
        state.C = update_covariance(state.C, S_sel.T @ S_sel / mu, params.tau_c)
        state.generation = g + 1
        state.centroid_history.append(new_centroid)
        if len(state.centroid_history) > params.G + 1:
            del state.centroid_history[0]

        if writer is not None:
            writer.writerow((state.generation, repr(state.sigma), repr(float(fvals.min())),
                             repr(state.bsf.f_value), counts["objective"], counts["constraint"]))
        if callback is not None:
            callback(state)
        termination = check_termination(state, params)

    total = state.total_evals
    if history[-1][0] < total:
        history.append((total, state.bsf.f_value))
    return OptResult(best=state.bsf, termination=termination, generations=state.generation,
                     eval_counts=dict(counts), history=history, final_sigma=state.sigma)
