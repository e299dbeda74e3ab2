from itertools import combinations

import numpy as np
import pytest

from lccmsa.errors import DimensionOutOfRange, UnknownKind
from lccmsa.numerics import orthonormal_null_space_basis
from lccmsa.problems import (
    BOX,
    CONVEX_KINDS,
    OBJECTIVE_KINDS,
    constrained_synthetic,
    eval_objective,
    klee_minty,
    objective_gradient,
    objective_hessian,
    rotation_matrix,
)

from .oracles import quadratic_min_by_active_sets


def test_klee_minty_examples():
    km = klee_minty(1)
    assert np.array_equal(km.general.W_ineq, [[1.0]]) and np.array_equal(km.general.c_ineq, [5.0])
    assert km.f_opt == -5.0
    km = klee_minty(3)
    assert km.f_opt == -125.0 and np.array_equal(km.x_opt, [0, 0, 125])
    km = klee_minty(2)
    assert np.array_equal(km.general.W_ineq, [[1, 0], [4, 1]]) and np.array_equal(km.general.c_ineq, [5, 25])
    assert km.general.objective(km.x_opt) == -25.0
    assert np.array_equal(klee_minty(3).general.W_ineq, [[1, 0, 0], [4, 1, 0], [8, 4, 1]])
    with pytest.raises(DimensionOutOfRange):
        klee_minty(16)
    with pytest.raises(DimensionOutOfRange):
        klee_minty(0)


@pytest.mark.parametrize("n", range(1, 16))
def test_klee_minty_invariants(n):
    km = klee_minty(n)
    slack = km.general.c_ineq - km.general.W_ineq @ km.x_opt
    assert np.all(slack[:-1] > 0) and slack[-1] == 0
    assert km.general.objective(km.x_opt) == km.f_opt
    sf = km.standard_form()
    assert sf.D == 2 * n and sf.K == n
    assert orthonormal_null_space_basis(sf.A).N == n


def test_objective_examples():
    assert eval_objective("sphere", np.zeros(4)) == 0.0
    assert eval_objective("discus", np.array([1.0, 0.0, 0.0])) == 1e6
    assert eval_objective("rastrigin", np.zeros(5)) == 0.0
    with pytest.raises(UnknownKind):
        eval_objective("nope", np.zeros(2))


def test_objective_definitions():
    x = np.array([0.5, -1.0, 2.0])
    i = np.arange(3)
    assert eval_objective("separable_ellipsoid", x) == pytest.approx(np.sum(10 ** (6 * i / 2) * x**2))
    assert eval_objective("linear_slope", x) == pytest.approx(np.sum(10 ** (i / 2) * x))
    assert eval_objective("bent_cigar", x) == pytest.approx(0.25 + 1e6 * 5)
    assert eval_objective("different_powers", x) == pytest.approx(0.5**2 + 1.0**4 + 2.0**6)
    assert eval_objective("rastrigin", x) == pytest.approx(10 * (3 - np.cos(2 * np.pi * x).sum()) + x @ x)
    R = rotation_matrix(3, 11)
    assert np.allclose(R @ R.T, np.eye(3))
    assert eval_objective("rotated_ellipsoid", x, R) == pytest.approx(eval_objective("separable_ellipsoid", R @ x))
    assert eval_objective("separable_ellipsoid", np.array([2.0])) == 4.0


@pytest.mark.parametrize("kind", OBJECTIVE_KINDS)
def test_gradient_and_hessian_match_finite_differences(kind):
    rng = np.random.default_rng(0)
    x = rng.uniform(-2, 2, 4)
    R = rotation_matrix(4, 3)
    f = lambda v: eval_objective(kind, v, R)
    h = 1e-6
    fd = np.array([(f(x + h * e) - f(x - h * e)) / (2 * h) for e in np.eye(4)])
    g = objective_gradient(kind, x, R)
    assert np.allclose(g, fd, rtol=1e-5, atol=1e-3)
    fdh = np.array([(objective_gradient(kind, x + h * e, R) - objective_gradient(kind, x - h * e, R)) / (2 * h)
                    for e in np.eye(4)])
    assert np.allclose(objective_hessian(kind, x, R), fdh, rtol=1e-5, atol=1e-2)


def _box_rows(inst):
    gp = inst.general
    d = gp.dim
    G = np.vstack([gp.W_ineq, np.eye(d), -np.eye(d)])
    h = np.concatenate([gp.c_ineq, np.full(d, BOX), np.full(d, BOX)])
    return G, h


def test_synthetic_interior_point_and_determinism():
    for kind in OBJECTIVE_KINDS:
        a = constrained_synthetic(kind, 3, 2, 123, oracle_starts=4)
        b = constrained_synthetic(kind, 3, 2, 123, oracle_starts=4)
        assert a.to_dict() == b.to_dict() and a.f_opt == b.f_opt
        gp = a.general
        assert np.all(gp.c_ineq - gp.W_ineq @ a.interior_point >= 1.0 - 1e-12)
        assert np.all(np.abs(a.interior_point) < BOX)
        assert a.name == f"{kind}/m2"
        assert a.reference_only == (kind == "rastrigin")
        assert np.array_equal(a.constraint_function(np.zeros(3)), -gp.c_ineq)
        assert a.to_dict()["f_opt"] == a.f_opt
    assert constrained_synthetic("sphere", 3, 2, 124, oracle_starts=4).f_opt != a.f_opt


def test_synthetic_bad_arguments():
    with pytest.raises(UnknownKind):
        constrained_synthetic("nope", 2, 1, 0)
    with pytest.raises(ValueError):
        constrained_synthetic("sphere", 2, 0, 0)


@pytest.mark.parametrize("kind", ["sphere", "separable_ellipsoid", "rotated_ellipsoid", "discus", "bent_cigar"])
def test_quadratic_f_opt_matches_active_set_oracle(kind):
    for seed in range(8):
        for dim, m in [(2, 1), (2, 2), (3, 2)]:
            inst = constrained_synthetic(kind, dim, m, seed)
            G, h = _box_rows(inst)
            fun = inst.general.objective
            H = objective_hessian(kind, np.zeros(dim), fun.rotation)
            # f(y) = 0.5 y^T H y - (H shift)^T y + const
            const = fun(np.zeros(dim))
            y, f = quadratic_min_by_active_sets(H, -H @ fun.shift, G, h)
            assert inst.f_opt == pytest.approx(f + const, abs=1e-8, rel=1e-8)
            assert np.all(G @ inst.x_opt <= h + 1e-12)
            assert fun(inst.x_opt) == pytest.approx(inst.f_opt, rel=1e-9, abs=1e-12)


def test_sphere_small_instance_against_oracle():
    inst = constrained_synthetic("sphere", 2, 1, 2024)
    G, h = _box_rows(inst)
    s = inst.general.objective.shift
    _, f = quadratic_min_by_active_sets(2 * np.eye(2), -2 * s, G, h)
    assert inst.f_opt == pytest.approx(f + s @ s, abs=1e-8)


def test_linear_slope_f_opt_matches_vertex_enumeration():
    for seed in range(10):
        inst = constrained_synthetic("linear_slope", 3, 2, seed)
        G, h = _box_rows(inst)
        fun = inst.general.objective
        best = np.inf
        for rows in combinations(range(G.shape[0]), 3):
            M = G[list(rows)]
            if abs(np.linalg.det(M)) < 1e-12:
                continue
            v = np.linalg.solve(M, h[list(rows)])
            if np.all(G @ v <= h + 1e-9):
                best = min(best, fun(v))
        assert inst.f_opt == pytest.approx(best, abs=1e-8, rel=1e-9)


@pytest.mark.parametrize("kind", OBJECTIVE_KINDS)
def test_f_opt_below_random_feasible_points(kind):
    for seed in range(3):
        inst = constrained_synthetic(kind, 3, 6, seed)
        G, h = _box_rows(inst)
        fun = inst.general.objective
        pts = []
        rng = np.random.default_rng(seed)
        while len(pts) < 10_000:
            Y = rng.uniform(-BOX, BOX, size=(20_000, 3))
            pts.extend(Y[np.all(Y @ G.T <= h, axis=1)])
        vals = np.array([fun(y) for y in pts[:10_000]])
        assert inst.f_opt <= vals.min() + 1e-12


def test_convex_kinds_exclude_rastrigin():
    assert "rastrigin" not in CONVEX_KINDS and len(OBJECTIVE_KINDS) == 8
