"""
Seeded experiment runner: one optimisation run per (problem, dimension,
constraint count, instance), dispatched to a process pool and merged back
in configuration order.
"""

from __future__ import annotations

import ast
import json
import math
import os
import operator
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..constraint_approx import preprocess_blackbox_problem
from ..errors import ConfigError
from ..es import StrategyParams, optimize
from ..numerics import equality_tolerance
from ..problems import OBJECTIVE_KINDS, constrained_synthetic, klee_minty

KLEE_MINTY = "kleeminty"
SEED_ENV = "LCCMSA_SEED"


@dataclass
class TargetSpec:
    """Precisions ``10^k`` for ``count`` evenly spaced k in ``[k_min, k_max]``."""

    k_min: float = -8.0
    k_max: float = 2.0
    count: int = 51

    @property
    def exponents(self) -> np.ndarray:
        return np.linspace(self.k_max, self.k_min, self.count)


@dataclass
class RunRecord:
    problem: str
    dim: int
    instance_seed: int
    history: list  # (total evaluations, best-so-far f)
    f_opt: float
    termination: str
    generations: int = 0
    violations: int = 0
    reference_only: bool = False

    @property
    def group(self) -> str:
        return self.problem.split("/", 1)[0]

    @property
    def evals(self) -> int:
        return int(self.history[-1][0]) if self.history else 0

    @property
    def best_f(self) -> float:
        return float(self.history[-1][1]) if self.history else math.inf


@dataclass(frozen=True)
class RunTask:
    kind: str
    dim: int
    m: int
    instance_seed: int
    run_seed: int
    params: dict = field(default_factory=dict)
    budget: float = math.inf


class FeasibilityMonitor:
    """Objective wrapper that counts queries outside ``{Ax = b, x >= 0}``."""

    def __init__(self, objective, A, b):
        self.objective = objective
        self.A = A
        self.b = b
        self.tol = equality_tolerance(b)
        self.violations = 0
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        if np.min(x) < -1e-12 or np.max(np.abs(self.A @ x - self.b)) > self.tol:
            self.violations += 1
        return self.objective(x)


# -- configuration -------------------------------------------------------------

_OPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
        ast.Div: operator.truediv, ast.FloorDiv: operator.floordiv}


def constraint_count(spec, dim: int) -> int:
    """Evaluate a count such as ``6``, ``"6+D/2"`` or ``"6+3*D"`` for dimension ``dim``."""
    if isinstance(spec, bool):
        raise ValueError(f"invalid constraint count {spec!r}")
    if isinstance(spec, int):
        return spec
    text = str(spec).replace(" ", "")
    # Allow the compact "3D" for "3*D".
    text = "".join(ch if not (ch == "D" and i and text[i - 1].isdigit()) else "*D"
                   for i, ch in enumerate(text))

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return node.value
        if isinstance(node, ast.Name) and node.id == "D":
            return dim
        if isinstance(node, ast.BinOp) and type(node.op) in _OPS:
            return _OPS[type(node.op)](ev(node.left), ev(node.right))
        raise ValueError(f"invalid constraint count {spec!r}")

    return int(ev(ast.parse(text, mode="eval")))


def _require(cond: bool, where: str, msg: str):
    if not cond:
        raise ConfigError(f"{where}: {msg}")


def validate_config(config: dict) -> dict:
    """Check field names and types; returns a normalised copy."""
    _require(isinstance(config, dict), "config", "top level must be an object")
    known = {"problems", "budget_multiplier", "params", "targets", "seed"}
    unknown = sorted(set(config) - known)
    _require(not unknown, "config", f"unknown field(s) {unknown}")
    problems = config.get("problems")
    _require(isinstance(problems, list) and problems, "problems", "must be a non-empty list")
    out_problems = []
    for i, entry in enumerate(problems):
        where = f"problems[{i}]"
        _require(isinstance(entry, dict), where, "must be an object")
        extra = sorted(set(entry) - {"name", "dims", "instances", "constraints"})
        _require(not extra, where, f"unknown field(s) {extra}")
        name = entry.get("name")
        _require(name == KLEE_MINTY or name in OBJECTIVE_KINDS, f"{where}.name", f"unknown problem {name!r}")
        dims = entry.get("dims")
        _require(isinstance(dims, list) and dims and all(isinstance(d, int) and not isinstance(d, bool) and d >= 1
                                                          for d in dims),
                 f"{where}.dims", "must be a non-empty list of positive integers")
        if name == KLEE_MINTY:
            _require(all(d <= 15 for d in dims), f"{where}.dims", "Klee-Minty dimensions must be in 1..15")
        instances = entry.get("instances", 1)
        _require(isinstance(instances, int) and not isinstance(instances, bool) and instances >= 1,
                 f"{where}.instances", "must be a positive integer")
        constraints = entry.get("constraints", [] if name == KLEE_MINTY else None)
        if name == KLEE_MINTY:
            _require(not constraints, f"{where}.constraints", "not used for Klee-Minty")
            constraints = []
        else:
            _require(isinstance(constraints, list) and constraints, f"{where}.constraints",
                     "must be a non-empty list of counts")
            for j, c in enumerate(constraints):
                for d in dims:
                    try:
                        val = constraint_count(c, d)
                    except (ValueError, SyntaxError, ZeroDivisionError):
                        raise ConfigError(f"{where}.constraints[{j}]: invalid count {c!r}") from None
                    _require(val >= 1, f"{where}.constraints[{j}]", f"count {c!r} is {val} for D={d}")
        out_problems.append({"name": name, "dims": dims, "instances": instances, "constraints": constraints})
    budget = config.get("budget_multiplier")
    _require(budget is None or (isinstance(budget, (int, float)) and not isinstance(budget, bool) and budget > 0),
             "budget_multiplier", "must be a positive number")
    params = config.get("params") or {}
    _require(isinstance(params, dict), "params", "must be an object")
    try:
        StrategyParams.from_dict(params)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"params: {exc}") from None
    targets = config.get("targets") or {}
    _require(isinstance(targets, dict) and set(targets) <= {"k_min", "k_max", "count"}, "targets",
             "fields are k_min, k_max and count")
    spec = TargetSpec(**targets)
    _require(spec.count >= 1 and spec.k_min <= spec.k_max, "targets", "need count >= 1 and k_min <= k_max")
    seed = config.get("seed", 0)
    _require(isinstance(seed, int) and not isinstance(seed, bool) and 0 <= seed < 2**64, "seed",
             "must be an unsigned 64-bit integer")
    return {"problems": out_problems, "budget_multiplier": budget, "params": params,
            "targets": targets, "seed": seed}


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    try:
        return validate_config(doc)
    except ConfigError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def master_seed(config: dict, override: int | None = None) -> int:
    """``override`` (CLI) wins over ``LCCMSA_SEED``, which wins over the config."""
    if override is not None:
        return int(override)
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV}: not an integer: {env!r}") from None
    return int(config.get("seed", 0))


# -- running ---------------------------------------------------------------------

def build_tasks(config: dict, seed: int) -> list[RunTask]:
    """Tasks in configuration order with seeds derived from the master seed."""
    tasks = []
    mult = config.get("budget_multiplier")
    for j, entry in enumerate(config["problems"]):
        for dim in entry["dims"]:
            for c in entry["constraints"] or [0]:
                m = 0 if entry["name"] == KLEE_MINTY else constraint_count(c, dim)
                for i in range(entry["instances"]):
                    ss = np.random.SeedSequence(seed, spawn_key=(j, dim, m, i))
                    inst_seed, run_seed = (int(v) for v in ss.generate_state(2, np.uint64))
                    tasks.append(RunTask(entry["name"], dim, m, inst_seed, run_seed,
                                         dict(config.get("params") or {}),
                                         math.inf if mult is None else float(mult) * dim))
    return tasks


def execute(task: RunTask) -> RunRecord:
    """Run one task; the objective is wrapped in a FeasibilityMonitor."""
    rng = np.random.default_rng(task.run_seed)
    if task.kind == KLEE_MINTY:
        inst = klee_minty(task.dim)
        problem = inst.standard_form()
    else:
        inst = constrained_synthetic(task.kind, task.dim, task.m, task.instance_seed)
        g = inst.general
        problem = preprocess_blackbox_problem(g.objective, inst.constraint_function, g.lower, g.upper, rng)
    monitor = FeasibilityMonitor(problem.objective, problem.A, problem.b)
    problem.objective = monitor
    params = StrategyParams.from_dict(task.params)
    if math.isfinite(task.budget):
        params.max_total_evals = task.budget
    res = optimize(problem, params, rng)
    return RunRecord(problem=inst.name, dim=task.dim, instance_seed=task.instance_seed,
                     history=[(int(e), float(f)) for e, f in res.history], f_opt=float(inst.f_opt),
                     termination=res.termination, generations=res.generations,
                     violations=monitor.violations, reference_only=inst.reference_only)


def run_tasks(tasks: list[RunTask], jobs: int = 1) -> list[RunRecord]:
    if jobs <= 1 or len(tasks) <= 1:
        return [execute(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(execute, tasks, chunksize=1))


def run_suite(config: dict, seed: int | None = None, jobs: int = 1) -> list[RunRecord]:
    """One RunRecord per (problem, dim, constraint count, instance), in config order."""
    config = validate_config(config)
    return run_tasks(build_tasks(config, master_seed(config, seed)), jobs)
