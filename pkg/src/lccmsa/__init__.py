"""Interior-point CMSA evolution strategy for ``min f(x) s.t. Ax = b, x >= 0``."""

from .errors import *  # noqa: F401,F403
from .es import EsState, Individual, OptResult, StrategyParams, optimize
from .numerics import NullSpaceBasis, min_norm_solution, orthonormal_null_space_basis
from .problems import ProblemInstance, eval_objective, klee_minty
from .projection import ReferencePointSet, project_iterative, project_l1
from .standard_form import GeneralLinearProblem, StandardFormProblem, to_standard_form

__version__ = "0.1.0"
