"""Regularization parameter selection for Tikhonov least squares based on the quasi-optimality sequence."""

from .delta_rules import DELTA_RULES, DeltaChoice, DeltaRuleSpec, choose_delta_parameter, d_value
from .grid import ParameterGrid
from .heuristic import HEURISTIC_RULES, RuleProfile, global_minimizer, profile
from .minimizers import (AposterioriConstants, ExtremumSequence, RestrictedSet, aposteriori_C,
                         aposteriori_C1, extract_extrema, restrict)
from .selection import SelectionResult, select, select_simplified
from .spectral import (GridSweep, Problem, SingularSystem, TikhonovEvaluation, decompose,
                       evaluate, sweep)
from .testproblems import NOISE_LEVELS, PROBLEMS, NoiseModel, TestProblemSpec, generate

__version__ = "0.1.0"
