"""Parameter choice with a known noise level ``delta``.

Each rule has a functional ``d(alpha)`` and picks a grid alpha with
``b1*delta <= d(alpha) <= b2*delta``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .grid import ParameterGrid
from .spectral import GridSweep, SingularSystem, evaluate, sweep

DELTA_RULES = ("DP", "MDP", "ME", "MEe", "R1", "BAL")

_FLOORS = {"DP": 1.0, "MDP": 1.0, "ME": 1.0, "MEe": 1.0, "R1": 0.325,
           "BAL": 3 * math.sqrt(6) / 16}
DEFAULT_B = {"DP": 1.0, "MDP": 1.0, "ME": 1.0, "MEe": 1.0, "R1": 0.5, "BAL": 0.5}
MEE_FACTOR = 0.4


@dataclass(frozen=True)
class DeltaRuleSpec:
    rule_id: str
    delta: float
    b1: float = None
    b2: float = None

    def __post_init__(self):
        if self.rule_id not in DELTA_RULES:
            raise ValueError(f"unknown delta rule {self.rule_id!r}; expected one of {DELTA_RULES}")
        if self.b1 is None:
            object.__setattr__(self, "b1", DEFAULT_B[self.rule_id])
        if self.b2 is None:
            object.__setattr__(self, "b2", self.b1)
        if not self.delta >= 0:
            raise ValueError("delta must be nonnegative")
        floor = _FLOORS[self.rule_id]
        if self.b1 < floor - 1e-15:
            raise ValueError(f"{self.rule_id}: b1={self.b1} is below the admissible floor {floor:.4g}")
        if self.b2 < self.b1:
            raise ValueError(f"b2={self.b2} must be >= b1={self.b1}")


@dataclass(frozen=True)
class DeltaChoice:
    alpha: float
    index: int
    saturated: bool = False


def _balancing(sys: SingularSystem, a: np.ndarray, q: float) -> np.ndarray:
    # u_a - u_{a/q} in closed form, free of cancellation
    s2 = sys.sigma ** 2
    a = a[:, None]
    d = sys.sigma * sys.beta * (a / q - a) / ((a + s2) * (a / q + s2))
    return np.sqrt(a[:, 0] * q) * np.linalg.norm(d, axis=1) / (1 - q)


def d_value(rule_id: str, sys: SingularSystem, alpha: float, q: float = None) -> float:
    """The rule functional ``d(alpha)``; ``q`` is needed only for BAL."""
    if rule_id in ("DP",):
        return evaluate(sys, alpha).residual_norm
    if rule_id == "MDP":
        return evaluate(sys, alpha).b_residual_norm
    if rule_id in ("ME", "MEe"):
        ev = evaluate(sys, alpha)
        return ev.b_residual_norm ** 2 / ev.b2_residual_norm
    if rule_id == "R1":
        return math.sqrt(alpha) * evaluate(sys, alpha).psi_q
    if rule_id == "BAL":
        if q is None or not (0 < q < 1):
            raise ValueError("BAL needs a ratio q in (0, 1)")
        return float(_balancing(sys, np.array([alpha]), q)[0])
    raise ValueError(f"unknown delta rule {rule_id!r}")


def d_profile(rule_id: str, sw: GridSweep) -> np.ndarray:
    """``d(alpha_j)`` over the whole grid of a sweep."""
    a = sw.alphas
    if rule_id == "DP":
        return sw.residual.copy()
    if rule_id == "MDP":
        return sw.b_residual.copy()
    if rule_id in ("ME", "MEe"):
        return sw.b_residual ** 2 / sw.b2_residual
    if rule_id == "R1":
        return np.sqrt(a) * sw.psi_q
    if rule_id == "BAL":
        return _balancing(sw.sys, a, sw.grid.q)
    raise ValueError(f"unknown delta rule {rule_id!r}")


def _choose_from_profile(spec: DeltaRuleSpec, d: np.ndarray, alphas: np.ndarray) -> DeltaChoice:
    lo, hi = spec.b1 * spec.delta, spec.b2 * spec.delta
    M = alphas.size - 1
    if spec.rule_id == "R1":
        # scan upward in alpha; stop once some smaller alpha exceeded b2*delta
        best = None
        for j in range(M, -1, -1):
            if d[j] > hi:
                break
            if d[j] >= lo:
                best = j
        if best is None:
            return DeltaChoice(float(alphas[M]), M, saturated=True)
        return DeltaChoice(float(alphas[best]), best)
    below = np.nonzero(d <= hi)[0]
    if below.size == 0:
        return DeltaChoice(float(alphas[M]), M, saturated=True)
    j = int(below[0])
    return DeltaChoice(float(alphas[j]), j, saturated=bool(j == 0 and d[0] < lo))


def choose_delta_parameter(spec: DeltaRuleSpec, sys_or_sweep, grid: ParameterGrid = None) -> DeltaChoice:
    """Grid search for the rule's parameter.

    DP, MDP, ME and BAL take the largest grid alpha with ``d <= b2*delta``.
    R1 takes the largest alpha with ``d >= b1*delta`` such that all smaller grid
    alphas have ``d <= b2*delta``. MEe is ``0.4 * alpha_ME`` (b1 = b2 = 1),
    clamped to the grid range. When nothing qualifies ``alpha_M`` is returned
    with ``saturated=True``; when ``delta`` exceeds ``d`` everywhere the
    answer is ``alpha0``, also flagged.
    """
    if not spec.delta > 0:
        raise ValueError("delta must be positive")
    sw = sys_or_sweep if isinstance(sys_or_sweep, GridSweep) else sweep(sys_or_sweep, grid)
    alphas = sw.alphas
    if spec.rule_id == "MEe":
        me = _choose_from_profile(DeltaRuleSpec("ME", spec.delta, 1.0, 1.0),
                                  d_profile("ME", sw), alphas)
        alpha = min(max(MEE_FACTOR * me.alpha, float(alphas[-1])), float(alphas[0]))
        return DeltaChoice(alpha, sw.grid.nearest_index(alpha), me.saturated)
    return _choose_from_profile(spec, d_profile(spec.rule_id, sw), alphas)
