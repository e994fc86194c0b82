"""Heuristic (noise-level-free) rule functionals over the parameter grid."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .grid import ParameterGrid
from .spectral import GridSweep, SingularSystem, sweep

HEURISTIC_RULES = ("Q", "Q_TILDE", "QD", "HR", "HME", "RE")


@dataclass(frozen=True)
class RuleProfile:
    """Values of one functional over the grid plus its admissible window.

    ``values[j]`` belongs to ``alpha_j``. The QD profile is one entry shorter
    than the grid: its last value pairs ``alpha_{M-1}`` with ``alpha_M``.
    """

    rule_id: str
    values: np.ndarray
    alphas: np.ndarray
    lo_index: int
    hi_index: int
    global_min_index: int

    @property
    def global_min_alpha(self) -> float:
        return float(self.alphas[self.global_min_index])


def functional_values(rule_id: str, sw: GridSweep, tau: float = 1.0) -> np.ndarray:
    a = sw.alphas
    if rule_id == "Q":
        return sw.psi_q.copy()
    if rule_id == "Q_TILDE":
        return (1 + a / sw.sys.lambda_1) * sw.psi_q
    if rule_id == "QD":
        q = sw.grid.q
        s2 = sw.sys.sigma ** 2
        lo, hi = a[1:, None], a[:-1, None]
        d = sw.sys.sigma * sw.sys.beta * (hi - lo) / ((lo + s2) * (hi + s2))
        return np.linalg.norm(d, axis=1) / (1 - q)
    if rule_id == "HR":
        return sw.b_residual / np.sqrt(a)
    if rule_id == "HME":
        return sw.b_residual ** 2 / (sw.b2_residual * np.sqrt(a))
    if rule_id == "RE":
        if tau < 1:
            raise ValueError("Reginska exponent tau must be >= 1")
        return sw.residual * sw.norm_u ** tau
    raise ValueError(f"unknown heuristic rule {rule_id!r}; expected one of {HEURISTIC_RULES}")


def admissible_interval(sys: SingularSystem, grid: ParameterGrid, widen: bool = False) -> tuple[float, float]:
    """Search interval ``[max(alpha_M, lambda_min), alpha0]``.

    With ``widen`` the whole grid is used. A ``lambda_min`` above ``alpha0``
    collapses the interval to ``alpha0``.
    """
    lo = grid.alpha_M if widen else max(grid.alpha_M, sys.lambda_min)
    return min(lo, grid.alpha0), grid.alpha0


def _argmin_window(values, i_lo, i_hi) -> int:
    seg = values[i_lo:i_hi + 1]
    # np.argmin returns the first (largest-alpha) index on ties
    return i_lo + int(np.argmin(seg))


def profile(rule_id: str, sys_or_sweep, grid: ParameterGrid = None, tau: float = 1.0,
            widen: bool = False) -> RuleProfile:
    sw = sys_or_sweep if isinstance(sys_or_sweep, GridSweep) else sweep(sys_or_sweep, grid)
    grid = sw.grid
    values = functional_values(rule_id, sw, tau)
    lo, hi = admissible_interval(sw.sys, grid, widen)
    i_lo, i_hi = grid.window(lo, hi)
    i_hi = min(i_hi, values.size - 1)
    gmin = _argmin_window(values, i_lo, i_hi)
    return RuleProfile(rule_id, values, sw.alphas[:values.size], i_lo, i_hi, gmin)


def global_minimizer(prof: RuleProfile, lo: float, hi: float) -> float:
    """Grid alpha minimizing the profile on ``[lo, hi]``; ties go to the larger alpha."""
    a = prof.alphas
    rel = 1e-12
    inside = np.nonzero((a >= lo * (1 - rel)) & (a <= hi * (1 + rel)))[0]
    if inside.size == 0:
        raise ValueError(f"interval [{lo:.3g}, {hi:.3g}] contains no grid point")
    j = _argmin_window(prof.values, int(inside[0]), int(inside[-1]))
    return float(a[j])


def global_minimizer_index(prof: RuleProfile, lo: float, hi: float) -> int:
    return int(np.argmin(np.abs(np.log(prof.alphas) - np.log(global_minimizer(prof, lo, hi)))))


def needs_regularization_check(sys_or_sweep, grid: ParameterGrid = None, exact: Optional[tuple] = None,
                               rtol: float = 1e-12) -> str:
    """Classify whether the discretized problem needs regularization.

    ``exact`` is ``(u_star, f_star)``; without it (and without exact data in a
    given sweep) the verdict is ``"unknown"``. Returns ``"not_needed"`` when
    ``e1(lambda_min)`` is minimal among ``e1`` over grid alphas ``>= lambda_min``.
    """
    if isinstance(sys_or_sweep, GridSweep):
        sw = sys_or_sweep
        if exact is not None and not sw.has_exact:
            sw = sweep(sw.sys, sw.grid, *exact)
    else:
        if exact is None:
            return "unknown"
        sw = sweep(sys_or_sweep, grid, *exact)
    if not sw.has_exact:
        return "unknown"
    lam = sw.sys.lambda_min
    mask = sw.alphas >= lam
    if not mask.any():
        return "not_needed"
    e_lam = sw.e1_at(lam)
    best = float(np.min(sw.e1[mask]))
    return "not_needed" if e_lam <= best * (1 + rtol) else "needs"
