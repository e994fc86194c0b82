"""Final parameter choice from the restricted set of quasi-optimality minimizers."""

from dataclasses import dataclass, field

import numpy as np

from .heuristic import admissible_interval, functional_values
from .minimizers import ExtremumSequence, RestrictedSet
from .spectral import GridSweep

ALGORITHMS = ("a", "b", "c")


@dataclass(frozen=True)
class SelectionResult:
    chosen_alpha: float
    chosen_index: int
    method: str
    reliability: str
    diagnostics: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ReferenceParameters:
    """Global minimizers of the Q, HR and RE functionals used to anchor the choice."""

    j_Q: int
    j_HR: int
    j_RE: int
    j_Q1: int
    j_Q2: int
    alphas: np.ndarray = field(repr=False)

    def alpha(self, name):
        return float(self.alphas[getattr(self, "j_" + name)])


def _argmin(values, i_lo, i_hi):
    return i_lo + int(np.argmin(values[i_lo:i_hi + 1]))


def reference_parameters(sw: GridSweep, widen: bool = False, tau: float = 1.0) -> ReferenceParameters:
    lo, hi = admissible_interval(sw.sys, sw.grid, widen)
    i_lo, i_hi = sw.grid.window(lo, hi)
    psi = sw.psi_q
    j_q = _argmin(psi, i_lo, i_hi)
    j_hr = _argmin(functional_values("HR", sw), i_lo, i_hi)
    j_re = _argmin(functional_values("RE", sw, tau), i_lo, i_hi)
    # psi_Q on [alpha_RE, alpha0], i.e. indices 0..j_re
    j_q2 = _argmin(psi, 0, j_re)
    return ReferenceParameters(j_q, j_hr, j_re, min(j_q, j_hr), j_q2, sw.alphas)


def _largest_not_above(candidates, j_threshold):
    """Largest alpha (smallest index) with alpha <= threshold; else the smallest alpha."""
    ok = [j for j in candidates if j >= j_threshold]
    return min(ok) if ok else max(candidates)


def _algorithm_c(candidates, sw: GridSweep, C_star: float) -> int:
    R = {j: sw.b_residual[j] / np.sqrt(sw.alphas[j]) / sw.norm_u[j] for j in candidates}
    ordered = sorted(candidates)  # decreasing alpha
    best_above = np.inf
    admissible = []
    for j in ordered:
        if R[j] <= C_star * best_above:
            admissible.append(j)
        best_above = min(best_above, R[j])
    return max(admissible)


def select(rs: RestrictedSet, sw: GridSweep, C_star: float = 5.0, algorithm: str = "c",
           widen: bool = False, refs: ReferenceParameters = None) -> SelectionResult:
    """Choose alpha from the restricted minimizer set.

    A single element is taken as is (``certified``). Two elements one of which
    is ``alpha_M`` give the other one (``conditional``). Otherwise ``alpha_M``
    is dropped and algorithm a, b or c decides (``heuristic``).
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown selection algorithm {algorithm!r}")
    Ls = list(rs.L_star_min)
    if not Ls:
        raise ValueError("restricted set is empty")
    M = sw.alphas.size - 1
    refs = refs or reference_parameters(sw, widen)
    diag = {
        "alpha_Q": refs.alpha("Q"), "alpha_HR": refs.alpha("HR"), "alpha_RE": refs.alpha("RE"),
        "alpha_Q1": refs.alpha("Q1"), "alpha_Q2": refs.alpha("Q2"),
        "R_values": [float(sw.b_residual[j] / np.sqrt(sw.alphas[j]) / sw.norm_u[j]) for j in Ls],
    }

    def result(j, method, reliability):
        return SelectionResult(float(sw.alphas[j]), int(j), method, reliability, diag)

    if len(Ls) == 1:
        return result(Ls[0], "singleton", "certified")
    candidates = [j for j in Ls if j != M]
    if len(candidates) == 1:
        return result(candidates[0], "drop_alphaM", "conditional")
    if algorithm == "a":
        j = _largest_not_above(candidates, refs.j_Q1)
    elif algorithm == "b":
        j = _largest_not_above(candidates, refs.j_Q2)
    else:
        j = _algorithm_c(candidates, sw, C_star)
    return result(j, "alg_" + algorithm, "heuristic")


def select_simplified(variant: int, ext: ExtremumSequence, sw: GridSweep, c0: float = 2.0,
                      widen: bool = False, refs: ReferenceParameters = None) -> SelectionResult:
    """Walk down the raw minimizers from the one at or below alpha_Q1 (variant 1)
    or alpha_Q2 (variant 2) while barriers stay shallow and minima stay low.
    """
    if variant not in (1, 2):
        raise ValueError("variant must be 1 or 2")
    refs = refs or reference_parameters(sw, widen)
    j_anchor = refs.j_Q1 if variant == 1 else refs.j_Q2
    psi = ext.values
    mins, maxs = ext.min_idx, ext.max_idx
    K = len(mins)
    k0 = next((k for k in range(1, K + 1) if mins[k - 1] >= j_anchor), K)
    running = [min(psi[j] for j in mins[:k]) for k in range(1, K + 1)]

    def c1(k):
        return psi[maxs[k]] <= c0 * psi[mins[k - 1]]

    def c2(k):
        return psi[mins[k - 1]] <= c0 * running[k - 1]

    k_star = k0
    if c2(k0):
        while k_star < K and c1(k_star) and c2(k_star + 1):
            k_star += 1
    j = mins[k_star - 1]
    diag = {"alpha_Q1": refs.alpha("Q1"), "alpha_Q2": refs.alpha("Q2"), "k0": k0, "k_star": k_star}
    return SelectionResult(float(sw.alphas[j]), int(j), f"simplified_{variant}", "heuristic", diag)
