"""Local minimizers of the quasi-optimality sequence and their restriction.

Grid positions are handled by index: index 0 is ``alpha0`` and larger indices
mean smaller alpha, so "alpha_a > alpha_b" reads "index_a < index_b".
"""

from dataclasses import dataclass, field
import logging
import math

import numpy as np

from .spectral import GridSweep

log = logging.getLogger(__name__)

PLATEAU_RTOL = 1e-12


@dataclass(frozen=True)
class ExtremumSequence:
    """Interleaved minimizers and maximizers of a grid sequence.

    ``min_idx[k-1]`` is the k-th minimizer (k = 1..K, decreasing alpha),
    ``max_idx[k]`` the maximizer between minimizers k and k+1, with
    ``max_idx[0] = 0`` and ``max_idx[K] = M``.
    """

    min_idx: tuple
    max_idx: tuple
    alphas: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    @property
    def K(self) -> int:
        return len(self.min_idx)

    @property
    def minimizers(self) -> np.ndarray:
        return self.alphas[list(self.min_idx)]

    @property
    def maximizers(self) -> np.ndarray:
        return self.alphas[list(self.max_idx)]


@dataclass(frozen=True)
class RestrictedSet:
    L_min: tuple
    L0_min: tuple
    L0_max: tuple
    L_star_min: tuple
    L_star_max: tuple
    alpha_MD: float
    alpha_Q: float
    alpha_MDQ: float
    delta_M: float
    b: float
    c0: float
    guard_fired: bool = False

    @property
    def k_star(self) -> int:
        return len(self.L_star_min)


@dataclass(frozen=True)
class AposterioriConstants:
    C: float
    c_q: float
    cap: float
    skipped: tuple = ()

    @property
    def within_cap(self) -> bool:
        return self.C <= self.cap * (1 + 1e-9)


def c_q(q: float) -> float:
    return (1 / q - 1) / math.log(1 / q)


def _equal(a, b, rtol=PLATEAU_RTOL):
    return abs(a - b) <= rtol * max(abs(a), abs(b))


def _runs(values, rtol):
    """Split the sequence into maximal runs of (nearly) equal values."""
    starts = [0]
    for j in range(1, len(values)):
        if not _equal(values[j], values[j - 1], rtol):
            starts.append(j)
    ends = starts[1:] + [len(values)]
    return [(s, e - 1, values[s]) for s, e in zip(starts, ends)]


def extract_extrema(values, alphas=None, rtol: float = PLATEAU_RTOL) -> ExtremumSequence:
    """Plateau-aware local minimizers and maximizers of a grid sequence.

    A run of equal values is a minimizer when both neighbouring runs are
    larger; at either end of the grid one larger neighbour suffices. Interior
    runs with both neighbours smaller are maximizers. Each run is represented
    by its first index (largest alpha).
    """
    v = np.asarray(values, dtype=float)
    if alphas is None:
        alphas = np.arange(v.size, dtype=float)[::-1] + 1.0
    M = v.size - 1
    runs = _runs(v, rtol)
    if len(runs) == 1:
        return ExtremumSequence((0,), (0, M), np.asarray(alphas), v)
    mins, maxs = [], []
    for i, (s, e, val) in enumerate(runs):
        left = runs[i - 1][2] if i > 0 else None
        right = runs[i + 1][2] if i + 1 < len(runs) else None
        if (left is None or left > val) and (right is None or right > val):
            mins.append(s)
        elif left is not None and right is not None and left < val and right < val:
            maxs.append(s)
    # by construction exactly one maximizer separates consecutive minimizers
    max_idx = [0]
    for k in range(len(mins) - 1):
        between = [m for m in maxs if mins[k] < m < mins[k + 1]]
        max_idx.append(between[0])
    max_idx.append(M)
    return ExtremumSequence(tuple(mins), tuple(max_idx), np.asarray(alphas), v)


def extrema_from_sweep(sw: GridSweep) -> ExtremumSequence:
    return extract_extrema(sw.psi_q, sw.alphas)


def _md_index(sw: GridSweep, b: float) -> int:
    """Largest grid alpha (smallest index) with ``||B_a(Au_a - f)|| <= b * delta_M``."""
    target = b * sw.b_residual[-1]
    ok = np.nonzero(sw.b_residual <= target)[0]
    return int(ok[0])


def restrict_phase1(ext: ExtremumSequence, sw: GridSweep, b: float = 2.0):
    """First restriction: drop minimizers below ``alpha_MDQ``.

    Returns ``(L0_min, L0_max, info)`` as index tuples, where ``L0_max`` has
    one more entry than ``L0_min`` and ``info`` holds ``alpha_MD``,
    ``alpha_Q``, ``alpha_MDQ`` and ``delta_M``.
    """
    if not b > 1:
        raise ValueError("b must exceed 1")
    psi = ext.values
    j_md = _md_index(sw, b)
    j_q = int(np.argmin(psi))
    j_mdq = max(j_md, j_q)  # min over alpha is max over index
    mins, maxs = ext.min_idx, ext.max_idx
    K = len(mins)
    k0 = K
    for k in range(1, K + 1):
        if maxs[k - 1] < j_mdq <= maxs[k]:
            k0 = k
            break
    if j_mdq == 0:
        k0 = 1
    L0_min = tuple(mins[:k0])
    L0_max = list(maxs[:k0 + 1])
    if mins[k0 - 1] <= j_mdq <= maxs[k0]:
        L0_max[k0] = mins[k0 - 1]
    info = dict(alpha_MD=float(sw.alphas[j_md]), alpha_Q=float(sw.alphas[j_q]),
                alpha_MDQ=float(sw.alphas[j_mdq]), delta_M=float(sw.b_residual[-1]))
    return L0_min, tuple(L0_max), info


def restrict_phase2(L0_min, L0_max, psi, c0: float = 2.0):
    """Second restriction: drop shallow minimizers together with their following maximizer.

    Minimizer k is removed when it differs from its following maximizer,
    the following maximum exceeds it by at most ``c0``, and its value is at
    most ``c0`` times the smallest value among minimizers 1..k of ``L0_min``.
    Returns ``(L_star_min, L_star_max, guard_fired)``.
    """
    if not c0 > 1:
        raise ValueError("c0 must exceed 1")
    psi = np.asarray(psi)
    keep_min, keep_max = [], [L0_max[0]]
    running = math.inf
    for k in range(1, len(L0_min) + 1):
        jm, jx = L0_min[k - 1], L0_max[k]
        running = min(running, psi[jm])
        removable = (jm != jx and psi[jx] <= c0 * psi[jm] and psi[jm] <= c0 * running)
        if not removable:
            keep_min.append(jm)
            keep_max.append(jx)
    guard = False
    if not keep_min:
        # keep the best minimizer of L0 with its own basin end
        guard = True
        k = int(np.argmin([psi[j] for j in L0_min]))
        keep_min = [L0_min[k]]
        keep_max = [L0_max[0], L0_max[-1]]
        log.warning("phase 2 removed every minimizer; retaining alpha index %d", L0_min[k])
    return tuple(keep_min), tuple(keep_max), guard


def restrict(ext: ExtremumSequence, sw: GridSweep, b: float = 2.0, c0: float = 2.0) -> RestrictedSet:
    L0_min, L0_max, info = restrict_phase1(ext, sw, b)
    Ls_min, Ls_max, guard = restrict_phase2(L0_min, L0_max, ext.values, c0)
    return RestrictedSet(L_min=ext.min_idx, L0_min=L0_min, L0_max=L0_max,
                         L_star_min=Ls_min, L_star_max=Ls_max, b=b, c0=c0,
                         guard_fired=guard, **info)


def _basin_T(sw: GridSweep, jmin: int, j_hi_alpha: int, j_lo_alpha: int):
    """max of T(alpha_jmin, alpha_j) over grid indices j_hi_alpha..j_lo_alpha."""
    js = np.arange(j_hi_alpha, j_lo_alpha + 1)
    psi = sw.psi_q[js]
    diffs = sw.diff_norm(jmin, js)
    good = psi > 0
    skipped = tuple(int(j) for j in js[~good] if j != jmin)
    T = np.where(good, diffs / np.where(good, psi, 1.0), 0.0)
    return float(T.max()) if T.size else 0.0, skipped


def _constant(sw: GridSweep, mins, maxs):
    best, skipped = 0.0, []
    for k in range(1, len(mins) + 1):
        t, sk = _basin_T(sw, mins[k - 1], maxs[k - 1], maxs[k])
        best = max(best, t)
        skipped.extend(sk)
    return 1.0 + best, tuple(skipped)


def aposteriori_C(ext: ExtremumSequence, sw: GridSweep) -> AposterioriConstants:
    """Constant of the a-posteriori estimate over all local minimizers.

    ``C = 1 + max_k max_{alpha_j in basin k} ||u_{min_k} - u_j|| / psi_Q(alpha_j)``;
    the analytic cap is ``1 + c_q ln(alpha0/alpha_M)``.
    """
    C, skipped = _constant(sw, ext.min_idx, ext.max_idx)
    g = sw.grid
    cq = c_q(g.q)
    return AposterioriConstants(C, cq, 1 + cq * math.log(g.alpha0 / g.alpha_M), skipped)


def aposteriori_C1(rs: RestrictedSet, sw: GridSweep) -> AposterioriConstants:
    """Same constant over the restricted basins; cap ``1 + c0 c_q ln(alpha0/alpha_end)``."""
    C1, skipped = _constant(sw, rs.L_star_min, rs.L_star_max)
    g = sw.grid
    cq = c_q(g.q)
    end = float(sw.alphas[rs.L_star_max[-1]])
    return AposterioriConstants(C1, cq, 1 + rs.c0 * cq * math.log(g.alpha0 / end), skipped)
