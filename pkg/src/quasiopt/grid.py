"""Geometric parameter grid ``alpha_j = alpha0 * q**j``."""

from dataclasses import dataclass
import math

import numpy as np


@dataclass(frozen=True)
class ParameterGrid:
    """Decreasing geometric grid of regularization parameters.

    ``M`` is the largest index with ``alpha0 * q**M >= floor``.

    Parameters
    ----------
    alpha0 : float
        Largest parameter (index 0).
    q : float
        Ratio of consecutive parameters, ``0 < q < 1``.
    floor : float
        Lower bound; the last grid point is the smallest one not below it.
    """

    alpha0: float = 1.0
    q: float = 0.95
    floor: float = 1e-18

    def __post_init__(self):
        if not (0.0 < self.q < 1.0):
            raise ValueError(f"grid ratio q must lie in (0, 1), got {self.q}")
        if not (self.alpha0 > 0.0 and math.isfinite(self.alpha0)):
            raise ValueError(f"alpha0 must be positive and finite, got {self.alpha0}")
        if not (0.0 < self.floor <= self.alpha0):
            raise ValueError(
                f"floor must lie in (0, alpha0], got floor={self.floor}, alpha0={self.alpha0}")

    @property
    def M(self) -> int:
        m = int(math.floor(math.log(self.floor / self.alpha0) / math.log(self.q)))
        # guard against rounding in the logarithm
        while m > 0 and self.alpha0 * self.q ** m < self.floor:
            m -= 1
        while self.alpha0 * self.q ** (m + 1) >= self.floor:
            m += 1
        return m

    @property
    def alphas(self) -> np.ndarray:
        j = np.arange(self.M + 1, dtype=float)
        return self.alpha0 * self.q ** j

    @property
    def alpha_M(self) -> float:
        return float(self.alpha0 * self.q ** self.M)

    def __len__(self):
        return self.M + 1

    def window(self, lo: float, hi: float) -> tuple[int, int]:
        """Index range ``(i_lo, i_hi)`` of grid points inside ``[lo, hi]``.

        ``i_lo`` is the index of the largest admissible alpha (smallest index),
        ``i_hi`` the index of the smallest. Raises ``ValueError`` when the
        interval misses the grid.
        """
        a = self.alphas
        rel = 1e-12
        inside = np.nonzero((a >= lo * (1 - rel)) & (a <= hi * (1 + rel)))[0]
        if inside.size == 0:
            raise ValueError(f"interval [{lo:.3g}, {hi:.3g}] contains no grid point")
        return int(inside[0]), int(inside[-1])

    def nearest_index(self, alpha: float) -> int:
        return int(np.argmin(np.abs(np.log(self.alphas) - math.log(alpha))))
