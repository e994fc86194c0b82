"""Discretized first-kind integral equations in the style of Regularization Tools.

All generators return ``(A, x)`` for an ``n x n`` discretization and an exact
solution; exact data are always formed as ``f_star = A @ u_star`` so that the
discrete problem is consistent.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.linalg import toeplitz

from .grid import ParameterGrid
from .spectral import Problem, SingularSystem

PROBLEMS = ("baart", "deriv2", "foxgood", "gravity", "heat",
            "ilaplace", "phillips", "shaw", "spikes", "wing")
NOISE_LEVELS = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


def baart(n):
    # Galerkin: exact integration in s, Simpson's rule in t per cell
    hs = math.pi / (2 * n)
    ht = math.pi / n
    c = 1.0 / (3 * math.sqrt(2))
    ihs = np.arange(n + 1) * hs
    lo, hi = ihs[:-1], ihs[1:]

    def cell(co):
        if abs(co) < 1e-14:
            return np.full(n, hs)
        return (np.exp(hi * co) - np.exp(lo * co)) / co

    A = np.empty((n, n))
    f1 = cell(1.0)
    for j in range(1, n + 1):
        f2 = cell(math.cos((j - 0.5) * ht))
        f3 = cell(math.cos(j * ht))
        A[:, j - 1] = c * (f1 + 4 * f2 + f3)
        f1 = f3
    x = np.sin((np.arange(n) + 0.5) * ht) * math.sqrt(ht)
    return A, x


def deriv2(n):
    # Galerkin discretization of the Green's function of -u'' on [0, 1]
    h = 1.0 / n
    A = np.zeros((n, n))
    for i in range(1, n + 1):
        A[i - 1, i - 1] = h * h * ((i * i - i + 0.25) * h - (i - 2.0 / 3.0))
        j = np.arange(1, i)
        A[i - 1, :i - 1] = h * h * (j - 0.5) * ((i - 0.5) * h - 1)
    A = A + np.tril(A, -1).T
    x = h ** 1.5 * (np.arange(1, n + 1) - 0.5)
    return A, x


def foxgood(n):
    h = 1.0 / n
    t = h * (np.arange(1, n + 1) - 0.5)
    A = h * np.sqrt(t[:, None] ** 2 + t[None, :] ** 2)
    return A, t.copy()


def gravity(n, a=0.0, b=1.0, d=0.25):
    dt = 1.0 / n
    ds = (b - a) / n
    t = dt * (np.arange(1, n + 1) - 0.5)
    s = a + ds * (np.arange(1, n + 1) - 0.5)
    A = dt * d / (d * d + (s[:, None] - t[None, :]) ** 2) ** 1.5
    x = np.sin(np.pi * t) + 0.5 * np.sin(2 * np.pi * t)
    return A, x


def heat(n, kappa=1.0):
    if n % 2:
        raise ValueError("heat needs an even n")
    h = 1.0 / n
    t = h / 2 + h * np.arange(n)
    c = h / (2 * kappa * math.sqrt(math.pi))
    d = c * t ** -1.5 * np.exp(-1.0 / (4 * kappa ** 2 * t))
    A = np.tril(toeplitz(d))
    x = np.zeros(n)
    for i in range(1, n // 2 + 1):
        ti = i * 20.0 / n
        if ti < 2:
            x[i - 1] = 0.75 * ti ** 2 / 4
        elif ti < 3:
            x[i - 1] = 0.75 + (ti - 2) * (3 - ti)
        else:
            x[i - 1] = 0.75 * math.exp(-(ti - 3) * 2)
    return A, x


def ilaplace(n):
    # Gauss-Laguerre quadrature in t, collocation at s = 10 i / n
    t, w = np.polynomial.laguerre.laggauss(n)
    s = 10.0 * np.arange(1, n + 1) / n
    A = np.exp(np.log(w)[None, :] + (1 - s[:, None]) * t[None, :])
    x = np.exp(-t / 2)
    return A, x


def phillips(n):
    if n % 4:
        raise ValueError("phillips needs n divisible by 4")
    h = 12.0 / n
    n4 = n // 4
    r1 = np.zeros(n)
    c = np.cos(np.arange(-1, n4 + 2) * 4 * np.pi / n)
    r1[:n4] = h + 9 / (h * np.pi ** 2) * (2 * c[1:n4 + 1] - c[:n4] - c[2:n4 + 2])
    r1[n4] = h / 2 + 9 / (h * np.pi ** 2) * (math.cos(4 * math.pi / n) - 1)
    A = toeplitz(r1)
    cc = np.pi / 3
    x = np.zeros(n)
    grid = np.arange(n4 + 1) * h
    seg = (h + np.diff(np.sin(grid * cc)) / cc) / math.sqrt(h)
    x[2 * n4:3 * n4] = seg
    x[n4:2 * n4] = seg[::-1]
    return A, x


def shaw(n):
    if n % 2:
        raise ValueError("shaw needs an even n")
    h = np.pi / n
    s = -np.pi / 2 + (np.arange(n) + 0.5) * h
    co = np.cos(s)
    ps = np.pi * np.sin(s)
    ss = ps[:, None] + ps[None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        sinc = np.where(np.abs(ss) < 1e-15, 1.0, np.sin(ss) / ss)
    A = h * ((co[:, None] + co[None, :]) * sinc) ** 2
    x = 2 * np.exp(-6 * (s - 0.8) ** 2) + np.exp(-2 * (s + 0.5) ** 2)
    return A, x


def spikes(n, t_max=2.0):
    # Laplace-type kernel exp(-s t) on [0, t_max]^2 acting on a pulse train
    h = t_max / n
    s = h * (np.arange(n) + 0.5)
    A = h * np.exp(-s[:, None] * s[None, :])
    x = np.zeros(n)
    positions = np.arange(n // 20, n, max(n // 10, 1))
    x[positions] = np.sqrt(np.arange(1, positions.size + 1))
    return A, x


def wing(n, t1=1.0 / 3.0, t2=2.0 / 3.0):
    h = 1.0 / n
    sti = (np.arange(1, n + 1) - 0.5) * h
    A = h * sti[None, :] * np.exp(-sti[:, None] * sti[None, :] ** 2)
    x = np.where((t1 < sti) & (sti < t2), math.sqrt(h), 0.0)
    return A, x


_GENERATORS = {name: globals()[name] for name in PROBLEMS}


@dataclass(frozen=True)
class TestProblemSpec:
    __test__ = False  # not a pytest class

    name: str
    n: int = 100
    p: int = 0
    normalize: bool = True

    def __post_init__(self):
        if self.name not in PROBLEMS:
            raise ValueError(f"unknown test problem {self.name!r}; expected one of {PROBLEMS}")
        if self.n < 4:
            raise ValueError("n must be at least 4")
        if self.p < 0:
            raise ValueError("smoothness p must be nonnegative")


def normalize(A, u_star):
    """Scale to ``||A||_2 = 1`` and ``||A u_star|| = 1``; returns ``(A, u_star, f_star)``."""
    A = A / np.linalg.norm(A, 2)
    f = A @ u_star
    scale = 1.0 / np.linalg.norm(f)
    u = u_star * scale
    return A, u, A @ u


def smooth(A, u_star, p):
    """``|A|^p u_star`` with ``|A| = (A^T A)^(1/2)``, via the SVD of ``A``."""
    if p == 0:
        return u_star.copy()
    _, s, Vt = np.linalg.svd(A)
    return Vt.T @ (s ** p * (Vt @ u_star))


def generate(spec: TestProblemSpec) -> Problem:
    """Exact test problem with ``f = f_star``.

    The matrix is normalized first, the solution optionally smoothed to
    ``|A|^p u_star``, and then data and solution are rescaled so that
    ``||f_star|| = 1``.
    """
    A, x = _GENERATORS[spec.name](spec.n)
    if spec.normalize:
        A = A / np.linalg.norm(A, 2)
    x = smooth(A, x, spec.p)
    if spec.normalize:
        A, x, f = normalize(A, x)
    else:
        f = A @ x
    return Problem(A, f.copy(), f, x, name=spec.name)


@dataclass(frozen=True)
class NoiseModel:
    """Fixed set of unit noise directions, reused across problems and levels.

    Realization ``r`` is drawn from ``PCG64(SeedSequence(seed, spawn_key=(r,)))``
    as i.i.d. standard normals and scaled to the target norm exactly.
    """

    target_norms: tuple = NOISE_LEVELS
    seed: int = 0
    realizations: int = 20

    def direction(self, m: int, realization_index: int) -> np.ndarray:
        if not 0 <= realization_index < self.realizations:
            raise IndexError(f"realization index {realization_index} out of range")
        ss = np.random.SeedSequence(self.seed, spawn_key=(realization_index,))
        e = np.random.Generator(np.random.PCG64(ss)).standard_normal(m)
        return e / np.linalg.norm(e)

    def noise(self, m, level_index, realization_index):
        return self.target_norms[level_index] * self.direction(m, realization_index)


def make_noisy(problem: Problem, model: NoiseModel, level_index: int, realization_index: int) -> Problem:
    if problem.f_star is None:
        raise ValueError("problem has no exact data")
    e = model.noise(problem.f_star.size, level_index, realization_index)
    return Problem(problem.A, problem.f_star + e, problem.f_star, problem.u_star, problem.name)


def lambda_stats(sys: SingularSystem, grid: ParameterGrid) -> tuple[float, float]:
    """``(lambda_min, Lambda)``: smallest computed eigenvalue of ``A^T A`` and the
    largest ratio ``lambda_k / lambda_{k+1}`` over ``lambda_k > max(alpha_M, lambda_n)``.
    """
    lam = sys.sigma_all ** 2
    floor = max(grid.alpha_M, lam[-1])
    ratios = [lam[k] / lam[k + 1] for k in range(lam.size - 1)
              if lam[k] > floor and lam[k + 1] > 0]
    return sys.lambda_min, (float(max(ratios)) if ratios else 1.0)
