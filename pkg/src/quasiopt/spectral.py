"""Problem data, singular system and per-alpha Tikhonov quantities.

Everything is evaluated through filter factors on the SVD of ``A``:
with ``beta_i = <u_i, f>``,

* ``u_alpha = sum_i sigma_i beta_i / (alpha + sigma_i**2) v_i``
* ``Au_alpha - f`` has coefficients ``-alpha beta_i / (alpha + sigma_i**2)``
  plus the part of ``f`` orthogonal to the retained range, on which
  ``B_alpha = alpha**0.5 (alpha I + AA*)**-0.5`` acts as the identity.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .grid import ParameterGrid

DEFAULT_RANK_TOL = 1e-14


@dataclass(frozen=True)
class Problem:
    """Linear system ``A u = f`` with optional exact data."""

    A: np.ndarray
    f: np.ndarray
    f_star: Optional[np.ndarray] = None
    u_star: Optional[np.ndarray] = None
    name: str = ""

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        f = np.asarray(self.f, dtype=float).ravel()
        if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
            raise ValueError(f"A must be a nonempty 2-D array, got shape {A.shape}")
        m, n = A.shape
        if f.shape != (m,):
            raise ValueError(f"f must have length {m}, got {f.shape}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "f", f)
        if self.f_star is not None:
            fs = np.asarray(self.f_star, dtype=float).ravel()
            if fs.shape != (m,):
                raise ValueError(f"f_star must have length {m}, got {fs.shape}")
            object.__setattr__(self, "f_star", fs)
        if self.u_star is not None:
            us = np.asarray(self.u_star, dtype=float).ravel()
            if us.shape != (n,):
                raise ValueError(f"u_star must have length {n}, got {us.shape}")
            object.__setattr__(self, "u_star", us)
        for name in ("A", "f", "f_star", "u_star"):
            v = getattr(self, name)
            if v is not None and not np.all(np.isfinite(v)):
                raise ValueError(f"{name} contains non-finite entries")

    @property
    def shape(self):
        return self.A.shape

    @property
    def delta_true(self) -> Optional[float]:
        if self.f_star is None:
            return None
        return float(np.linalg.norm(self.f - self.f_star))

    def with_data(self, f) -> "Problem":
        return Problem(self.A, f, self.f_star, self.u_star, self.name)


@dataclass(frozen=True)
class SingularSystem:
    """Truncated SVD of ``A`` together with the data coefficients of ``f``.

    ``sigma`` holds the retained singular values (descending, all above
    ``rank_tol * sigma_1``); ``sigma_all`` the full computed spectrum, used
    only for eigenvalue-gap statistics.
    """

    sigma: np.ndarray
    U: np.ndarray
    V: np.ndarray
    beta: np.ndarray
    rho_perp: float
    sigma_all: np.ndarray
    f_norm: float

    @property
    def rank(self) -> int:
        return self.sigma.size

    @property
    def lambda_1(self) -> float:
        return float(self.sigma[0] ** 2)

    @property
    def lambda_min(self) -> float:
        """Smallest computed eigenvalue of ``A^T A`` (0 for wide matrices).

        Taken from the full spectrum, including values below the rank cutoff.
        """
        if self.V.shape[0] > self.sigma_all.size:
            return 0.0
        return float(self.sigma_all[-1] ** 2)

    @property
    def lambda_min_retained(self) -> float:
        return float(self.sigma[-1] ** 2)

    def coefficients(self, g) -> tuple[np.ndarray, float]:
        """Project a data vector: ``(U^T g, ||g - U U^T g||)``."""
        g = np.asarray(g, dtype=float)
        c = self.U.T @ g
        return c, float(np.linalg.norm(g - self.U @ c))

    def with_data(self, f) -> "SingularSystem":
        """Same decomposition, new right-hand side (O(mr) work)."""
        f = np.asarray(f, dtype=float).ravel()
        if not np.all(np.isfinite(f)):
            raise ValueError("f contains non-finite entries")
        beta, rho = self.coefficients(f)
        return SingularSystem(self.sigma, self.U, self.V, beta, rho, self.sigma_all,
                              float(np.linalg.norm(f)))

    def solution(self, coef) -> np.ndarray:
        """Map right-singular coefficients back to a length-n vector."""
        return self.V @ coef


@dataclass(frozen=True)
class TikhonovEvaluation:
    alpha: float
    u_alpha: np.ndarray
    norm_u: float
    residual_norm: float
    b_residual_norm: float
    b2_residual_norm: float
    psi_q: float


def decompose(problem: Problem, rank_tolerance: float = DEFAULT_RANK_TOL) -> SingularSystem:
    """Singular system of ``problem.A`` with the coefficients of ``problem.f``.

    Singular values ``<= rank_tolerance * sigma_1`` are treated as zero; the
    corresponding data components go into ``rho_perp``.
    """
    if rank_tolerance < 0:
        raise ValueError("rank_tolerance must be nonnegative")
    A = problem.A
    if not np.all(np.isfinite(A)):
        raise np.linalg.LinAlgError("matrix has non-finite entries")
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        raise np.linalg.LinAlgError("matrix is zero")
    r = int(np.count_nonzero(s > rank_tolerance * s[0]))
    Ur = U[:, :r]
    beta = Ur.T @ problem.f
    rho = float(np.linalg.norm(problem.f - Ur @ beta))
    return SingularSystem(
        sigma=s[:r].copy(), U=Ur, V=Vt[:r].T.copy(), beta=beta, rho_perp=rho,
        sigma_all=s.copy(), f_norm=float(np.linalg.norm(problem.f)))


def _check_alpha(alpha):
    if not alpha > 0:
        raise ValueError(f"regularization parameter must be positive, got {alpha}")


def solution_coefficients(sys: SingularSystem, alpha) -> np.ndarray:
    """Coefficients of ``u_alpha`` in the basis of right singular vectors.

    Vectorized over ``alpha``: an array of shape ``(k,)`` gives ``(k, r)``.
    """
    a = np.asarray(alpha, dtype=float)[..., None]
    s = sys.sigma
    return s * sys.beta / (a + s * s)


def evaluate(sys: SingularSystem, alpha: float) -> TikhonovEvaluation:
    _check_alpha(alpha)
    s2 = sys.sigma ** 2
    beta = sys.beta
    w = alpha / (alpha + s2)
    coef = sys.sigma * beta / (alpha + s2)
    rho2 = sys.rho_perp ** 2
    res = np.sqrt(np.sum((w * beta) ** 2) + rho2)
    bres = np.sqrt(np.sum(w ** 3 * beta ** 2) + rho2)
    b2res = np.sqrt(np.sum((w ** 2 * beta) ** 2) + rho2)
    psi = np.linalg.norm(alpha * sys.sigma * beta / (alpha + s2) ** 2)
    return TikhonovEvaluation(
        alpha=float(alpha), u_alpha=sys.solution(coef), norm_u=float(np.linalg.norm(coef)),
        residual_norm=float(res), b_residual_norm=float(bres),
        b2_residual_norm=float(b2res), psi_q=float(psi))


def iterated2_solution(sys: SingularSystem, alpha: float) -> np.ndarray:
    """Second iterated Tikhonov approximation ``(aI + A*A)^-1 (a u_a + A*f)``."""
    _check_alpha(alpha)
    s2 = sys.sigma ** 2
    coef = sys.sigma * sys.beta * (2 * alpha + s2) / (alpha + s2) ** 2
    return sys.solution(coef)


def exact_error_terms(sys: SingularSystem, u_star, f_star, alpha: float) -> tuple[float, float]:
    """Regularization and propagated-noise error at ``alpha``.

    Returns ``(||u+_alpha - u_star||, ||u_alpha - u+_alpha||)`` where
    ``u+_alpha`` is the Tikhonov solution for the exact data ``f_star``.
    """
    if u_star is None or f_star is None:
        raise ValueError("exact solution and exact data are required")
    _check_alpha(alpha)
    xi, xi_perp = _solution_projection(sys, u_star)
    beta_star, _ = sys.coefficients(f_star)
    s = sys.sigma
    d = alpha + s * s
    reg = np.sqrt(np.sum((s * beta_star / d - xi) ** 2) + xi_perp ** 2)
    noise = np.linalg.norm(s * (sys.beta - beta_star) / d)
    return float(reg), float(noise)


def _solution_projection(sys: SingularSystem, u) -> tuple[np.ndarray, float]:
    u = np.asarray(u, dtype=float)
    xi = sys.V.T @ u
    return xi, float(np.linalg.norm(u - sys.V @ xi))


@dataclass(frozen=True)
class GridSweep:
    """All per-alpha quantities over a grid, as arrays indexed by grid position.

    ``coef[j]`` holds the right-singular coefficients of ``u_{alpha_j}``.
    Exact-data arrays (``err``, ``e_reg``, ``e_noise``) are present only when
    the sweep was built with ``u_star`` and ``f_star``.
    """

    sys: SingularSystem
    grid: ParameterGrid
    alphas: np.ndarray
    coef: np.ndarray
    norm_u: np.ndarray
    residual: np.ndarray
    b_residual: np.ndarray
    b2_residual: np.ndarray
    psi_q: np.ndarray
    err: Optional[np.ndarray] = None
    e_reg: Optional[np.ndarray] = None
    e_noise: Optional[np.ndarray] = None
    xi: Optional[np.ndarray] = field(default=None, repr=False)
    xi_perp: float = 0.0
    beta_star: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def has_exact(self) -> bool:
        return self.err is not None

    @property
    def e1(self) -> np.ndarray:
        return self.e_reg + self.e_noise

    def error_at(self, alpha: float) -> float:
        """``||u_alpha - u_star||`` at an arbitrary (off-grid) alpha."""
        coef = solution_coefficients(self.sys, alpha)
        return float(np.sqrt(np.sum((coef - self.xi) ** 2) + self.xi_perp ** 2))

    def e1_at(self, alpha: float) -> float:
        s = self.sys.sigma
        d = alpha + s * s
        reg = np.sqrt(np.sum((s * self.beta_star / d - self.xi) ** 2) + self.xi_perp ** 2)
        noise = np.linalg.norm(s * (self.sys.beta - self.beta_star) / d)
        return float(reg + noise)

    def diff_norm(self, i: int, j) -> np.ndarray:
        """``||u_{alpha_i} - u_{alpha_j}||`` for a scalar or array of indices ``j``.

        Uses ``sigma beta (a_j - a_i) / ((a_i + sigma^2)(a_j + sigma^2))`` so that
        nearby parameters do not lose accuracy to cancellation.
        """
        j = np.asarray(j)
        ai = self.alphas[i]
        aj = self.alphas[j][..., None]
        s = self.sys.sigma
        s2 = s * s
        d = s * self.sys.beta * (aj - ai) / ((ai + s2) * (aj + s2))
        return np.linalg.norm(d, axis=-1)


def sweep(sys: SingularSystem, grid: ParameterGrid, u_star=None, f_star=None) -> GridSweep:
    a = grid.alphas[:, None]
    s = sys.sigma[None, :]
    s2 = s * s
    beta = sys.beta[None, :]
    d = a + s2
    w = a / d
    coef = s * beta / d
    rho2 = sys.rho_perp ** 2
    kw = {}
    if u_star is not None and f_star is not None:
        xi, xi_perp = _solution_projection(sys, u_star)
        beta_star, _ = sys.coefficients(f_star)
        coef_star = s * beta_star[None, :] / d
        kw = dict(
            err=np.sqrt(np.sum((coef - xi) ** 2, axis=1) + xi_perp ** 2),
            e_reg=np.sqrt(np.sum((coef_star - xi) ** 2, axis=1) + xi_perp ** 2),
            e_noise=np.linalg.norm(coef - coef_star, axis=1),
            xi=xi, xi_perp=xi_perp, beta_star=beta_star)
    return GridSweep(
        sys=sys, grid=grid, alphas=grid.alphas, coef=coef,
        norm_u=np.linalg.norm(coef, axis=1),
        residual=np.sqrt(np.sum((w * beta) ** 2, axis=1) + rho2),
        b_residual=np.sqrt(np.sum(w ** 3 * beta ** 2, axis=1) + rho2),
        b2_residual=np.sqrt(np.sum((w * w * beta) ** 2, axis=1) + rho2),
        psi_q=np.linalg.norm(a * s * beta / (d * d), axis=1),
        **kw)
