from types import SimpleNamespace

import numpy as np
import pytest

from quasiopt.grid import ParameterGrid
from quasiopt.spectral import decompose
from quasiopt.testproblems import (NOISE_LEVELS, PROBLEMS, NoiseModel, TestProblemSpec, deriv2,
                                   generate, heat, lambda_stats, make_noisy, normalize)

GRID = ParameterGrid()


def test_deriv2_symmetric_and_midpoint_off_diagonal():
    n = 50
    A, _ = deriv2(n)
    np.testing.assert_allclose(A, A.T, rtol=0, atol=0)
    h = 1.0 / n
    m = h * (np.arange(1, n + 1) - 0.5)
    s, t = np.meshgrid(m, m, indexing="ij")
    K = np.where(s > t, t * (s - 1), s * (t - 1))
    off = ~np.eye(n, dtype=bool)
    np.testing.assert_allclose(A[off], h * K[off], rtol=1e-13)


@pytest.mark.parametrize("name", PROBLEMS)
@pytest.mark.parametrize("p", [0, 2])
def test_normalization(name, p):
    prob = generate(TestProblemSpec(name, 100, p))
    assert np.linalg.norm(prob.A, 2) == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.norm(prob.f_star) == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(prob.A @ prob.u_star, prob.f_star, rtol=0, atol=1e-14)
    np.testing.assert_array_equal(prob.f, prob.f_star)


def test_smooth_solution_is_in_the_range():
    raw = generate(TestProblemSpec("shaw", 100, 0))
    sm = generate(TestProblemSpec("shaw", 100, 2))
    # |A|^2 u = A^T A u, so the smoothed solution is a multiple of A^T f_star(p=0)
    v = raw.A.T @ raw.f_star
    cos = abs(v @ sm.u_star) / (np.linalg.norm(v) * np.linalg.norm(sm.u_star))
    assert cos == pytest.approx(1.0, abs=1e-10)


def test_normalize_is_idempotent():
    p = generate(TestProblemSpec("gravity"))
    A, u, f = normalize(p.A, p.u_star)
    np.testing.assert_allclose(A, p.A, rtol=1e-14)
    np.testing.assert_allclose(u, p.u_star, rtol=1e-12)
    np.testing.assert_allclose(f, p.f_star, rtol=1e-12, atol=1e-15)


def test_generation_is_bit_reproducible():
    for name in PROBLEMS:
        a = generate(TestProblemSpec(name))
        b = generate(TestProblemSpec(name))
        assert a.A.tobytes() == b.A.tobytes() and a.u_star.tobytes() == b.u_star.tobytes()


def test_eigenvalue_gap_statistics():
    stats = {name: lambda_stats(decompose(generate(TestProblemSpec(name))), GRID)[1]
             for name in PROBLEMS}
    assert stats["heat"] > 1e6 * max(v for k, v in stats.items() if k != "heat")
    assert stats["baart"] == pytest.approx(1665.7460703316492, rel=1e-6)
    assert all(v >= 1 for v in stats.values())


def _fake_system(sigma):
    s = np.asarray(sigma, float)
    return SimpleNamespace(sigma_all=s, lambda_min=float(s[-1] ** 2))


def test_lambda_stats_small_cases():
    lam_min, gap = lambda_stats(_fake_system(np.sqrt([1.0, 0.5, 0.25])), GRID)
    assert gap == pytest.approx(2.0) and lam_min == pytest.approx(0.25)
    assert lambda_stats(_fake_system([1.0]), GRID)[1] == 1.0


def test_noise_norms_are_exact_and_deterministic():
    model = NoiseModel(NOISE_LEVELS, seed=0, realizations=20)
    for li, level in enumerate(NOISE_LEVELS):
        e = model.noise(100, li, 3)
        assert np.linalg.norm(e) == pytest.approx(level, rel=1e-15)
        np.testing.assert_array_equal(e, model.noise(100, li, 3))
    d0, d1 = model.direction(100, 0), model.direction(100, 1)
    assert not np.allclose(d0, d1)
    assert np.linalg.norm(d0) == pytest.approx(np.linalg.norm(d1), rel=1e-15)
    # one direction per realization, shared by all levels
    np.testing.assert_allclose(model.noise(100, 0, 5) / 1e-1, model.noise(100, 5, 5) / 1e-6, rtol=1e-14)
    assert not np.array_equal(d0, NoiseModel(seed=1).direction(100, 0))
    with pytest.raises(IndexError):
        model.direction(100, 20)


def test_make_noisy():
    p = generate(TestProblemSpec("wing"))
    noisy = make_noisy(p, NoiseModel(), 2, 4)
    assert noisy.delta_true == pytest.approx(1e-3, rel=1e-12)
    np.testing.assert_array_equal(noisy.u_star, p.u_star)


@pytest.mark.parametrize("kwargs", [dict(name="nope"), dict(name="shaw", n=3), dict(name="shaw", p=-1)])
def test_invalid_specs(kwargs):
    with pytest.raises(ValueError):
        TestProblemSpec(**kwargs)


def test_heat_needs_even_n():
    with pytest.raises(ValueError):
        heat(11)
