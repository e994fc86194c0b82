import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import random_system
from quasiopt.grid import ParameterGrid
from quasiopt.heuristic import (HEURISTIC_RULES, RuleProfile, admissible_interval, functional_values,
                                global_minimizer, needs_regularization_check, profile)
from quasiopt.minimizers import extract_extrema
from quasiopt.spectral import Problem, decompose, sweep
from quasiopt.testproblems import NoiseModel, PROBLEMS, TestProblemSpec, generate
from suite_cache import by_rule, records

GRID = ParameterGrid()


def _prof(values, grid=GRID):
    v = np.asarray(values, dtype=float)
    return RuleProfile("X", v, grid.alphas[:v.size], 0, v.size - 1, int(np.argmin(v)))


def test_identity_profile_has_no_interior_minimum():
    sw = sweep(decompose(Problem(np.eye(1), [1.0])), GRID)
    a = GRID.alphas
    np.testing.assert_allclose(sw.psi_q, a / (1 + a) ** 2, rtol=1e-14)
    ext = extract_extrema(sw.psi_q, a)
    assert ext.min_idx == (GRID.M,)
    assert profile("Q", sw, widen=True).global_min_index == GRID.M


@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_discrete_quasioptimality_sandwich(seed):
    rng = np.random.default_rng(seed)
    A = random_system(rng, 10, 10, cond=10 ** rng.uniform(1, 8))
    sw = sweep(decompose(Problem(A, rng.standard_normal(10))), GRID)
    qd = functional_values("QD", sw)
    assert qd.size == GRID.M
    assert np.all(sw.psi_q[:-1] <= qd * (1 + 1e-12))
    assert np.all(qd <= sw.psi_q[1:] / GRID.q * (1 + 1e-12))


def test_global_minimizer_monotone_increasing():
    g = ParameterGrid(1.0, 0.5, 2 ** -5)
    prof = _prof(np.arange(g.M + 1)[::-1], g)  # increasing in alpha
    assert global_minimizer(prof, 0.05, 1.0) == pytest.approx(0.0625)


def test_global_minimizer_ties_go_to_larger_alpha():
    g = ParameterGrid(1.0, 0.5, 2 ** -5)
    prof = _prof(np.ones(g.M + 1), g)
    assert global_minimizer(prof, 0.1, 0.5) == 0.5


def test_global_minimizer_empty_interval():
    g = ParameterGrid(1.0, 0.5, 2 ** -5)
    with pytest.raises(ValueError):
        global_minimizer(_prof(np.ones(g.M + 1), g), 0.3, 0.4)


@pytest.mark.parametrize("rule", HEURISTIC_RULES)
def test_profile_global_min_lies_in_window(rule, rng):
    p = generate(TestProblemSpec("phillips"))
    sw = sweep(decompose(p.with_data(p.f_star + 1e-2 * rng.standard_normal(100))), GRID)
    prof = profile(rule, sw)
    assert prof.lo_index <= prof.global_min_index <= prof.hi_index
    seg = prof.values[prof.lo_index:prof.hi_index + 1]
    assert prof.values[prof.global_min_index] == seg.min()


def test_phillips_window_excludes_alphas_below_lambda_min():
    p = generate(TestProblemSpec("phillips"))
    s = decompose(p)
    lo, hi = admissible_interval(s, GRID)
    assert lo == pytest.approx(s.lambda_min) and hi == 1.0
    assert admissible_interval(s, GRID, widen=True)[0] == GRID.alpha_M


def test_reginska_rejects_small_tau():
    sw = sweep(decompose(Problem(np.eye(2), [1.0, 1.0])), GRID)
    with pytest.raises(ValueError):
        functional_values("RE", sw, tau=0.5)
    with pytest.raises(ValueError):
        functional_values("GCV", sw)


@pytest.mark.parametrize("name", PROBLEMS)
def test_modified_q_dominates_and_tends_to_q(name, rng):
    p = generate(TestProblemSpec(name))
    sw = sweep(decompose(p.with_data(p.f_star + 1e-3 * rng.standard_normal(100))), GRID)
    qt = functional_values("Q_TILDE", sw)
    assert np.all(qt >= sw.psi_q)
    assert qt[-1] / sw.psi_q[-1] < 1 + GRID.alpha_M / sw.sys.lambda_1 + 1e-15


@pytest.mark.parametrize("name", PROBLEMS)
def test_b_residual_dominates_b2_residual(name, rng):
    p = generate(TestProblemSpec(name))
    sw = sweep(decompose(p.with_data(p.f_star + 1e-4 * rng.standard_normal(100))), GRID)
    assert np.all(sw.b_residual >= sw.b2_residual * (1 - 1e-14))
    assert np.all(functional_values("HME", sw) >= functional_values("HR", sw) * (1 - 1e-14))


def test_quasioptimality_fails_on_heat():
    recs = [r for r in by_rule(records(0), "Q") if r.problem == "heat"]
    assert np.mean([r.failed for r in recs]) > 0.5


def test_reginska_average_at_largest_noise():
    recs = [r for r in by_rule(records(0), "RE") if r.noise_level == 1e-1]
    assert 1.2 <= np.mean([r.e for r in recs]) <= 1.8


def test_needs_regularization_verdicts():
    # lambda_min above alpha0
    s = decompose(Problem(2 * np.eye(2), [1.0, 1.0]))
    assert needs_regularization_check(s, GRID, exact=(np.array([0.5, 0.5]), np.ones(2))) == "not_needed"
    # well conditioned, noise free
    A = np.diag([1.0, 0.9])
    u = np.array([1.0, 1.0])
    s = decompose(Problem(A, A @ u))
    assert needs_regularization_check(s, GRID, exact=(u, A @ u)) == "not_needed"
    # shaw with noise
    p = generate(TestProblemSpec("shaw"))
    f = p.f_star + NoiseModel((1e-2,), 0, 1).noise(100, 0, 0)
    assert needs_regularization_check(decompose(p.with_data(f)), GRID, exact=(p.u_star, p.f_star)) == "needs"
    # no exact data
    assert needs_regularization_check(s, GRID) == "unknown"
    assert needs_regularization_check(sweep(s, GRID)) == "unknown"
