"""Suite runs shared between test modules (computed once per session)."""

import functools

import numpy as np

from quasiopt.delta_rules import DeltaRuleSpec, choose_delta_parameter
from quasiopt.harness import SuiteConfig, analyze, run_suite
from quasiopt.spectral import decompose
from quasiopt.testproblems import PROBLEMS, TestProblemSpec, generate

TABLE_RULES = ("Q", "HR", "HME", "RE", "ME", "MEe", "best-lmin", "best-lstar",
               "lstar-a", "lstar-b", "lstar-c", "simple-1", "simple-2")


@functools.lru_cache(maxsize=None)
def records(p=0, rules=TABLE_RULES, b=2.0, c0=2.0):
    return tuple(run_suite(SuiteConfig(p_values=(p,), rules=rules, b=b, c0=c0)))


def by_rule(recs, rule):
    return [r for r in recs if r.rule == rule]


def avg_max(recs):
    E = np.array([r.e for r in recs])
    return float(E.mean()), float(E.max())


@functools.lru_cache(maxsize=None)
def run_checks(p=0):
    """Per-run quantities for the error-bound checks, one dict per suite run."""
    cfg = SuiteConfig(p_values=(p,))
    out = []
    for name in PROBLEMS:
        base = generate(TestProblemSpec(name, cfg.n, p))
        sys0 = decompose(base)
        for li, level in enumerate(cfg.levels):
            for r in range(cfg.realizations):
                noisy = base.with_data(base.f_star + cfg.noise.noise(base.f.size, li, r))
                an = analyze(noisy, sys0, cfg.grid, cfg.b, cfg.c0)
                sw, rs = an.sweep, an.restricted
                delta = noisy.delta_true
                me = choose_delta_parameter(DeltaRuleSpec("ME", delta), sw)
                delta_star = max(rs.delta_M, delta)
                e2 = sw.e_reg + delta_star / (2 * np.sqrt(sw.alphas))
                out.append(dict(
                    key=(name, li, r), q=cfg.q, alphas=sw.alphas, err=sw.err,
                    min_err_lmin=float(min(sw.err[j] for j in rs.L_min)),
                    min_err_lstar=float(min(sw.err[j] for j in rs.L_star_min)),
                    min_e1=float(sw.e1.min()), min_e2=float(e2.min()),
                    C=an.C, C1=an.C1, b=cfg.b, me_index=me.index))
    return out
