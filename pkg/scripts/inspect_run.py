"""Print the minimizer structure of one noisy test problem.

Example: python3 scripts/inspect_run.py heat --level 0 --realization 7
"""

import argparse

import numpy as np

from quasiopt.harness import PIPELINE_RULES, SuiteConfig, analyze, choose, error_ratios
from quasiopt.spectral import decompose
from quasiopt.testproblems import PROBLEMS, TestProblemSpec, generate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("problem", choices=PROBLEMS)
    ap.add_argument("--p", type=int, default=0)
    ap.add_argument("--level", type=int, default=0, help="index into the noise levels")
    ap.add_argument("--realization", type=int, default=0)
    args = ap.parse_args()
    cfg = SuiteConfig()
    base = generate(TestProblemSpec(args.problem, cfg.n, args.p))
    noisy = base.with_data(base.f_star + cfg.noise.noise(base.f.size, args.level, args.realization))
    an = analyze(noisy, decompose(base), cfg.grid)
    sw, rs = an.sweep, an.restricted
    print(f"best grid index {int(np.argmin(sw.err))}, alpha {sw.alphas[np.argmin(sw.err)]:.3e}")
    print(f"alpha_MD {rs.alpha_MD:.3e}  alpha_Q {rs.alpha_Q:.3e}  alpha_MDQ {rs.alpha_MDQ:.3e}")
    print(f"C {an.C.C:.3f}  C1 {an.C1.C:.3f}")
    print("  index      alpha        psi_Q        error   in L*")
    for j in rs.L_min:
        mark = "*" if j in rs.L_star_min else ""
        print(f"{j:7d} {sw.alphas[j]:10.3e} {sw.psi_q[j]:12.4e} {sw.err[j]:12.4e}   {mark}")
    for rule in PIPELINE_RULES:
        alpha, _, method, rel = choose(rule, an)
        print(f"{rule}: alpha {alpha:.3e}  E {error_ratios(sw, alpha)[0]:.3f}  ({method}, {rel})")


if __name__ == "__main__":
    main()
