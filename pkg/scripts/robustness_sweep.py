"""Overall average error ratio of the selection algorithms over a (b, c0) grid."""

import argparse
import itertools

import numpy as np

from quasiopt.harness import PIPELINE_RULES, SuiteConfig, run_suite


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--b", type=float, nargs="+", default=[1.5, 2.0])
    ap.add_argument("--c0", type=float, nargs="+", default=[1.5, 2.0, 3.0])
    ap.add_argument("--p", type=int, default=0)
    ap.add_argument("--realizations", type=int, default=20)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    print("b,c0," + ",".join(f"avg_e_{r},max_e_{r}" for r in PIPELINE_RULES))
    for b, c0 in itertools.product(args.b, args.c0):
        cfg = SuiteConfig(p_values=(args.p,), rules=PIPELINE_RULES, b=b, c0=c0,
                          realizations=args.realizations, workers=args.workers)
        recs = run_suite(cfg)
        cells = []
        for rule in PIPELINE_RULES:
            E = np.array([r.e for r in recs if r.rule == rule])
            cells += [f"{E.mean():.4f}", f"{E.max():.4g}"]
        print(f"{b},{c0}," + ",".join(cells))


if __name__ == "__main__":
    main()
