"""Run the benchmark suite and write per-problem summary tables as Markdown.

Usage: python3 scripts/reproduce_tables.py --out results [--p 0 2] [--workers 4]
"""

import argparse
import os
import time

from quasiopt.delta_rules import DELTA_RULES
from quasiopt.harness import (ORACLE_RULES, PIPELINE_RULES, SIMPLIFIED_RULES, SuiteConfig,
                              aggregate, run_suite, write_records)
from quasiopt.heuristic import HEURISTIC_RULES
from quasiopt.spectral import decompose
from quasiopt.testproblems import PROBLEMS, TestProblemSpec, generate, lambda_stats

GROUPS = {
    "heuristic_rules": HEURISTIC_RULES,
    "delta_rules": DELTA_RULES,
    "oracle_minimizers": ORACLE_RULES,
    "selection": PIPELINE_RULES + SIMPLIFIED_RULES,
}


def spectrum_table(cfg):
    lines = ["| problem | lambda_min | Lambda |", "|---|---|---|"]
    for name in cfg.problems:
        sys_ = decompose(generate(TestProblemSpec(name, cfg.n)))
        lam_min, lam = lambda_stats(sys_, cfg.grid)
        lines.append(f"| {name} | {lam_min:.3g} | {lam:.4g} |")
    return "\n".join(lines) + "\n"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--p", type=int, nargs="+", default=[0, 2])
    ap.add_argument("--realizations", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)
    rules = tuple(r for g in GROUPS.values() for r in g)
    for p in args.p:
        cfg = SuiteConfig(problems=PROBLEMS, p_values=(p,), rules=rules,
                          realizations=args.realizations, seed=args.seed, workers=args.workers)
        t0 = time.perf_counter()
        records = run_suite(cfg)
        print(f"p={p}: {len(records)} records in {time.perf_counter() - t0:.1f} s")
        write_records(records, os.path.join(args.out, f"records_p{p}.ndjson"))
        for title, group in GROUPS.items():
            parts = [f"# {title}, p = {p}\n"]
            for rule in group:
                parts.append(f"\n## {rule}\n\n" + aggregate(records, ("problem",), rule=rule).to_markdown())
            path = os.path.join(args.out, f"{title}_p{p}.md")
            with open(path, "w") as fh:
                fh.write("".join(parts))
            print("wrote", path)
        if p == 0:
            with open(os.path.join(args.out, "spectrum.md"), "w") as fh:
                fh.write(spectrum_table(cfg))


if __name__ == "__main__":
    main()
