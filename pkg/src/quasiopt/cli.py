"""Command-line interface: ``python3 -m quasiopt <command> ...``.

Exit codes: 0 success, 2 configuration or input error, 3 numerical failure.
"""

import argparse
import dataclasses
import json
import logging
import os
import sys

import numpy as np

from . import io
from .delta_rules import DELTA_RULES, d_profile
from .harness import (ALL_RULES, ConfigError, SuiteConfig, aggregate, analyze, choose,
                      error_ratios, read_records, run_suite, write_records)
from .heuristic import HEURISTIC_RULES, functional_values
from .spectral import decompose, sweep
from .testproblems import PROBLEMS, NoiseModel, TestProblemSpec, generate

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

# config-file key -> SuiteConfig field
_CONFIG_KEYS = {
    "grid_alpha0": "alpha0", "grid_q": "q", "grid_floor": "floor", "rule": "rules",
    "b": "b", "c0": "c0", "cstar": "cstar", "seed": "seed", "p": "p_values",
    "levels": "levels", "realizations": "realizations", "problem": "problems",
    "n": "n", "tau": "tau", "widen": "widen", "workers": "workers",
}
_LIST_FIELDS = {"rules", "p_values", "levels", "problems"}
GROUP_FIELDS = {"problem": "problem", "rule": "rule", "level": "noise_level", "p": "p",
                "realization": "realization"}


class NumericalFailure(RuntimeError):
    pass


def _common(parser):
    g = parser.add_argument_group("grid and rule parameters")
    g.add_argument("--config", help="JSON file with settings; explicit flags override it")
    g.add_argument("--grid-alpha0", type=float)
    g.add_argument("--grid-q", type=float)
    g.add_argument("--grid-floor", type=float)
    g.add_argument("--b", type=float, help="phase-1 factor b > 1 (default 2)")
    g.add_argument("--c0", type=float, help="phase-2 factor c0 > 1 (default 2)")
    g.add_argument("--cstar", type=float, help="algorithm c factor (default 5)")
    g.add_argument("--tau", type=float, help="exponent of the RE functional (default 1)")
    g.add_argument("--seed", type=int, help="noise seed (default 0)")
    g.add_argument("--n", type=int, help="problem size (default 100)")
    g.add_argument("--widen", action="store_true", default=None,
                   help="search heuristic minimizers on the whole grid")


def _problem_source(parser):
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="problem file (CSV or RPTP)")
    src.add_argument("--problem", choices=PROBLEMS, help="built-in test problem")
    parser.add_argument("--p", type=int, help="smoothness index for --problem")
    parser.add_argument("--level", type=float, help="noise norm added to --problem data")
    parser.add_argument("--realization", type=int, default=0)
    parser.add_argument("--delta", type=float, help="noise level for delta rules")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="quasiopt", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write test problems to files")
    _common(p)
    p.add_argument("--problem", nargs="+", choices=PROBLEMS)
    p.add_argument("--p", type=int, nargs="+")
    p.add_argument("--levels", type=float, nargs="+",
                   help="also write noisy copies at these noise norms")
    p.add_argument("--realizations", type=int)
    p.add_argument("--container", choices=("csv", "rptp"), default="csv")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("solve", help="choose alpha for one problem; JSON on stdout")
    _common(p)
    _problem_source(p)
    p.add_argument("--rule", choices=ALL_RULES, default="lstar-c")
    p.add_argument("--out", help="write JSON here instead of stdout")

    p = sub.add_parser("bench", help="run the experiment suite and write NDJSON records")
    _common(p)
    p.add_argument("--problem", nargs="+", choices=PROBLEMS)
    p.add_argument("--p", type=int, nargs="+")
    p.add_argument("--levels", type=float, nargs="+")
    p.add_argument("--realizations", type=int)
    p.add_argument("--rule", nargs="+", choices=ALL_RULES)
    p.add_argument("--workers", type=int)
    p.add_argument("--out", required=True)

    p = sub.add_parser("table", help="aggregate NDJSON records")
    p.add_argument("records")
    p.add_argument("--group", nargs="+", choices=tuple(GROUP_FIELDS), default=["problem"])
    p.add_argument("--rule", nargs="+", help="keep only these rules")
    p.add_argument("--p", type=int, nargs="+", help="keep only these smoothness indices")
    p.add_argument("--problem", nargs="+", help="keep only these problems")
    p.add_argument("--format", choices=("csv", "json", "markdown"), default="csv")
    p.add_argument("--out")

    p = sub.add_parser("profile", help="write the (alpha, value) series of a rule functional")
    _common(p)
    _problem_source(p)
    p.add_argument("--rule", choices=HEURISTIC_RULES + DELTA_RULES, default="Q")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    return ap


def _load_config_file(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    unknown = sorted(set(data) - set(_CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return data


def suite_config(args) -> SuiteConfig:
    """Defaults, then the config file, then explicit flags."""
    settings = {}
    if getattr(args, "config", None):
        for k, v in _load_config_file(args.config).items():
            settings[_CONFIG_KEYS[k]] = v
    for key, fld in _CONFIG_KEYS.items():
        v = getattr(args, key, None)
        if v is not None:
            settings[fld] = v
    for fld in _LIST_FIELDS & set(settings):
        if not isinstance(settings[fld], (list, tuple)):
            settings[fld] = [settings[fld]]
    try:
        return SuiteConfig.from_dict(settings)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def _emit(text, out):
    if out:
        with io.atomic_open(out) as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_problem(args, cfg: SuiteConfig):
    if args.input:
        try:
            prob = io.read_problem(args.input)
        except OSError as exc:
            raise ConfigError(f"cannot read {args.input}: {exc.strerror}") from None
    else:
        p = cfg.p_values[0] if args.p is None else args.p
        prob = generate(TestProblemSpec(args.problem, cfg.n, p))
        if args.realization < 0:
            raise ConfigError("--realization must be nonnegative")
        if args.level is not None:
            if not args.level > 0:
                raise ConfigError("--level must be positive")
            model = NoiseModel((args.level,), cfg.seed, max(args.realization + 1, 1))
            prob = prob.with_data(prob.f_star + model.noise(prob.f.size, 0, args.realization))
    return prob


def _finite(x, what):
    if not np.all(np.isfinite(x)):
        raise NumericalFailure(f"{what} is not finite")
    return x


def cmd_generate(args, cfg: SuiteConfig):
    os.makedirs(args.out, exist_ok=True)
    writer = io.write_problem_rptp if args.container == "rptp" else io.write_problem_csv
    ext = "." + args.container
    levels = args.levels or ()
    noise = NoiseModel(tuple(levels), cfg.seed, cfg.realizations) if levels else None
    for name in cfg.problems:
        for p in cfg.p_values:
            base = generate(TestProblemSpec(name, cfg.n, p))
            stem = f"{name}_p{p}"
            writer(base, os.path.join(args.out, stem + ext))
            for li in range(len(levels)):
                for r in range(cfg.realizations):
                    noisy = base.with_data(base.f_star + noise.noise(base.f.size, li, r))
                    writer(noisy, os.path.join(args.out, f"{stem}_d{li}_r{r}{ext}"))
    return EXIT_OK


def cmd_solve(args, cfg: SuiteConfig):
    prob = _load_problem(args, cfg)
    an = analyze(prob, grid=cfg.grid, b=cfg.b, c0=cfg.c0, widen=cfg.widen, tau=cfg.tau)
    if args.delta is not None:
        an = dataclasses.replace(an, delta=args.delta)
    sw = an.sweep
    _finite(sw.psi_q, "quasi-optimality sequence")
    alpha, sat, method, rel = choose(args.rule, an, cfg.cstar, cfg.c0, cfg.widen, cfg.tau)
    _finite(alpha, "chosen alpha")
    rs = an.restricted
    out = {
        "problem": prob.name, "rule": args.rule, "chosen_alpha": alpha,
        "chosen_index": sw.grid.nearest_index(alpha), "method": method,
        "reliability": rel, "saturated": sat,
        "L_min": [float(sw.alphas[j]) for j in rs.L_min],
        "L_star_min": [float(sw.alphas[j]) for j in rs.L_star_min],
        "C": an.C.C, "C_cap": an.C.cap, "C1": an.C1.C, "C1_cap": an.C1.cap,
        "diagnostics": {
            "alpha_MD": rs.alpha_MD, "alpha_Q": an.refs.alpha("Q"), "alpha_MDQ": rs.alpha_MDQ,
            "alpha_HR": an.refs.alpha("HR"), "alpha_RE": an.refs.alpha("RE"),
            "alpha_Q1": an.refs.alpha("Q1"), "alpha_Q2": an.refs.alpha("Q2"),
            "delta_M": rs.delta_M, "phase2_guard": rs.guard_fired,
            "R_values": [float(sw.b_residual[j] / np.sqrt(sw.alphas[j]) / sw.norm_u[j])
                         for j in rs.L_star_min],
        },
    }
    if sw.has_exact:
        out["E"], out["E1"] = error_ratios(sw, alpha)
    _emit(io.dumps(out) + "\n", args.out)
    return EXIT_OK


def cmd_bench(args, cfg: SuiteConfig):
    records = run_suite(cfg)
    for rec in records:
        _finite(rec.chosen_alpha, f"alpha for {rec.problem}/{rec.rule}")
    write_records(records, args.out)
    logging.getLogger(__name__).info("wrote %d records to %s", len(records), args.out)
    return EXIT_OK


def cmd_table(args):
    try:
        records = read_records(args.records)
    except OSError as exc:
        raise ConfigError(f"cannot read {args.records}: {exc.strerror}") from None
    except (TypeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{args.records} is not a records file: {exc}") from None
    if not records:
        raise ConfigError(f"{args.records} holds no records")
    grouping = tuple(GROUP_FIELDS[g] for g in args.group)
    table = aggregate(records, grouping, rule=args.rule, p=args.p, problem=args.problem)
    render = {"csv": table.to_csv, "json": table.to_json, "markdown": table.to_markdown}
    _emit(render[args.format](), args.out)
    return EXIT_OK


def cmd_profile(args, cfg: SuiteConfig):
    prob = _load_problem(args, cfg)
    sys_ = decompose(prob)
    sw = sweep(sys_, cfg.grid, prob.u_star, prob.f_star)
    if args.rule in HEURISTIC_RULES:
        vals = functional_values(args.rule, sw, cfg.tau)
    else:
        vals = d_profile(args.rule, sw)
    alphas = sw.alphas[:vals.size]
    _finite(vals[np.isfinite(alphas)], "profile values")
    if args.format == "json":
        text = io.dumps({"rule": args.rule, "alpha": alphas, "value": vals}) + "\n"
    else:
        text = "alpha,value\n" + "".join(
            f"{io.fmt_float(a)},{io.fmt_float(v)}\n" for a, v in zip(alphas, vals))
    _emit(text, args.out)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "table":
            return cmd_table(args)
        cfg = suite_config(args)
        handler = {"generate": cmd_generate, "solve": cmd_solve, "bench": cmd_bench,
                   "profile": cmd_profile}[args.command]
        return handler(args, cfg)
    except (NumericalFailure, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
