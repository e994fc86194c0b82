"""Benchmark suite over the test problems: records, metrics and aggregate tables."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
import hashlib
import io as _io
import csv
import math

import numpy as np

from . import io
from .delta_rules import DELTA_RULES, DeltaRuleSpec, choose_delta_parameter
from .grid import ParameterGrid
from .heuristic import HEURISTIC_RULES, profile
from .minimizers import aposteriori_C, aposteriori_C1, extrema_from_sweep, restrict
from .selection import reference_parameters, select, select_simplified
from .spectral import GridSweep, Problem, decompose, sweep
from .testproblems import NOISE_LEVELS, PROBLEMS, NoiseModel, TestProblemSpec, generate

ORACLE_RULES = ("best-lmin", "best-lstar")
PIPELINE_RULES = ("lstar-a", "lstar-b", "lstar-c")
SIMPLIFIED_RULES = ("simple-1", "simple-2")
ALL_RULES = HEURISTIC_RULES + DELTA_RULES + ORACLE_RULES + PIPELINE_RULES + SIMPLIFIED_RULES
FAIL_THRESHOLD = 100.0


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SuiteConfig:
    problems: tuple = PROBLEMS
    p_values: tuple = (0,)
    levels: tuple = NOISE_LEVELS
    realizations: int = 20
    rules: tuple = ("Q",)
    seed: int = 0
    n: int = 100
    alpha0: float = 1.0
    q: float = 0.95
    floor: float = 1e-18
    b: float = 2.0
    c0: float = 2.0
    cstar: float = 5.0
    tau: float = 1.0
    widen: bool = False
    workers: int = 1

    def __post_init__(self):
        for name in ("problems", "p_values", "levels", "rules"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        bad = [p for p in self.problems if p not in PROBLEMS]
        if bad:
            raise ConfigError(f"unknown problems {bad}; choose from {', '.join(PROBLEMS)}")
        bad = [r for r in self.rules if r not in ALL_RULES]
        if bad:
            raise ConfigError(f"unknown rules {bad}; choose from {', '.join(ALL_RULES)}")
        if not self.problems or not self.rules or not self.levels:
            raise ConfigError("problems, rules and levels must be nonempty")
        if any(not (lv > 0) for lv in self.levels):
            raise ConfigError("noise levels must be positive")
        if self.realizations < 1:
            raise ConfigError("realizations must be >= 1")
        if any(p < 0 for p in self.p_values):
            raise ConfigError("smoothness p must be nonnegative")
        if not self.b > 1:
            raise ConfigError(f"b must exceed 1, got {self.b}")
        if not self.c0 > 1:
            raise ConfigError(f"c0 must exceed 1, got {self.c0}")
        if not self.cstar > 0:
            raise ConfigError(f"cstar must be positive, got {self.cstar}")
        try:
            self.grid
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def grid(self) -> ParameterGrid:
        return ParameterGrid(self.alpha0, self.q, self.floor)

    @property
    def noise(self) -> NoiseModel:
        return NoiseModel(tuple(self.levels), self.seed, self.realizations)

    def digest(self) -> str:
        keys = ("n", "alpha0", "q", "floor", "b", "c0", "cstar", "tau", "widen", "seed")
        blob = io.dumps({k: getattr(self, k) for k in keys})
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    @classmethod
    def from_dict(cls, d: dict) -> "SuiteConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**d)


@dataclass(frozen=True)
class ExperimentRecord:
    problem: str
    n: int
    p: int
    noise_level: float
    realization: int
    rule: str
    config_digest: str
    chosen_alpha: float
    e: float
    e1: float
    l_min_size: int
    l_star_size: int
    c: float
    c1: float
    failed: bool
    saturated: bool
    singleton: bool
    method: str = ""
    reliability: str = ""


@dataclass
class RunAnalysis:
    """Everything derived from one noisy problem that the rules share."""

    sweep: GridSweep
    ext: object
    restricted: object
    C: object
    C1: object
    refs: object
    delta: float

    @property
    def singleton(self) -> bool:
        Ls = self.restricted.L_star_min
        M = self.sweep.alphas.size - 1
        return len(Ls) == 1 or (len(Ls) == 2 and M in Ls)


def analyze(problem: Problem, sys=None, grid: ParameterGrid = None, b=2.0, c0=2.0,
            widen=False, tau=1.0) -> RunAnalysis:
    grid = grid or ParameterGrid()
    sys = sys.with_data(problem.f) if sys is not None else decompose(problem)
    sw = sweep(sys, grid, problem.u_star, problem.f_star)
    ext = extrema_from_sweep(sw)
    rs = restrict(ext, sw, b, c0)
    delta = problem.delta_true
    return RunAnalysis(sw, ext, rs, aposteriori_C(ext, sw), aposteriori_C1(rs, sw),
                       reference_parameters(sw, widen, tau), delta if delta is not None else math.nan)


def choose(rule: str, an: RunAnalysis, cstar=5.0, c0=2.0, widen=False, tau=1.0):
    """Apply one rule; returns ``(alpha, saturated, method, reliability)``."""
    sw = an.sweep
    if rule in HEURISTIC_RULES:
        prof = profile(rule, sw, tau=tau, widen=widen)
        return prof.global_min_alpha, False, "", ""
    if rule in DELTA_RULES:
        if not an.delta > 0:
            raise ValueError(f"rule {rule} needs a positive noise level")
        ch = choose_delta_parameter(DeltaRuleSpec(rule, an.delta), sw)
        return ch.alpha, ch.saturated, "", ""
    if rule in ORACLE_RULES:
        if not sw.has_exact:
            raise ValueError(f"rule {rule} needs the exact solution")
        cand = an.ext.min_idx if rule == "best-lmin" else an.restricted.L_star_min
        j = min(cand, key=lambda k: (sw.err[k], k))
        return float(sw.alphas[j]), False, "", ""
    if rule in PIPELINE_RULES:
        res = select(an.restricted, sw, cstar, rule[-1], widen, an.refs)
        return res.chosen_alpha, False, res.method, res.reliability
    if rule in SIMPLIFIED_RULES:
        res = select_simplified(int(rule[-1]), an.ext, sw, c0, widen, an.refs)
        return res.chosen_alpha, False, res.method, res.reliability
    raise ValueError(f"unknown rule {rule!r}")


def error_ratios(sw: GridSweep, alpha: float) -> tuple[float, float]:
    """``(E, E1)``: error at ``alpha`` over the best grid error and over min e1."""
    err = sw.error_at(alpha)
    return err / float(sw.err.min()), err / float(sw.e1.min())


def _run_problem(args):
    cfg, name, p = args
    base = generate(TestProblemSpec(name, cfg.n, p))
    sys0 = decompose(base)
    grid = cfg.grid
    noise = cfg.noise
    digest = cfg.digest()
    out = []
    for li, level in enumerate(cfg.levels):
        for r in range(cfg.realizations):
            e = noise.noise(base.f_star.size, li, r)
            noisy = base.with_data(base.f_star + e)
            an = analyze(noisy, sys0, grid, cfg.b, cfg.c0, cfg.widen, cfg.tau)
            for rule in cfg.rules:
                alpha, sat, method, rel = choose(rule, an, cfg.cstar, cfg.c0, cfg.widen, cfg.tau)
                E, E1 = error_ratios(an.sweep, alpha)
                out.append(ExperimentRecord(
                    problem=name, n=cfg.n, p=p, noise_level=float(level), realization=r,
                    rule=rule, config_digest=digest, chosen_alpha=alpha, e=E, e1=E1,
                    l_min_size=an.ext.K, l_star_size=an.restricted.k_star,
                    c=an.C.C, c1=an.C1.C, failed=bool(E > FAIL_THRESHOLD),
                    saturated=bool(sat), singleton=an.singleton, method=method,
                    reliability=rel))
    return out


def run_suite(cfg: SuiteConfig) -> list:
    """One record per (problem, p, level, realization, rule), in that key order."""
    tasks = [(cfg, name, p) for name in cfg.problems for p in cfg.p_values]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            chunks = list(ex.map(_run_problem, tasks))
    else:
        chunks = [_run_problem(t) for t in tasks]
    return [rec for chunk in chunks for rec in chunk]


def record_dict(rec) -> dict:
    return asdict(rec) if isinstance(rec, ExperimentRecord) else dict(rec)


def write_records(records, path):
    io.write_ndjson((record_dict(r) for r in records), path)


def read_records(path) -> list:
    return [ExperimentRecord(**{k: v for k, v in d.items()}) for d in io.read_ndjson(path)]


# aggregation ---------------------------------------------------------------

TABLE_COLUMNS = ("runs", "avg_e", "max_e", "fail_pct", "avg_l_min", "max_l_min",
                 "avg_l_star", "max_l_star", "avg_c", "max_c", "avg_c1", "max_c1",
                 "singleton_pct")


@dataclass
class AggregateTable:
    keys: tuple
    rows: list = field(default_factory=list)
    total: dict = None

    @property
    def empty(self) -> bool:
        return not self.rows

    def to_csv(self) -> str:
        if self.empty:
            return "# empty selection\n"
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(list(self.keys) + list(TABLE_COLUMNS))
        for row in self.rows + [self.total]:
            w.writerow([row[k] for k in self.keys] +
                       [row[c] if c == "runs" else io.fmt_float(row[c]) for c in TABLE_COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        return io.dumps({"keys": list(self.keys), "empty": self.empty,
                         "rows": self.rows, "total": self.total}) + "\n"

    def to_markdown(self) -> str:
        if self.empty:
            return "_empty selection_\n"
        head = list(self.keys) + list(TABLE_COLUMNS)
        lines = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
        for row in self.rows + [self.total]:
            cells = [str(row[k]) for k in self.keys]
            cells += [str(row[c]) if c == "runs" else f"{row[c]:.3g}" for c in TABLE_COLUMNS]
            lines.append("| " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"


def _summary(recs) -> dict:
    E = np.array([r.e for r in recs])

    def col(name):
        return np.array([getattr(r, name) for r in recs], dtype=float)

    lm, ls, C, C1 = col("l_min_size"), col("l_star_size"), col("c"), col("c1")
    return {
        "runs": len(recs), "avg_e": float(E.mean()), "max_e": float(E.max()),
        "fail_pct": 100.0 * float(np.mean(E > FAIL_THRESHOLD)),
        "avg_l_min": float(lm.mean()), "max_l_min": float(lm.max()),
        "avg_l_star": float(ls.mean()), "max_l_star": float(ls.max()),
        "avg_c": float(C.mean()), "max_c": float(C.max()),
        "avg_c1": float(C1.mean()), "max_c1": float(C1.max()),
        "singleton_pct": 100.0 * float(np.mean([r.singleton for r in recs])),
    }


def aggregate(records, grouping=("problem",), **filters) -> AggregateTable:
    """Group records by the given fields; keyword filters select exact field values.

    Rows are ordered by first appearance of each group in ``records``. The
    total row aggregates every selected record.
    """
    grouping = tuple(grouping)
    recs = [r if isinstance(r, ExperimentRecord) else ExperimentRecord(**r) for r in records]
    for k, v in filters.items():
        if v is None:
            continue
        allowed = set(v) if isinstance(v, (list, tuple, set)) else {v}
        recs = [r for r in recs if getattr(r, k) in allowed]
    table = AggregateTable(grouping)
    if not recs:
        return table
    groups = {}
    for r in recs:
        groups.setdefault(tuple(getattr(r, k) for k in grouping), []).append(r)
    for key, members in groups.items():
        row = dict(zip(grouping, key))
        row.update(_summary(members))
        table.rows.append(row)
    table.total = {k: "total" for k in grouping}
    table.total.update(_summary(recs))
    return table
