"""Experiment driver: seeded runs over a change schedule, CSV traces, summaries."""

from __future__ import annotations

import csv
import logging
import math
import time
from collections import defaultdict
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import TextIO

import numpy as np

from .baselines import DNSGA2, MOEAD, NSGA2, BaselineConfig
from .core import ContractError
from .dtaea import DTAEA, DtaeaConfig
from .metrics import MC_SAMPLES, hv_normalized, igd, rank_algorithms
from .problems import PFCache, make_problem, make_schedule
from .variation import VariationParams

log = logging.getLogger(__name__)

ALGORITHM_NAMES = ("dtaea", "dtaea-v1", "dtaea-v2", "dtaea-v3", "nsga2", "dnsga2", "moead")
QUANTILE_METHOD = "linear"

TRACE_COLUMNS = (
    "run_id", "algorithm", "problem", "tau_t", "seed", "time_step",
    "generation", "m", "igd", "hv_norm", "wall_ms",
)
SUMMARY_COLUMNS = (
    "algorithm", "problem", "tau_t", "runs", "migd_median", "migd_iqr",
    "mhv_median", "mhv_iqr", "mean_rank_igd", "mean_rank_hv",
)


@dataclass
class ExperimentConfig:
    problem: str = "F2"
    algorithm: str = "dtaea"
    tau_t: int = 50
    n_pop: int = 300
    schedule: str = "eq10"
    custom_schedule: list[int] | None = None
    seeds: list[int] = field(default_factory=lambda: [1])
    warmup_gens: int = 300
    ref_size: int = 1000
    ref_seed: int = 2024
    out_path: str | None = None
    per_generation: bool = False
    record_hv: bool = True
    hv_samples: int = MC_SAMPLES
    timing: bool = False
    halved_form: bool = False
    injection_fraction: float = 0.2
    neighborhood: int = 20
    alpha: float = 100.0

    def __post_init__(self) -> None:
        self.problem = self.problem.upper()
        self.algorithm = self.algorithm.lower()
        if self.algorithm not in ALGORITHM_NAMES:
            raise ContractError(
                f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHM_NAMES}"
            )
        if self.tau_t < 1:
            raise ContractError("tau_t must be at least 1")
        if not self.seeds:
            raise ContractError("at least one seed is required")
        # validates the problem id
        self.make_problem()

    @classmethod
    def from_mapping(cls, data: dict) -> ExperimentConfig:
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ContractError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def make_problem(self):
        return make_problem(self.problem, alpha=self.alpha, verbatim=self.halved_form)

    def make_schedule(self):
        return make_schedule(self.schedule, self.tau_t, self.warmup_gens, self.custom_schedule)


@dataclass(frozen=True)
class TraceRow:
    run_id: str
    algorithm: str
    problem: str
    tau_t: int
    seed: int
    time_step: int
    generation: int
    m: int
    igd: float
    hv_norm: float
    wall_ms: float


def make_algorithm(name: str, problem, n_pop: int, rng, config: ExperimentConfig | None = None):
    params = VariationParams()
    if name.startswith("dtaea"):
        variant = "full" if name == "dtaea" else name.split("-")[1]
        return DTAEA(problem, DtaeaConfig(n_pop, variant, params), rng)
    extra = {}
    if config is not None:
        extra = dict(injection_fraction=config.injection_fraction, neighborhood=config.neighborhood)
    bcfg = BaselineConfig(algo=name, n_pop=n_pop, variation=params, **extra)
    cls = {"nsga2": NSGA2, "dnsga2": DNSGA2, "moead": MOEAD}.get(name)
    if cls is None:
        raise ContractError(f"unknown algorithm {name!r}")
    return cls(problem, bcfg, rng)


def run_single(
    config: ExperimentConfig, seed: int, cache: PFCache | None = None, hooks: list | None = None
) -> list[TraceRow]:
    """One seeded run. ``hooks`` collects ``(generation, kind)`` change events."""
    cache = cache or PFCache()
    problem = config.make_problem()
    schedule = config.make_schedule()
    rng = np.random.default_rng(seed)
    algo = make_algorithm(config.algorithm, problem, config.n_pop, rng, config)
    run_id = f"{config.algorithm}-{config.problem}-tau{config.tau_t}-s{seed}"
    rows: list[TraceRow] = []
    start = time.perf_counter()

    algo.initialize(schedule.m_of(1), 0)
    t_prev = 1
    for gen in range(schedule.total_generations):
        t = schedule.time_step(gen)
        m = schedule.m_of(t)
        if t != t_prev:
            algo.on_change(m, gen)
            if hooks is not None:
                hooks.append((gen, "change"))
            t_prev = t
        elif gen > 0 and problem.drifts and problem.tbar(gen) != problem.tbar(gen - 1):
            algo.on_drift(gen)
            if hooks is not None:
                hooks.append((gen, "drift"))
        algo.step(gen)

        step_end = gen == schedule.last_generation(t)
        if not (step_end or config.per_generation):
            continue
        F = algo.population.F
        ref = cache.get(problem, m, gen, config.ref_size, config.ref_seed)
        igd_val = igd(ref, F)
        hv_val = math.nan
        if step_end and config.record_hv:
            hv_val = hv_normalized(F, config.hv_samples, seed=config.ref_seed)
        wall = (time.perf_counter() - start) * 1e3 if config.timing else 0.0
        rows.append(
            TraceRow(run_id, config.algorithm, config.problem, config.tau_t, seed,
                     t, gen, m, igd_val, hv_val, wall)
        )
    return rows


def run_experiment(config: ExperimentConfig, cache: PFCache | None = None) -> list[TraceRow]:
    """Run every seed of ``config``; writes the trace CSV when ``out_path`` is set."""
    cache = cache or PFCache()
    out_file = None
    if config.out_path:
        out_file = trace_path(config)
        try:
            out_file.parent.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise OSError(f"cannot create output directory {out_file.parent}: {exc}") from exc
    rows: list[TraceRow] = []
    for seed in config.seeds:
        log.info("run %s %s tau=%d seed=%d", config.algorithm, config.problem, config.tau_t, seed)
        rows.extend(run_single(config, seed, cache))
    if out_file is not None:
        write_trace(rows, out_file)
    return rows


def trace_path(config: ExperimentConfig) -> Path:
    name = f"trace_{config.problem}_{config.algorithm}_tau{config.tau_t}_{config.schedule}.csv"
    return Path(config.out_path) / name


def _fmt(v) -> str:
    if isinstance(v, float):
        # plain float repr; numpy scalars would otherwise print as np.float64(...)
        return repr(float(v))
    return str(v)


def write_trace(rows: list[TraceRow], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_COLUMNS)
        for r in rows:
            w.writerow([_fmt(v) for v in asdict(r).values()])


def read_trace(path: str | Path) -> list[TraceRow]:
    types = {f.name: f.type for f in fields(TraceRow)}
    conv = {"int": int, "float": float, "str": str}
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(TraceRow(**{k: conv[types[k]](v) for k, v in rec.items()}))
    return rows


# -- aggregation ---------------------------------------------------------------


def step_end_rows(rows: list[TraceRow]) -> list[TraceRow]:
    """The last recorded row of every (run, time step)."""
    last: dict[tuple[str, int], TraceRow] = {}
    for r in rows:
        key = (r.run_id, r.time_step)
        if key not in last or r.generation > last[key].generation:
            last[key] = r
    return sorted(last.values(), key=lambda r: (r.run_id, r.time_step))


def median_iqr(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75], method=QUANTILE_METHOD)
    return float(med), float(q3 - q1)


def per_run_means(rows: list[TraceRow]) -> dict[str, dict]:
    """MIGD and MHV per run id, plus cell identifiers."""
    by_run: dict[str, list[TraceRow]] = defaultdict(list)
    for r in step_end_rows(rows):
        by_run[r.run_id].append(r)
    out = {}
    for run_id, rs in by_run.items():
        out[run_id] = dict(
            algorithm=rs[0].algorithm, problem=rs[0].problem, tau_t=rs[0].tau_t,
            seed=rs[0].seed,
            migd=float(np.mean([r.igd for r in rs])),
            mhv=float(np.mean([r.hv_norm for r in rs])),
        )
    return out


def summarize(traces: list[list[TraceRow]] | list[TraceRow]) -> list[dict]:
    """Median/IQR of MIGD and MHV per (algorithm, problem, tau_t), plus mean ranks.

    Ranks compare algorithms within a (problem, tau_t) cell at each time step
    using the across-seed median, then average over time steps.
    """
    rows: list[TraceRow] = []
    for item in traces:
        if isinstance(item, TraceRow):
            rows.append(item)
        else:
            rows.extend(item)
    runs = per_run_means(rows)
    cells: dict[tuple, list[dict]] = defaultdict(list)
    for rec in runs.values():
        cells[(rec["algorithm"], rec["problem"], rec["tau_t"])].append(rec)

    step_scores: dict[tuple, dict[str, dict[int, list]]] = defaultdict(
        lambda: defaultdict(lambda: defaultdict(list))
    )
    for r in step_end_rows(rows):
        step_scores[(r.problem, r.tau_t)][r.algorithm][r.time_step].append((r.igd, r.hv_norm))
    ranks: dict[tuple, tuple[float, float]] = {}
    for (problem, tau_t), algos in step_scores.items():
        steps = sorted(set.intersection(*(set(s) for s in algos.values())))
        igd_scores = {a: [float(np.median([v[0] for v in s[t]])) for t in steps] for a, s in algos.items()}
        hv_scores = {a: [float(np.median([v[1] for v in s[t]])) for t in steps] for a, s in algos.items()}
        r_igd = rank_algorithms(igd_scores, lower_is_better=True) if steps else {}
        r_hv = rank_algorithms(hv_scores, lower_is_better=False) if steps else {}
        for a in algos:
            ranks[(a, problem, tau_t)] = (r_igd.get(a, math.nan), r_hv.get(a, math.nan))

    table = []
    for key in sorted(cells):
        recs = cells[key]
        migd_med, migd_iqr = median_iqr([r["migd"] for r in recs])
        mhv_med, mhv_iqr = median_iqr([r["mhv"] for r in recs])
        rank_igd, rank_hv = ranks.get(key, (math.nan, math.nan))
        table.append(dict(
            algorithm=key[0], problem=key[1], tau_t=key[2], runs=len(recs),
            migd_median=migd_med, migd_iqr=migd_iqr, mhv_median=mhv_med,
            mhv_iqr=mhv_iqr, mean_rank_igd=rank_igd, mean_rank_hv=rank_hv,
        ))
    return table


def write_summary(table: list[dict], target: str | Path | TextIO) -> None:
    """Write the summary CSV to a path or an open text stream."""
    if not isinstance(target, (str, Path)):
        _write_summary_rows(table, target)
        return
    with open(target, "w", newline="") as fh:
        _write_summary_rows(table, fh)


def _write_summary_rows(table: list[dict], fh: TextIO) -> None:
    fh.write(f"# quantile_method={QUANTILE_METHOD}\n")
    w = csv.writer(fh)
    w.writerow(SUMMARY_COLUMNS)
    for rec in table:
        w.writerow([_fmt(rec[c]) for c in SUMMARY_COLUMNS])


def emit_plot_data(rows: list[TraceRow], out_dir: str | Path) -> list[Path]:
    """Write median-IGD trajectories, one CSV per (problem, tau_t)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    groups: dict[tuple, dict[tuple, list[float]]] = defaultdict(lambda: defaultdict(list))
    for r in rows:
        groups[(r.problem, r.tau_t)][(r.generation, r.algorithm)].append(r.igd)
    written = []
    for (problem, tau_t), series in sorted(groups.items()):
        path = out_dir / f"igd_{problem}_tau{tau_t}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(("generation", "algorithm", "median_igd"))
            for (gen, algo), vals in sorted(series.items()):
                w.writerow((gen, algo, repr(float(np.median(vals)))))
        written.append(path)
    return written
