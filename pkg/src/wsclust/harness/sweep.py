"""Seeded experiment sweeps over (delta, constant) cells.

Every run is seeded from its cell coordinates alone, so results do not
depend on the worker count or on scheduling order.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Optional

import numpy as np

from ..datasets import (HardInstanceSpec, SbmSpec, build_experiment_weak_matrix,
                        generate_hard_instance, generate_sbm)
from ..errors import NoFeasibleRadius, WSClustError
from ..estimator import ball_size_for, log_n
from ..kcenter import KCenterWSParams, gonzalez_baseline, kcenter_weak_strong
from ..kmeans import (KMeansWSParams, approx_ratio, kmeans_strong_baseline,
                      kmeans_weak_strong_solve)
from ..metric import EuclideanMetric, TrueMetric, load_labels, load_matrix, load_points_csv
from ..oracles import WeakOracleConfig, make_oracles
from .config import SweepSpec
from .records import ExperimentRecord, records_to_csv

KMEANS_ALGOS = ("kmeans-ws", "kmeans-strong", "kmeans-weak")
PCT_NOTE = ("strong_pct = strong_distinct / C(n,2) * 100; a point-to-all query "
            "counts as n-1 distinct pairs")


# --- datasets and oracles -----------------------------------------------------

def _dataset_key(spec: SweepSpec) -> tuple:
    return (spec.dataset, spec.n, spec.k_true, spec.scale, spec.l, spec.labels, spec.dataset_seed)


@lru_cache(maxsize=4)
def _metric_for(key: tuple) -> TrueMetric:
    source, n, k_true, scale, l, labels, dseed = key
    if source == "sbm":
        return EuclideanMetric(generate_sbm(SbmSpec(n, k_true, mu_scale=scale, seed=dseed)))
    if source == "hard":
        return generate_hard_instance(HardInstanceSpec(n, k_true, l=l, seed=dseed))
    if source.endswith(".csv"):
        return EuclideanMetric(load_points_csv(source))
    return load_matrix(source, None if labels is None else load_labels(labels))


def build_metric(spec: SweepSpec) -> TrueMetric:
    return _metric_for(_dataset_key(spec))


def dataset_name(spec: SweepSpec) -> str:
    if spec.dataset in ("sbm", "hard"):
        return f"{spec.dataset}-n{spec.n}-k{spec.k_true}-s{spec.dataset_seed}"
    return Path(spec.dataset).name


def oracle_seed(seed: int, delta: float) -> int:
    """Weak-oracle seed shared by every run of one (seed, delta) class."""
    ss = np.random.SeedSequence([seed, int(round(delta * 1_000_000))])
    return int(ss.generate_state(1, dtype=np.uint32)[0])


def corruption_mode(spec: SweepSpec, metric: TrueMetric) -> str:
    if spec.corruption is not None:
        return spec.corruption
    return "label-swap" if metric.labels is not None and metric.labels.max() > 0 else "uniform-range"


@lru_cache(maxsize=2)
def _perturbed(key: tuple, delta: float, seed: int) -> np.ndarray:
    return build_experiment_weak_matrix(_metric_for(key), delta, seed)


def build_oracles(spec: SweepSpec, delta: float, strong_cap=None):
    metric = build_metric(spec)
    seed = oracle_seed(spec.seed, delta)
    mode = corruption_mode(spec, metric)
    if mode == "perturbed-matrix":
        return make_oracles(metric, WeakOracleConfig(delta, "uniform-range", seed),
                            strong_cap=strong_cap,
                            weak_matrix=_perturbed(_dataset_key(spec), delta, seed))
    return make_oracles(metric, WeakOracleConfig(delta, mode, seed), strong_cap=strong_cap)


# --- constants to sizes -------------------------------------------------------

def strong_budget(algo: str, const: Optional[float], n: int, k: int, delta: float,
                  log_base: float = 2.0) -> Optional[int]:
    """Nominal strong-query budget ``const * k^p log^2 n / (1/2 - delta)^2``.

    ``p`` is 2 for k-means and 3 for k-center.
    """
    if const is None or algo not in ("kmeans-ws", "kcenter-ws"):
        return None
    power = 2 if algo == "kmeans-ws" else 3
    return max(1, round(const * k ** power * log_n(n, log_base) ** 2 / (0.5 - delta) ** 2))


def centers_for_budget(budget: int) -> int:
    """Largest ``h`` with ``C(h, 2) <= budget`` (at least 1)."""
    return max(1, int((1 + math.sqrt(1 + 8 * budget)) // 2))


def sample_for_budget(budget: int, k: int) -> int:
    return max(k + 1, round(math.sqrt(2 * budget / k)))


# --- single runs --------------------------------------------------------------

@dataclass(frozen=True)
class RunTask:
    spec: SweepSpec
    delta: float
    const: Optional[float]
    repeat: int


def _error_status(exc: BaseException) -> str:
    return f"error: {type(exc).__name__}: {exc}"


def run_task(task: RunTask) -> ExperimentRecord:
    """One algorithm run; failures are recorded in ``status`` instead of raised."""
    spec, delta, const = task.spec, task.delta, task.const
    start = time.perf_counter()
    metric = build_metric(spec)
    n, k = metric.n, spec.target_k
    run_seed = spec.seed + task.repeat
    budget = strong_budget(spec.algo, const, n, k, delta, spec.log_base)
    size_param = None
    cost = est = rad = None
    status, aborted = "completed", False
    oracles = None
    try:
        oracles = build_oracles(spec, delta, strong_cap=spec.budget_cap)
        if spec.algo == "kmeans-ws":
            m = ball_size_for(n, spec.c_ball, spec.log_base)
            t = None
            if budget is not None:
                size_param = max(m, centers_for_budget(budget))
                t = size_param - m
            params = KMeansWSParams(k, epsilon=spec.eps, c_iter=spec.c_iter, c_ball=spec.c_ball,
                                    t_override=t, seed=run_seed, log_base=spec.log_base,
                                    strong_cap=spec.budget_cap)
            if size_param is None:
                size_param = m + params.iterations(n)
            final, _ = kmeans_weak_strong_solve(metric, oracles.weak, oracles.strong, params)
            cost, est, aborted = final.cost, final.est_cost, final.aborted
            status = "aborted" if aborted else "completed"
        elif spec.algo == "kcenter-ws":
            params = KCenterWSParams(k, epsilon=spec.eps, c_sample=spec.c_sample, c_ball=spec.c_ball,
                                     seed=run_seed, search_mode=spec.search_mode,
                                     log_base=spec.log_base)
            if budget is not None:
                m = ball_size_for(n, spec.c_ball, spec.log_base)
                size_param = min(n, max(m, sample_for_budget(budget, k)))
                params = KCenterWSParams(k, epsilon=spec.eps, c_sample=spec.c_sample,
                                         c_ball=spec.c_ball, seed=run_seed,
                                         search_mode=spec.search_mode, log_base=spec.log_base,
                                         sample_size_override=size_param)
            else:
                size_param = params.sample_size(n)
            try:
                res = kcenter_weak_strong(metric, oracles.weak, oracles.strong, params)
                cost, est, rad = res.cost, res.est_cost, res.meta["found_rad"]
                status = res.meta["status"]
            except NoFeasibleRadius as exc:
                status = exc.outcome.status if exc.outcome is not None else "no_feasible_radius"
                aborted = True
        else:
            oracle = oracles.weak if spec.algo.endswith("-weak") else oracles.strong
            if spec.algo.startswith("kmeans"):
                res = kmeans_strong_baseline(metric, oracle, k, seed=run_seed)
            else:
                res = gonzalez_baseline(metric, oracle, k, seed=run_seed)
            cost, est = res.cost, res.est_cost
    except WSClustError as exc:
        status, aborted = _error_status(exc), True
    except (ValueError, ArithmeticError, MemoryError) as exc:
        status, aborted = _error_status(exc), True

    ledger = oracles.ledger if oracles is not None else None
    counts = ledger.as_row() if ledger is not None else dict.fromkeys(
        ("strong_raw", "strong_distinct", "weak_raw", "weak_distinct"), 0)
    return ExperimentRecord(
        algo=spec.algo, dataset=dataset_name(spec), n=n, k=k, delta=delta, eps=spec.eps,
        const=const, c_ball=spec.c_ball, c_iter=spec.c_iter, c_sample=spec.c_sample,
        search_mode=spec.search_mode, seed=run_seed, repeat=task.repeat, budget=budget,
        size_param=size_param, strong_pct=strong_pct(counts["strong_distinct"], n),
        true_cost=cost, est_cost=est, found_rad=rad, baseline_cost=None,
        weak_baseline_cost=None, approx_factor=None, status=status, aborted=aborted,
        wall_time=time.perf_counter() - start, **counts,
    )


def strong_pct(distinct: int, n: int) -> float:
    pairs = n * (n - 1) // 2
    return 100.0 * distinct / pairs if pairs else 0.0


# --- baselines ----------------------------------------------------------------

def _baseline(spec: SweepSpec, delta: float, weak: bool) -> float:
    metric = build_metric(spec)
    oracles = build_oracles(spec, delta)
    oracle = oracles.weak if weak else oracles.strong
    if spec.algo in KMEANS_ALGOS:
        return kmeans_strong_baseline(metric, oracle, spec.target_k, seed=spec.seed).cost
    return gonzalez_baseline(metric, oracle, spec.target_k, seed=spec.seed).cost


def strong_baseline_cost(spec: SweepSpec) -> float:
    """k-means++ (or Gonzalez) through the strong oracle, seeded by the sweep seed."""
    return _baseline(spec, 0.0, weak=False)


def weak_baseline_cost(spec: SweepSpec, delta: float) -> float:
    return _baseline(spec, delta, weak=True)


# --- aggregation --------------------------------------------------------------

@dataclass
class CellSummary:
    algo: str
    delta: float
    const: Optional[float]
    runs: int
    ok_runs: int
    mean_cost: Optional[float]
    var_cost: Optional[float]
    mean_strong_distinct: float
    strong_pct: float
    approx_factor: Optional[float]
    weak_approx_factor: Optional[float]
    score: float
    best_in_delta: bool = False
    best_overall: bool = False

    def to_row(self) -> dict:
        out = {}
        for key, v in self.__dict__.items():
            if v is None:
                out[key] = ""
            elif isinstance(v, bool):
                out[key] = "true" if v else "false"
            elif isinstance(v, float):
                out[key] = repr(v)
            else:
                out[key] = str(v)
        return out


SUMMARY_FIELDS = tuple(CellSummary.__dataclass_fields__)


def score(mean_distinct: float, mean_cost: Optional[float]) -> float:
    """Selection score ``strong_distinct * log(mean cost)``; lower is better."""
    if mean_cost is None:
        return math.inf
    if mean_cost <= 0:
        return -math.inf
    return mean_distinct * math.log(mean_cost)


def summarize(records: list[ExperimentRecord]) -> list[CellSummary]:
    cells: dict[tuple, list[ExperimentRecord]] = {}
    for r in records:
        cells.setdefault((r.delta, r.const), []).append(r)
    out = []
    for (delta, const), rs in cells.items():
        costs = np.array([r.true_cost for r in rs if r.ok], dtype=float)
        mean = float(costs.mean()) if costs.size else None
        var = float(costs.var()) if costs.size else None
        distinct = float(np.mean([r.strong_distinct for r in rs]))
        base, weak = rs[0].baseline_cost, rs[0].weak_baseline_cost
        out.append(CellSummary(
            algo=rs[0].algo, delta=delta, const=const, runs=len(rs), ok_runs=int(costs.size),
            mean_cost=mean, var_cost=var, mean_strong_distinct=distinct,
            strong_pct=float(np.mean([r.strong_pct for r in rs])),
            approx_factor=None if mean is None or base is None else approx_ratio(mean, base),
            weak_approx_factor=None if weak is None or base is None else approx_ratio(weak, base),
            score=score(distinct, mean),
        ))
    _mark_best(out)
    return out


def _best(cells: list[CellSummary]) -> Optional[CellSummary]:
    ranked = [c for c in cells if c.mean_cost is not None]
    if not ranked:
        return None
    return min(ranked, key=lambda c: (c.score, c.mean_strong_distinct))


def _mark_best(cells: list[CellSummary]) -> None:
    for delta in dict.fromkeys(c.delta for c in cells):
        best = _best([c for c in cells if c.delta == delta])
        if best is not None:
            best.best_in_delta = True
    best = _best(cells)
    if best is not None:
        best.best_overall = True


@dataclass
class SweepResult:
    spec: SweepSpec
    records: list[ExperimentRecord]
    cells: list[CellSummary]
    baseline_cost: float
    weak_baseline_costs: dict

    @property
    def best(self) -> Optional[CellSummary]:
        return next((c for c in self.cells if c.best_overall), None)

    def best_for(self, delta: float) -> Optional[CellSummary]:
        return next((c for c in self.cells if c.best_in_delta and c.delta == delta), None)

    def summary_csv(self) -> str:
        lines = [",".join(SUMMARY_FIELDS)]
        for c in self.cells:
            row = c.to_row()
            lines.append(",".join(row[f] for f in SUMMARY_FIELDS))
        return "\n".join(lines) + "\n"

    def summary_text(self) -> str:
        head = f"{'delta':>6} {'const':>10} {'runs':>4} {'mean_cost':>14} {'var_cost':>12} " \
               f"{'strong%':>9} {'approx':>8} {'score':>12}"
        lines = [f"sweep {self.spec.algo} on {dataset_name(self.spec)}",
                 f"strong baseline cost {self.baseline_cost:.6g}", head]
        for c in self.cells:
            mark = " *" if c.best_overall else (" +" if c.best_in_delta else "")
            const = "default" if c.const is None else f"{c.const:g}"
            lines.append(
                f"{c.delta:>6g} {const:>10} {c.ok_runs:>4} {_g(c.mean_cost):>14} {_g(c.var_cost):>12} "
                f"{c.strong_pct:>9.4f} {_g(c.approx_factor):>8} {c.score:>12.6g}{mark}")
        lines.append("* best overall, + best for its delta (min strong_distinct * log(mean cost))")
        lines.append(PCT_NOTE)
        return "\n".join(lines) + "\n"

    def write(self, out_dir) -> dict:
        from .plot import emit_plot

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {"records": out / "records.csv", "summary": out / "summary.csv",
                 "table": out / "summary.txt", "plot": out / "plot.svg"}
        paths["records"].write_text(records_to_csv(self.records))
        paths["summary"].write_text(self.summary_csv())
        paths["table"].write_text(self.summary_text())
        emit_plot(self.records, paths["plot"])
        return paths


def _g(v) -> str:
    return "-" if v is None else f"{v:.6g}"


# --- driver -------------------------------------------------------------------

def tasks_for(spec: SweepSpec) -> list[RunTask]:
    return [RunTask(spec, d, c, r)
            for d in spec.deltas for c in spec.constants for r in range(spec.repeats)]


def run_sweep(spec: SweepSpec, workers: Optional[int] = None) -> SweepResult:
    """Run every (delta, constant, repeat) of ``spec`` and aggregate per cell.

    Baselines are computed once: the strong one per dataset and seed, the
    weak one per delta. All repeats of a cell share them.
    """
    cap = workers if workers is not None else spec.worker_cap()
    tasks = tasks_for(spec)
    base = strong_baseline_cost(spec)
    weak = {d: weak_baseline_cost(spec, d) for d in spec.deltas}
    if cap <= 1 or len(tasks) == 1:
        records = [run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(cap, len(tasks))) as pool:
            records = list(pool.map(run_task, tasks))
    for r in records:
        r.baseline_cost = base
        r.weak_baseline_cost = weak[r.delta]
        r.approx_factor = None if r.true_cost is None else approx_ratio(r.true_cost, base)
    return SweepResult(spec, records, summarize(records), base, weak)
