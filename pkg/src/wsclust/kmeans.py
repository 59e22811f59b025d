"""k-means with a weak and a strong oracle.

:func:`kmeans_weak_strong` is oversampling k-means++ driven by median-over-ball
estimates: it returns a bi-criteria candidate set plus a weighted instance,
which :func:`solve_weighted` reduces to ``k`` centers using only the
strong distances already paid for. :func:`kmeans_strong_baseline` is plain
D^2 sampling through a single oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import BudgetExceeded, PreconditionError, UsageError
from .estimator import CenterState, ball_size_for, build_sampling_distribution, log_n, sample_index
from .metric import TrueMetric
from .oracles import QueryLedger, StrongOracle, WeakOracle, _Oracle

THEORY_ITER_CONSTANT = 4320 * 29160
DEFAULT_ITER_MULTIPLIER = 20


@dataclass(frozen=True)
class KMeansWSParams:
    """Parameters for :func:`kmeans_weak_strong`.

    The iteration count is ``t_override`` when set. Otherwise, with
    ``c_iter=None`` it is ``20 * k * log n``; with ``c_iter`` given it is
    ``c_iter * 4320 * 29160 / eps^3 * k * log n``. Both are floored at ``k``.
    """

    k: int
    epsilon: float = 0.5
    c_iter: Optional[float] = None
    c_ball: float = 0.05
    t_override: Optional[int] = None
    seed: int = 0
    init_count: Optional[int] = None
    log_base: float = 2.0
    strong_cap: Optional[int] = None

    def __post_init__(self):
        if self.k < 1:
            raise UsageError("k must be positive")
        if not 0 < self.epsilon < 1:
            raise UsageError("epsilon must lie in (0, 1)")
        if self.t_override is not None and self.t_override < 0:
            raise UsageError("t_override must be non-negative")

    def ball_size(self, n: int) -> int:
        return ball_size_for(n, self.c_ball, self.log_base)

    def iterations(self, n: int) -> int:
        if self.t_override is not None:
            return self.t_override
        ln = log_n(n, self.log_base)
        if self.c_iter is None:
            t = DEFAULT_ITER_MULTIPLIER * self.k * ln
        else:
            t = self.c_iter * THEORY_ITER_CONSTANT / self.epsilon ** 3 * self.k * ln
        return max(self.k, round(t))

    def initial_count(self, n: int) -> int:
        m = self.ball_size(n)
        count = m if self.init_count is None else self.init_count
        if count < m:
            raise UsageError(f"init_count={count} is below ball_size={m}")
        return count


@dataclass
class WeightedInstance:
    candidates: np.ndarray          # point ids, duplicates allowed
    weights: np.ndarray             # points assigned to each candidate
    exact_pairwise: np.ndarray      # strong distances among candidates
    assignment: np.ndarray          # per point: candidate index

    def cost(self, chosen) -> float:
        d = self.exact_pairwise[:, np.asarray(chosen)]
        return float(np.dot(self.weights, d.min(axis=1) ** 2))


@dataclass
class ClusteringResult:
    centers: np.ndarray
    assignment: np.ndarray
    cost: float
    est_cost: float
    ledger: QueryLedger
    objective: str = "kmeans"
    aborted: bool = False
    meta: dict = field(default_factory=dict)


def nearest_centers(metric: TrueMetric, centers) -> tuple[np.ndarray, np.ndarray]:
    """True distance to, and index of, each point's nearest center (evaluation only)."""
    centers = np.asarray(centers, dtype=np.int64)
    if centers.size == 0:
        raise UsageError("need at least one center")
    best = np.full(metric.n, np.inf)
    arg = np.zeros(metric.n, dtype=np.int64)
    step = max(1, 2_000_000 // max(1, metric.n))
    all_ids = np.arange(metric.n)
    for start in range(0, centers.size, step):
        block = metric.cross(all_ids, centers[start:start + step])
        j = np.argmin(block, axis=1)
        d = block[all_ids, j]
        better = d < best
        best[better] = d[better]
        arg[better] = j[better] + start
    return best, arg


def evaluate_cost(metric: TrueMetric, centers, assignment=None) -> float:
    """Sum of squared true distances; nearest center unless ``assignment`` is
    given. Evaluation only: touches no oracle or ledger."""
    centers = np.asarray(centers, dtype=np.int64)
    if centers.size == 0:
        raise UsageError("need at least one center")
    if assignment is None:
        d, _ = nearest_centers(metric, centers)
    else:
        d = metric.pair_distances(np.arange(metric.n), centers[np.asarray(assignment)])
    return float(np.dot(d, d))


def kmeans_weak_strong(metric: TrueMetric, weak: WeakOracle, strong: StrongOracle,
                       params: KMeansWSParams) -> tuple[WeightedInstance, ClusteringResult]:
    n = metric.n
    m = params.ball_size(n)
    init = params.initial_count(n)
    t = params.iterations(n)
    if n < init:
        raise PreconditionError(f"n={n} is smaller than init_count={init}")
    rng = np.random.default_rng(params.seed)
    initial = rng.permutation(n)[:init]
    if params.strong_cap is not None:
        strong.cap = params.strong_cap

    aborted = False
    try:
        state = CenterState.from_initial(strong, initial, m, capacity=init + t + 1)
    except BudgetExceeded:
        raise PreconditionError("strong-query cap is too small for the initial centers") from None
    for _ in range(t):
        est, _ = state.estimate_all(weak)
        s = sample_index(build_sampling_distribution(est), rng)
        try:
            state.add_center(strong, s)
        except BudgetExceeded:
            aborted = True
            break

    est, arg = state.estimate_all(weak)
    h = state.size
    instance = WeightedInstance(
        candidates=state.centers,
        weights=np.bincount(arg, minlength=h),
        exact_pairwise=state.D[:h, :h].copy(),
        assignment=arg,
    )
    result = ClusteringResult(
        centers=state.centers,
        assignment=arg,
        cost=evaluate_cost(metric, state.centers),
        est_cost=float(np.dot(est, est)),
        ledger=strong.ledger.snapshot(),
        aborted=aborted,
        meta={"ball_size": m, "init_count": init, "t": t, "h": h},
    )
    return instance, result


def expected_strong_queries(init_count: int, t: int) -> int:
    """Strong queries made by :func:`kmeans_weak_strong` when it runs to completion."""
    return init_count * (init_count - 1) // 2 + sum(init_count + i for i in range(t))


def _weighted_kmeanspp(D2: np.ndarray, w: np.ndarray, ids: np.ndarray, k: int, rng) -> list[int]:
    h = D2.shape[0]
    p = w / w.sum() if w.sum() > 0 else np.full(h, 1.0 / h)
    chosen = [sample_index(p, rng)]
    closest = D2[:, chosen[0]].copy()
    while len(chosen) < k:
        mass = w * closest
        if mass.sum() > 0:
            j = sample_index(mass / mass.sum(), rng)
        else:
            used = set(ids[chosen].tolist())
            fresh = [i for i in range(h) if ids[i] not in used and i not in chosen]
            pool = fresh or [i for i in range(h) if i not in chosen]
            j = pool[int(rng.integers(len(pool)))]
        chosen.append(j)
        closest = np.minimum(closest, D2[:, j])
    return chosen


def _local_search(D2: np.ndarray, w: np.ndarray, chosen: list[int],
                  max_passes: int, rel_tol: float) -> tuple[list[int], list[float]]:
    chosen = list(chosen)
    cost = float(np.dot(w, D2[:, chosen].min(axis=1)))
    history = [cost]
    h = D2.shape[0]
    for _ in range(max_passes):
        if cost == 0:
            break
        best = (cost, -1, -1)
        outside = np.setdiff1d(np.arange(h), chosen)
        if outside.size == 0:
            break
        for slot in range(len(chosen)):
            rest = chosen[:slot] + chosen[slot + 1:]
            base = D2[:, rest].min(axis=1) if rest else np.full(h, np.inf)
            costs = w @ np.minimum(base[:, None], D2[:, outside])
            j = int(np.argmin(costs))
            if costs[j] < best[0]:
                best = (float(costs[j]), slot, int(outside[j]))
        if best[1] < 0 or cost - best[0] <= rel_tol * cost:
            break
        chosen[best[1]] = best[2]
        cost = best[0]
        history.append(cost)
    return chosen, history


def solve_weighted(instance: WeightedInstance, k: int, seed: int = 0, *,
                   max_passes: int = 50, rel_tol: float = 1e-9) -> ClusteringResult:
    """Weighted k-means++ over the candidates, then single-swap local search.

    Uses only ``instance.exact_pairwise``, so no oracle is queried. ``cost``
    and ``est_cost`` are the weighted instance cost; callers holding the true
    metric re-evaluate the cost over all points.
    """
    h = instance.candidates.size
    if k > h:
        raise UsageError(f"k={k} exceeds the {h} candidates")
    if k < 1:
        raise UsageError("k must be positive")
    rng = np.random.default_rng(seed)
    D2 = instance.exact_pairwise ** 2
    w = instance.weights.astype(np.float64)
    chosen = _weighted_kmeanspp(D2, w, instance.candidates, k, rng)
    chosen, history = _local_search(D2, w, chosen, max_passes, rel_tol)
    chosen_arr = np.array(chosen)
    # each candidate goes to its nearest chosen candidate, earliest on ties
    cand_to_center = np.argmin(instance.exact_pairwise[:, chosen_arr], axis=1)
    cost = history[-1]
    return ClusteringResult(
        centers=instance.candidates[chosen_arr],
        assignment=cand_to_center[instance.assignment],
        cost=cost,
        est_cost=cost,
        ledger=QueryLedger(),
        meta={"candidate_index": chosen_arr, "history": history},
    )


def kmeans_weak_strong_solve(metric: TrueMetric, weak: WeakOracle, strong: StrongOracle,
                             params: KMeansWSParams) -> tuple[ClusteringResult, ClusteringResult]:
    """Run the oversampling phase and the weighted solve.

    Returns ``(final, bicriteria)``; the final cost is re-evaluated with true
    distances over all points.
    """
    instance, bicrit = kmeans_weak_strong(metric, weak, strong, params)
    final = solve_weighted(instance, min(params.k, instance.candidates.size), seed=params.seed)
    final.meta["weighted_cost"] = final.cost
    final.cost = evaluate_cost(metric, final.centers)
    final.ledger = bicrit.ledger
    final.aborted = bicrit.aborted
    final.meta.update(bicrit.meta)
    return final, bicrit


def kmeans_strong_baseline(metric: TrueMetric, oracle: _Oracle, k: int,
                           oversample_t: Optional[int] = None, seed: int = 0) -> ClusteringResult:
    """D^2 sampling through ``oracle`` for ``oversample_t`` (default ``k``) rounds.

    Every round queries the new center against all ``n`` points, so the
    oracle is charged exactly ``n * rounds`` queries. With the weak oracle
    this is the weak baseline.
    """
    n = metric.n
    rounds = k if oversample_t is None else oversample_t
    if not 1 <= k <= n or rounds < 1:
        raise UsageError(f"need 1 <= k <= n and at least one round (k={k}, n={n})")
    rng = np.random.default_rng(seed)
    everyone = np.arange(n)
    centers = [int(rng.integers(n))]
    closest = oracle.query_many(centers[0], everyone)
    assign = np.zeros(n, dtype=np.int64)
    for r in range(1, rounds):
        s = sample_index(build_sampling_distribution(closest), rng)
        centers.append(s)
        d = oracle.query_many(s, everyone)
        better = d < closest
        closest = np.where(better, d, closest)
        assign[better] = r
    centers_arr = np.array(centers)
    return ClusteringResult(
        centers=centers_arr,
        assignment=assign,
        cost=evaluate_cost(metric, centers_arr),
        est_cost=float(np.dot(closest, closest)),
        ledger=oracle.ledger.snapshot(),
        meta={"rounds": rounds},
    )


def kmeans_row(result: ClusteringResult, *, algo: str, n: int, k: int, delta: float,
               eps: float, c_ball: float, c_iter, seed: int, approx_factor: float) -> dict:
    """Flat record in the published k-means column order."""
    return {
        "algo": algo, "n": n, "k": k, "delta": delta, "eps": eps, "c_ball": c_ball,
        "c_iter": "" if c_iter is None else c_iter, "seed": seed,
        "strong_distinct": result.ledger.strong_distinct,
        "weak_distinct": result.ledger.weak_distinct,
        "true_cost": result.cost, "est_cost": result.est_cost,
        "approx_factor": approx_factor, "aborted": result.aborted,
    }


KMEANS_ROW_FIELDS = ("algo", "n", "k", "delta", "eps", "c_ball", "c_iter", "seed",
                     "strong_distinct", "weak_distinct", "true_cost", "est_cost",
                     "approx_factor", "aborted")


def approx_ratio(cost: float, baseline: float) -> float:
    if baseline > 0:
        return cost / baseline
    return 1.0 if cost == 0 else math.inf
