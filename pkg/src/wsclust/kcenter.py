"""k-center by ball carving with weak and strong oracles.

:func:`carve_once` runs weak-greedy ball carving at a fixed radius;
:func:`kcenter_weak_strong` searches a geometric radius grid for the
smallest radius at which carving completes. :func:`greedy_carve_exact` and
:func:`gonzalez_baseline` are the exact-distance references.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import NoFeasibleRadius, UsageError
from .estimator import BALL_CONSTANT, log_n, lower_median
from .kmeans import ClusteringResult
from .metric import TrueMetric
from .oracles import QueryLedger, StrongOracle, WeakOracle, _Oracle

COMPLETED = "completed"
ABORT_TOO_MANY = "abort_too_many_centers"
ABORT_SPARSE = "abort_sparse_ball"
ABORT_SMALLSET = "abort_smallset_infeasible"


@dataclass(frozen=True)
class KCenterWSParams:
    k: int
    epsilon: float = 0.1
    c_sample: float = 0.05
    c_ball: float = 0.05
    seed: int = 0
    search_mode: str = "binary"
    log_base: float = 2.0
    sample_size_override: Optional[int] = None
    ball_threshold_override: Optional[int] = None

    def __post_init__(self):
        if self.k < 1:
            raise UsageError("k must be positive")
        if self.epsilon <= 0:
            raise UsageError("epsilon must be positive")
        if self.search_mode not in ("binary", "linear"):
            raise UsageError(f"unknown search mode {self.search_mode!r}")

    def sample_size(self, n: int) -> int:
        if self.sample_size_override is not None:
            return max(self.k + 1, self.sample_size_override)
        return max(self.k + 1, round(self.c_sample * BALL_CONSTANT * self.k * log_n(n, self.log_base)))

    def ball_threshold(self, n: int) -> int:
        if self.ball_threshold_override is not None:
            m = self.ball_threshold_override
        else:
            m = max(3, round(self.c_ball * BALL_CONSTANT * log_n(n, self.log_base)))
        if m > self.sample_size(n):
            raise UsageError(f"ball threshold {m} exceeds sample size {self.sample_size(n)}")
        return m


@dataclass
class CarveOutcome:
    status: str
    rad: float
    centers: list = field(default_factory=list)
    companions: list = field(default_factory=list)   # member ids, or None for exact-path centers
    assignment: Optional[np.ndarray] = None         # center index per point, -1 if unassigned
    est_dist: Optional[np.ndarray] = None           # estimated (or exact) distance to own center
    ledger: Optional[QueryLedger] = None
    iteration_strong: list = field(default_factory=list)

    @property
    def completed(self) -> bool:
        return self.status == COMPLETED


def _greedy_cover(strong: StrongOracle, order: np.ndarray, rad: float, budget: int):
    """Exact 2*rad carving over ``order`` (pick order); ``None`` if more than
    ``budget`` centers would be needed."""
    left = list(order)
    centers, members, dists = [], [], []
    while left:
        if len(centers) == budget:
            return None
        c = left[0]
        rest = np.array(left[1:], dtype=np.int64)
        d = strong.query_many(c, rest) if rest.size else np.empty(0)
        take = d <= 2 * rad
        centers.append(int(c))
        members.append(np.concatenate([[c], rest[take]]))
        dists.append(np.concatenate([[0.0], d[take]]))
        left = rest[~take].tolist()
    return centers, members, dists


def _rad_rng(seed: int, rad: float) -> np.random.Generator:
    bits = struct.unpack("<Q", struct.pack("<d", float(rad)))[0]
    return np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, bits])


def carve_once(metric: TrueMetric, weak: WeakOracle, strong: StrongOracle,
               params: KCenterWSParams, rad: float) -> CarveOutcome:
    """Weak-greedy ball carving at radius ``rad``.

    Randomness is keyed on ``(params.seed, rad)``, so repeating a radius
    repeats the outcome. The picked center is always assigned to itself.
    """
    if not rad > 0:
        raise UsageError("rad must be positive")
    n = metric.n
    k = params.k
    s_size = params.sample_size(n)
    m = params.ball_threshold(n)
    rng = _rad_rng(params.seed, rad)

    out = CarveOutcome(status=COMPLETED, rad=rad,
                       assignment=np.full(n, -1, dtype=np.int64), est_dist=np.full(n, np.nan))
    remaining = np.ones(n, dtype=bool)
    while remaining.any():
        if len(out.centers) == k:
            out.status = ABORT_TOO_MANY
            break
        S = np.flatnonzero(remaining)
        before = strong.ledger.strong_raw
        if S.size <= s_size:
            cover = _greedy_cover(strong, rng.permutation(S), rad, k - len(out.centers))
            out.iteration_strong.append(strong.ledger.strong_raw - before)
            if cover is None:
                out.status = ABORT_SMALLSET
                break
            for c, members, d in zip(*cover):
                out.assignment[members] = len(out.centers)
                out.est_dist[members] = d
                out.centers.append(c)
                out.companions.append(None)
            remaining[:] = False
            break

        T = np.sort(rng.choice(S, size=s_size, replace=False))
        DT = strong.pairwise(T)
        out.iteration_strong.append(strong.ledger.strong_raw - before)
        counts = (DT <= 2 * rad).sum(axis=1)
        ci = int(np.argmax(counts))           # first maximum = smallest id
        if counts[ci] < m:
            out.status = ABORT_SPARSE
            break
        near = np.lexsort((T, DT[ci]))[:m]     # keep the m nearest, ids break ties
        members = T[near]
        c = int(T[ci])

        est = lower_median(weak.cross(S, members), axis=1)
        take = est <= 4 * rad
        take[np.searchsorted(S, c)] = True
        carved = S[take]
        out.assignment[carved] = len(out.centers)
        out.est_dist[carved] = est[take]
        out.est_dist[c] = 0.0
        remaining[carved] = False
        out.centers.append(c)
        out.companions.append(members)

    out.ledger = strong.ledger.snapshot()
    return out


def greedy_carve_exact(metric: TrueMetric, strong: StrongOracle, k: int, rad: float,
                       seed: int = 0) -> CarveOutcome:
    """Exact-distance greedy ball carving; centers are picked in a seeded order."""
    if not rad > 0:
        raise UsageError("rad must be positive")
    n = metric.n
    order = np.random.default_rng(seed).permutation(n)
    before = strong.ledger.strong_raw
    cover = _greedy_cover(strong, order, rad, k)
    out = CarveOutcome(status=COMPLETED, rad=rad,
                       assignment=np.full(n, -1, dtype=np.int64), est_dist=np.full(n, np.nan))
    out.iteration_strong.append(strong.ledger.strong_raw - before)
    if cover is None:
        out.status = ABORT_TOO_MANY
    else:
        for c, members, d in zip(*cover):
            out.assignment[members] = len(out.centers)
            out.est_dist[members] = d
            out.centers.append(c)
            out.companions.append(None)
    out.ledger = strong.ledger.snapshot()
    return out


def radius_grid(lo: float, hi: float, epsilon: float) -> np.ndarray:
    """``lo * (1 + eps)^i`` for i = 0.. until the last value reaches ``hi``."""
    if not 0 < lo <= hi:
        raise UsageError("need 0 < lo <= hi")
    steps = math.ceil(math.log(hi / lo) / math.log1p(epsilon) - 1e-12) if hi > lo else 0
    return lo * (1 + epsilon) ** np.arange(steps + 1)


def grid_bounds(strong: StrongOracle, n: int, sample: int, seed: int) -> tuple[float, float]:
    """Smallest nonzero and largest strong distance over a seeded sample."""
    rng = np.random.default_rng([seed & 0xFFFFFFFFFFFFFFFF, 0x6D])
    ids = np.sort(rng.choice(n, size=min(n, sample), replace=False))
    D = strong.pairwise(ids)
    positive = D[D > 0]
    if positive.size == 0:
        return 0.0, 0.0
    return float(positive.min()), float(D.max())


def completion_profile(metric, weak, strong, params: KCenterWSParams, grid) -> list[bool]:
    """Whether carving completes at each grid radius."""
    return [carve_once(metric, weak, strong, params, float(r)).completed for r in grid]


def is_monotone(profile) -> bool:
    seen_true = False
    for ok in profile:
        if seen_true and not ok:
            return False
        seen_true = seen_true or ok
    return True


def assignment_radius(metric: TrueMetric, centers, assignment) -> float:
    """Largest true distance from a point to its assigned center (evaluation only)."""
    centers = np.asarray(centers, dtype=np.int64)
    assignment = np.asarray(assignment)
    if np.any(assignment < 0):
        return math.inf
    d = metric.pair_distances(np.arange(metric.n), centers[assignment])
    return float(d.max())


def kcenter_weak_strong(metric: TrueMetric, weak: WeakOracle, strong: StrongOracle,
                        params: KCenterWSParams) -> ClusteringResult:
    n = metric.n
    s_size = params.sample_size(n)
    lo, hi = grid_bounds(strong, n, 2 * s_size, params.seed)
    if hi == 0:
        # every sampled pair coincides; one center at the smallest sampled radius is the best guess
        lo = hi = 1.0
    grid = radius_grid(lo, hi, params.epsilon)
    outcomes: dict[int, CarveOutcome] = {}

    def attempt(i: int) -> CarveOutcome:
        if i not in outcomes:
            outcomes[i] = carve_once(metric, weak, strong, params, float(grid[i]))
        return outcomes[i]

    if params.search_mode == "binary":
        a, b = 0, grid.size - 1
        while a < b:
            mid = (a + b) // 2
            if attempt(mid).completed:
                b = mid
            else:
                a = mid + 1
        found = a
    else:
        found = next((i for i in range(grid.size) if attempt(i).completed), grid.size - 1)

    outcome = attempt(found)
    if not outcome.completed:
        raise NoFeasibleRadius("no feasible radius on the search grid", outcome)
    centers = np.array(outcome.centers, dtype=np.int64)
    return ClusteringResult(
        centers=centers,
        assignment=outcome.assignment,
        cost=assignment_radius(metric, centers, outcome.assignment),
        est_cost=float(np.nanmax(outcome.est_dist)),
        ledger=strong.ledger.snapshot(),
        objective="kcenter",
        meta={"found_rad": float(grid[found]), "status": outcome.status, "grid_size": int(grid.size),
              "carve_calls": len(outcomes), "sample_size": s_size,
              "ball_threshold": params.ball_threshold(n), "grid_lo": lo, "grid_hi": hi},
    )


def gonzalez_baseline(metric: TrueMetric, oracle: _Oracle, k: int, seed: int = 0,
                      first: Optional[int] = None) -> ClusteringResult:
    """Farthest-point traversal through ``oracle``: exactly ``n * k`` queries.

    With the strong oracle this is the classical 2-approximation; with the
    weak oracle it is the weak baseline. ``cost`` is the true radius of the
    oracle-driven assignment.
    """
    n = metric.n
    if not 1 <= k <= n:
        raise UsageError(f"need 1 <= k <= n (k={k}, n={n})")
    everyone = np.arange(n)
    c = int(np.random.default_rng(seed).integers(n)) if first is None else int(first)
    centers = [c]
    closest = oracle.query_many(c, everyone)
    assign = np.zeros(n, dtype=np.int64)
    for r in range(1, k):
        c = int(np.argmax(closest))
        centers.append(c)
        d = oracle.query_many(c, everyone)
        better = d < closest
        closest = np.where(better, d, closest)
        assign[better] = r
    centers_arr = np.array(centers)
    return ClusteringResult(
        centers=centers_arr,
        assignment=assign,
        cost=assignment_radius(metric, centers_arr, assign),
        est_cost=float(closest.max()),
        ledger=oracle.ledger.snapshot(),
        objective="kcenter",
    )


KCENTER_ROW_FIELDS = ("algo", "n", "k", "delta", "eps", "c_sample", "c_ball", "seed",
                      "search_mode", "found_rad", "strong_distinct", "weak_distinct",
                      "true_radius", "approx_factor", "status")


def kcenter_row(result: ClusteringResult, *, algo: str, n: int, k: int, delta: float, eps: float,
                c_sample: float, c_ball: float, seed: int, search_mode: str,
                approx_factor: float) -> dict:
    """Flat record in the published k-center column order."""
    return {
        "algo": algo, "n": n, "k": k, "delta": delta, "eps": eps, "c_sample": c_sample,
        "c_ball": c_ball, "seed": seed, "search_mode": search_mode,
        "found_rad": result.meta.get("found_rad", ""),
        "strong_distinct": result.ledger.strong_distinct,
        "weak_distinct": result.ledger.weak_distinct,
        "true_radius": result.cost, "approx_factor": approx_factor,
        "status": result.meta.get("status", COMPLETED),
    }
