"""Median-over-ball distance estimates from weak-oracle answers.

The distance from ``x`` to a center ``c`` is estimated as the lower median of
the weak answers between ``x`` and the members of a ball around ``c``. The
distance to a center *set* adds each center's ball radius before taking the
minimum, which makes it an upper bound on the true distance whenever every
median lands within its radius.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PreconditionError, UsageError
from .oracles import StrongOracle, WeakOracle

BALL_CONSTANT = 180


def log_n(n: int, base: float = 2.0) -> float:
    if n <= 1:
        return 0.0
    return math.log(n) if base == math.e else math.log(n, base)


@dataclass(frozen=True)
class EstimatorParams:
    c_ball: float = 0.05
    log_base: float = 2.0

    def ball_size(self, n: int) -> int:
        return ball_size_for(n, self.c_ball, self.log_base)


def ball_size_for(n: int, c_ball: float, log_base: float = 2.0) -> int:
    """``max(3, round(c_ball * 180 * log n))``, never more than ``n``."""
    if c_ball <= 0:
        raise UsageError("c_ball must be positive")
    return min(n, max(3, round(c_ball * BALL_CONSTANT * log_n(n, log_base))))


@dataclass(frozen=True)
class BallSpec:
    center: int
    radius: float
    members: np.ndarray


def lower_median(values: np.ndarray, axis: int = -1) -> np.ndarray:
    """Element of rank ``(m - 1) // 2`` along ``axis`` (the lower median)."""
    values = np.asarray(values, dtype=np.float64)
    m = values.shape[axis]
    if m == 0:
        raise UsageError("median of an empty set")
    k = (m - 1) // 2
    return np.take(np.partition(values, k, axis=axis), k, axis=axis)


def point_to_point_estimate(weak: WeakOracle, x: int, ball: BallSpec) -> float:
    members = np.asarray(ball.members, dtype=np.int64)
    if members.size == 0:
        raise UsageError("ball has no members")
    return float(lower_median(weak.query_many(x, members)))


def build_sampling_distribution(estimates) -> np.ndarray:
    """Probabilities proportional to squared estimates; uniform if all are zero."""
    est = np.asarray(estimates, dtype=np.float64)
    if est.ndim != 1 or est.size == 0:
        raise UsageError("estimates must be a non-empty vector")
    if np.any(~np.isfinite(est)) or np.any(est < 0):
        raise UsageError("estimates must be finite and non-negative")
    with np.errstate(over="ignore"):
        sq = est * est
        total = sq.sum()
    if total == 0 or not np.isfinite(total):
        # rescale before giving up on huge values
        scaled = est / est.max() if est.max() > 0 else est
        sq = scaled * scaled
        total = sq.sum()
        if total == 0:
            return np.full(est.size, 1.0 / est.size)
    return sq / total


def sample_index(p: np.ndarray, rng: np.random.Generator) -> int:
    cdf = np.cumsum(p)
    return int(min(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"), p.size - 1))


class CenterState:
    """Growing multiset of centers with their ball radii and cached estimates.

    ``D`` holds strong-oracle distances between centers (by insertion index).
    A center's ball is its ``ball_size`` nearest centers, itself included,
    ties broken by insertion order; ``radii[j]`` is the distance to the
    farthest of them. ``est[x, j]`` caches the median estimate from point
    ``x`` to center ``j`` and is invalidated whenever ball ``j`` changes.
    Weak answers against ball members are cached per member point.
    """

    def __init__(self, n: int, ball_size: int, capacity: int = 64):
        if ball_size < 1:
            raise UsageError("ball_size must be positive")
        self.n = n
        self.ball_size = ball_size
        self.size = 0
        cap = max(capacity, 1)
        self.ids = np.empty(cap, dtype=np.int64)
        self.D = np.zeros((cap, cap))
        self.radii = np.zeros(cap)
        self.members: list[np.ndarray] = []
        self.est = np.zeros((n, cap))
        self.valid = np.zeros((n, cap), dtype=bool)
        self.weak_columns: dict[int, np.ndarray] = {}

    @classmethod
    def from_initial(cls, strong: StrongOracle, centers: Sequence[int], ball_size: int,
                     capacity: int = 64) -> "CenterState":
        """Seed with ``centers``, strong-querying every pair among them."""
        centers = np.asarray(centers, dtype=np.int64)
        state = cls(strong.n, ball_size, max(capacity, 2 * centers.size))
        h = centers.size
        state.ids[:h] = centers
        state.D[:h, :h] = strong.pairwise(centers)
        state.size = h
        state.members = [np.empty(0, dtype=np.int64)] * h
        for j in range(h):
            state._rebuild_ball(j)
        return state

    @property
    def centers(self) -> np.ndarray:
        return self.ids[:self.size].copy()

    def ball(self, j: int) -> BallSpec:
        return BallSpec(int(self.ids[j]), float(self.radii[j]), self.ids[self.members[j]].copy())

    def _grow(self) -> None:
        old = self.ids.size
        new = 2 * old
        self.ids = np.resize(self.ids, new)
        D = np.zeros((new, new))
        D[:old, :old] = self.D
        self.D = D
        self.radii = np.resize(self.radii, new)
        est = np.zeros((self.n, new))
        est[:, :old] = self.est
        self.est = est
        valid = np.zeros((self.n, new), dtype=bool)
        valid[:, :old] = self.valid
        self.valid = valid

    def _rebuild_ball(self, j: int) -> None:
        row = self.D[j, :self.size]
        m = min(self.ball_size, self.size)
        order = np.argsort(row, kind="stable")[:m]
        self.members[j] = order
        self.radii[j] = row[order[-1]]
        self.valid[:, j] = False

    def add_center(self, strong: StrongOracle, point: int) -> None:
        h = self.size
        dists = strong.query_many(point, self.ids[:h]) if h else np.empty(0)
        if h == self.ids.size:
            self._grow()
        self.ids[h] = point
        self.D[h, :h] = dists
        self.D[:h, h] = dists
        self.D[h, h] = 0.0
        self.size = h + 1
        self.members.append(np.empty(0, dtype=np.int64))
        # stable order puts the newcomer last among ties, so it only enters
        # balls whose radius it strictly beats
        for j in np.flatnonzero(dists < self.radii[:h]):
            self._rebuild_ball(int(j))
        if h < self.ball_size:
            for j in range(h):
                self._rebuild_ball(j)
        self._rebuild_ball(h)

    def _column(self, weak: WeakOracle, point: int) -> np.ndarray:
        col = self.weak_columns.get(point)
        if col is None:
            col = weak.query_many(point, np.arange(self.n))
            self.weak_columns[point] = col
        return col

    def _require_ready(self) -> None:
        if self.size < self.ball_size:
            raise PreconditionError(
                f"need at least ball_size={self.ball_size} centers, have {self.size}")

    def estimate_all(self, weak: WeakOracle) -> tuple[np.ndarray, np.ndarray]:
        """Estimated distance from every point to the center set, and the
        index of the earliest center attaining it."""
        self._require_ready()
        h = self.size
        for j in np.flatnonzero(~self.valid[:, :h].all(axis=0)):
            rows = ~self.valid[:, j]
            pts = self.ids[self.members[j]]
            W = np.stack([self._column(weak, int(p)) for p in pts], axis=1)
            self.est[rows, j] = lower_median(W[rows], axis=1)
            self.valid[:, j] = True
        total = self.est[:, :h] + self.radii[:h]
        arg = np.argmin(total, axis=1)
        return total[np.arange(self.n), arg], arg

    def estimate_point(self, weak: WeakOracle, x: int) -> tuple[float, int]:
        self._require_ready()
        h = self.size
        for j in np.flatnonzero(~self.valid[x, :h]):
            pts = self.ids[self.members[j]]
            if all(int(p) in self.weak_columns for p in pts):
                answers = np.array([self.weak_columns[int(p)][x] for p in pts])
            else:
                answers = weak.query_many(x, pts)
            self.est[x, j] = lower_median(answers)
            self.valid[x, j] = True
        total = self.est[x, :h] + self.radii[:h]
        j = int(np.argmin(total))
        return float(total[j]), j


def point_to_set_estimate(weak: WeakOracle, x: int, state: CenterState) -> tuple[float, int]:
    """``min_c (median estimate to c + r_c)`` and the point id of the earliest
    center attaining it."""
    value, j = state.estimate_point(weak, x)
    return value, int(state.ids[j])


def refresh_balls(state: CenterState, strong: StrongOracle, new_center: int) -> CenterState:
    """Append ``new_center`` (duplicates allowed) after strong-querying it
    against every current center, and update the affected balls."""
    state.add_center(strong, new_center)
    return state
