"""Metered strong and weak distance oracles.

A run creates one :class:`QueryLedger` and a strong/weak handle pair that
share it (see :func:`make_oracles`). Weak answers are persistent: whether a
pair is corrupted, and the value it is corrupted to, are pure functions of
``(seed, min(a, b), max(a, b))``.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import BudgetExceeded, ConfigurationError
from .metric import TrueMetric, distance_range

LEDGER_FIELDS = ("strong_raw", "strong_distinct", "weak_raw", "weak_distinct")
CORRUPTION_MODES = ("uniform-range", "label-swap")
POOL_SIZE = 4096


@dataclass
class QueryLedger:
    strong_raw: int = 0
    strong_distinct: int = 0
    weak_raw: int = 0
    weak_distinct: int = 0

    def snapshot(self) -> "QueryLedger":
        return QueryLedger(**asdict(self))

    def as_row(self) -> dict:
        return {name: getattr(self, name) for name in LEDGER_FIELDS}

    def to_csv(self) -> str:
        return ",".join(LEDGER_FIELDS) + "\n" + ",".join(str(getattr(self, f)) for f in LEDGER_FIELDS)


@dataclass(frozen=True)
class WeakOracleConfig:
    """Corruption settings for a weak oracle.

    The algorithms' guarantees need ``delta < 1/2``; values up to 1 are
    accepted here so the corruption path itself can be exercised.
    """

    delta: float = 0.0
    corruption: str = "uniform-range"
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.delta <= 1.0:
            raise ConfigurationError(f"delta must lie in [0, 1], got {self.delta}")
        if self.corruption not in CORRUPTION_MODES:
            raise ConfigurationError(f"unknown corruption mode {self.corruption!r}")


# --- keyed hashing ----------------------------------------------------------

_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _mix(x: np.ndarray) -> np.ndarray:
    x = x + _GOLDEN
    x = (x ^ (x >> np.uint64(30))) * _M1
    x = (x ^ (x >> np.uint64(27))) * _M2
    return x ^ (x >> np.uint64(31))


def pair_uniform(seed: int, a, b, stream: int) -> np.ndarray:
    """Uniform [0, 1) values keyed on ``(seed, stream, unordered pair)``."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    lo = np.minimum(a, b).astype(np.uint64)
    hi = np.maximum(a, b).astype(np.uint64)
    base = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    with np.errstate(over="ignore"):
        h = _mix(np.full(lo.shape, base, dtype=np.uint64) ^ (np.uint64(stream) * _M2))
        h = _mix(h ^ lo)
        h = _mix(h ^ (hi * _GOLDEN))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def _sample_pool(metric: TrueMetric, rng, same_label: bool, size: int) -> np.ndarray:
    """Distances of ``size`` uniformly random distinct pairs that share
    (or do not share) a label, by rejection."""
    labels = metric.labels
    got: list[np.ndarray] = []
    have = 0
    for _ in range(200):
        a = rng.integers(metric.n, size=4 * size)
        b = rng.integers(metric.n, size=4 * size)
        keep = (a != b) & ((labels[a] == labels[b]) == same_label)
        if keep.any():
            got.append(metric.pair_distances(a[keep], b[keep]))
            have += int(keep.sum())
        if have >= size:
            return np.concatenate(got)[:size]
    kind = "intra" if same_label else "inter"
    raise ConfigurationError(f"could not find {kind}-cluster pairs for label-swap corruption")


class Corruption:
    """The value a corrupted pair reports, deterministic in (seed, pair).

    uniform-range: uniform on [min nonzero distance, max distance].
    label-swap: a same-label pair reports a random inter-cluster distance, a
    cross-label pair a random intra-cluster distance. Both pools are fixed
    seeded samples of ``POOL_SIZE`` true pair distances.
    """

    def __init__(self, config: WeakOracleConfig, metric: TrueMetric):
        self.config = config
        self.metric = metric
        rng = np.random.default_rng([config.seed, 0xC0])
        if config.corruption == "label-swap":
            if metric.labels is None:
                raise ConfigurationError("label-swap corruption needs ground-truth labels")
            if metric.labels.max() < 1:
                raise ConfigurationError("label-swap corruption needs at least two clusters")
            self.inter_pool = _sample_pool(metric, rng, False, POOL_SIZE)
            self.intra_pool = _sample_pool(metric, rng, True, POOL_SIZE)
        else:
            r = distance_range(metric, seed=config.seed)
            self.low, self.high = r.min_nonzero, r.max

    def values(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        u = pair_uniform(self.config.seed, a, b, stream=2)
        if self.config.corruption == "uniform-range":
            return self.low + u * (self.high - self.low)
        same = self.metric.labels[a] == self.metric.labels[b]
        out = np.empty(a.shape)
        idx = np.minimum((u * POOL_SIZE).astype(np.int64), POOL_SIZE - 1)
        out[same] = self.inter_pool[idx[same]]
        out[~same] = self.intra_pool[idx[~same]]
        return out


def corrupted_value(config: WeakOracleConfig, metric: TrueMetric, a: int, b: int) -> float:
    """What pair ``(a, b)`` reports if its corruption coin comes up."""
    a_, b_ = metric.check_ids([a, b])
    return float(Corruption(config, metric).values(a_[None], b_[None])[0])


# --- handles ------------------------------------------------------------------

DENSE_SEEN_LIMIT = 8192


class _PairSet:
    """Distinct unordered pairs seen so far. Dense byte map for moderate n,
    a Python set of packed keys beyond that."""

    def __init__(self, n: int):
        self.n = n
        self.dense = np.zeros(n * n, dtype=bool) if n <= DENSE_SEEN_LIMIT else None
        self._set: set[int] = set()

    def add(self, a: np.ndarray, b: np.ndarray) -> int:
        """Record pairs; return how many were new."""
        keys = np.minimum(a, b) * self.n + np.maximum(a, b)
        if self.dense is None:
            before = len(self._set)
            self._set.update(keys.tolist())
            return len(self._set) - before
        fresh = np.unique(keys[~self.dense[keys]])
        self.dense[fresh] = True
        return int(fresh.size)


class _Oracle:
    kind = ""

    def __init__(self, metric: TrueMetric, ledger: QueryLedger):
        self.metric = metric
        self.ledger = ledger
        self._seen = _PairSet(metric.n)

    @property
    def n(self) -> int:
        return self.metric.n

    def _answer(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _answer_block(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _count(self, a: np.ndarray, b: np.ndarray) -> None:
        new = self._seen.add(a, b)
        raw, distinct = f"{self.kind}_raw", f"{self.kind}_distinct"
        setattr(self.ledger, raw, getattr(self.ledger, raw) + a.size)
        setattr(self.ledger, distinct, getattr(self.ledger, distinct) + new)

    def _before_answer(self, count: int) -> None:
        pass

    def query_pairs(self, a, b) -> np.ndarray:
        """Answer ``(a[i], b[i])`` for every i; one query each."""
        a = self.metric.check_ids(a)
        b = self.metric.check_ids(b)
        a, b = np.broadcast_arrays(a, b)
        shape = a.shape
        a, b = a.ravel(), b.ravel()
        self._before_answer(a.size)
        out = self._answer(a, b)
        self._count(a, b)
        return out.reshape(shape)

    def query(self, a: int, b: int) -> float:
        return float(self.query_pairs(np.array([a]), np.array([b]))[0])

    def query_many(self, a: int, others) -> np.ndarray:
        """Distances from ``a`` to each id in ``others``."""
        others = np.asarray(others)
        return self.query_pairs(np.full(others.shape, a, dtype=np.int64), others)

    def cross(self, rows, cols) -> np.ndarray:
        """Answers for every (row, col) combination; ``len(rows) * len(cols)`` queries."""
        rows = self.metric.check_ids(rows).ravel()
        cols = self.metric.check_ids(cols).ravel()
        self._before_answer(rows.size * cols.size)
        out = self._answer_block(rows, cols)
        a, b = np.broadcast_arrays(rows[:, None], cols[None, :])
        self._count(a.ravel(), b.ravel())
        return out

    def pairwise(self, ids) -> np.ndarray:
        """Symmetric matrix over ``ids``; queries only the C(m, 2) pairs above the diagonal."""
        ids = self.metric.check_ids(ids).ravel()
        m = ids.size
        if m < 2:
            return np.zeros((m, m))
        self._before_answer(m * (m - 1) // 2)
        out = self._answer_block(ids, ids)
        i, j = np.triu_indices(m, 1)
        self._count(ids[i], ids[j])
        out = np.triu(out, 1)
        return out + out.T


class StrongOracle(_Oracle):
    """Exact distances. ``cap`` bounds ``strong_raw``; a query batch that
    would exceed it raises :class:`BudgetExceeded` without being answered."""

    kind = "strong"

    def __init__(self, metric: TrueMetric, ledger: QueryLedger, cap: Optional[int] = None):
        super().__init__(metric, ledger)
        self.cap = cap

    def _before_answer(self, count):
        if self.cap is not None and self.ledger.strong_raw + count > self.cap:
            raise BudgetExceeded(f"strong-query cap {self.cap} reached")

    def _answer(self, a, b):
        return self.metric.pair_distances(a, b)

    def _answer_block(self, rows, cols):
        return self.metric.cross(rows, cols)


class WeakOracle(_Oracle):
    """Exact with probability ``1 - delta`` per unordered pair, else the
    pair's corrupted value. A point queried against itself always gets 0.

    When ``matrix`` is given it is used as a precomputed answer table instead
    (see :func:`wsclust.datasets.build_experiment_weak_matrix`).
    """

    kind = "weak"

    def __init__(self, metric: TrueMetric, config: WeakOracleConfig, ledger: QueryLedger,
                 matrix: Optional[np.ndarray] = None):
        super().__init__(metric, ledger)
        self.config = config
        self.matrix = None
        self._corruption = None
        if matrix is not None:
            matrix = np.asarray(matrix, dtype=np.float64)
            if matrix.shape != (metric.n, metric.n):
                raise ConfigurationError("weak answer matrix has the wrong shape")
            if not np.array_equal(matrix, matrix.T):
                raise ConfigurationError("weak answer matrix must be symmetric")
            self.matrix = matrix
        elif config.delta > 0:
            self._corruption = Corruption(config, metric)

    def corrupted_mask(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        return (pair_uniform(self.config.seed, a, b, stream=1) < self.config.delta) & (a != b)

    def _answer(self, a, b):
        if self.matrix is not None:
            return self.matrix[a, b]
        out = self.metric.pair_distances(a, b)
        if self._corruption is not None:
            bad = self.corrupted_mask(a, b)
            if bad.any():
                out[bad] = self._corruption.values(a[bad], b[bad])
        return out

    def _answer_block(self, rows, cols):
        if self.matrix is not None:
            return self.matrix[np.ix_(rows, cols)]
        out = self.metric.cross(rows, cols)
        if self._corruption is not None:
            a, b = np.broadcast_arrays(rows[:, None], cols[None, :])
            bad = self.corrupted_mask(a, b)
            if bad.any():
                out[bad] = self._corruption.values(a[bad], b[bad])
        return out


@dataclass
class OraclePair:
    strong: StrongOracle
    weak: WeakOracle
    ledger: QueryLedger = field(repr=False)


def make_oracles(metric: TrueMetric, config: Optional[WeakOracleConfig] = None, *,
                 strong_cap: Optional[int] = None, weak_matrix=None) -> OraclePair:
    """Fresh strong/weak handles sharing a new ledger."""
    ledger = QueryLedger()
    config = config or WeakOracleConfig()
    return OraclePair(StrongOracle(metric, ledger, strong_cap),
                      WeakOracle(metric, config, ledger, weak_matrix), ledger)

