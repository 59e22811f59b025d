"""Exhaustive solvers for tiny instances, used as test oracles.

Centers are restricted to input points for every objective.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import UsageError
from .metric import TrueMetric

OBJECTIVES = ("kmeans", "kcenter", "kmedian")
MAX_SUBSETS = math.comb(16, 4)


@dataclass(frozen=True)
class ExactSolution:
    centers: tuple
    cost: float
    objective: str


def _cost(dist_to_centers: np.ndarray, objective: str) -> float:
    nearest = dist_to_centers.min(axis=1)
    if objective == "kmeans":
        return float(np.sum(nearest ** 2))
    if objective == "kmedian":
        return float(np.sum(nearest))
    return float(nearest.max())


def exact_solve(metric: TrueMetric, k: int, objective: str) -> ExactSolution:
    """Best ``k``-subset of points by full enumeration.

    Guarded to at most C(16, 4) subsets and n <= 16. Ties keep the
    lexicographically first subset.
    """
    if objective not in OBJECTIVES:
        raise UsageError(f"unknown objective {objective!r}")
    n = metric.n
    if not 1 <= k <= n:
        raise UsageError(f"need 1 <= k <= n (k={k}, n={n})")
    if n > 16 or math.comb(n, k) > MAX_SUBSETS:
        raise UsageError(f"enumeration guard: n={n}, k={k} is too large")
    ids = np.arange(n)
    D = metric.cross(ids, ids)
    best_cost, best = math.inf, None
    for subset in itertools.combinations(range(n), k):
        c = _cost(D[:, subset], objective)
        if c < best_cost:
            best_cost, best = c, subset
    return ExactSolution(tuple(int(i) for i in best), best_cost, objective)
