"""Synthetic instances and the experiment-mode perturbed weak matrix."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigurationError, UsageError
from .metric import Dataset, EuclideanMetric, MatrixMetric, TrueMetric, load_points_csv, write_points_csv

__all__ = [
    "SbmSpec", "HardInstanceSpec", "generate_sbm", "generate_hard_instance",
    "build_experiment_weak_matrix", "load_points_csv", "write_points_csv", "block_sizes",
]


def block_sizes(n: int, k: int) -> np.ndarray:
    """``k`` sizes summing to ``n`` that differ by at most one."""
    sizes = np.full(k, n // k, dtype=np.int64)
    sizes[: n % k] += 1
    return sizes


@dataclass(frozen=True)
class SbmSpec:
    """Gaussian blobs ``N(mu_i, I)`` with ``mu_i = mu_scale * e_i``."""

    n: int
    k_true: int
    dim: Optional[int] = None
    mu_scale: float = 1e5
    seed: int = 0

    def __post_init__(self):
        if self.k_true < 1 or self.n < self.k_true:
            raise UsageError("need 1 <= k_true <= n")
        if self.dim is not None and self.dim < self.k_true:
            raise UsageError("dim must be at least k_true")


def generate_sbm(spec: SbmSpec) -> Dataset:
    dim = spec.dim or spec.k_true
    rng = np.random.default_rng(spec.seed)
    labels = np.repeat(np.arange(spec.k_true), block_sizes(spec.n, spec.k_true))
    means = np.zeros((spec.k_true, dim))
    means[np.arange(spec.k_true), np.arange(spec.k_true)] = spec.mu_scale
    points = means[labels] + rng.standard_normal((spec.n, dim))
    return Dataset(points, labels)


@dataclass(frozen=True)
class HardInstanceSpec:
    """``k_true`` groups; distance 1 inside a group and ``l`` across groups.

    ``l`` defaults to ``c * (n - k_true)``.
    """

    n: int
    k_true: int
    l: Optional[float] = None
    c: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.k_true < 1 or self.n < self.k_true:
            raise UsageError("need 1 <= k_true <= n")
        if self.inter_distance <= 1:
            raise UsageError("the inter-group distance l must exceed 1")

    @property
    def inter_distance(self) -> float:
        return float(self.l) if self.l is not None else self.c * (self.n - self.k_true)


def generate_hard_instance(spec: HardInstanceSpec) -> MatrixMetric:
    rng = np.random.default_rng(spec.seed)
    labels = rng.permutation(np.repeat(np.arange(spec.k_true), block_sizes(spec.n, spec.k_true)))
    same = labels[:, None] == labels[None, :]
    m = np.where(same, 1.0, spec.inter_distance)
    np.fill_diagonal(m, 0.0)
    return MatrixMetric(m, labels)


def _random_pairs(labels: np.ndarray, same: bool, count: int, rng) -> tuple[np.ndarray, np.ndarray]:
    n = labels.size
    got_a, got_b, have = [], [], 0
    for _ in range(1000):
        if have >= count:
            break
        a = rng.integers(n, size=2 * count + 16)
        b = rng.integers(n, size=2 * count + 16)
        keep = (a != b) & ((labels[a] == labels[b]) == same)
        got_a.append(a[keep])
        got_b.append(b[keep])
        have += int(keep.sum())
    if have < count:
        raise ConfigurationError("not enough {} pairs".format("intra-cluster" if same else "inter-cluster"))
    return np.concatenate(got_a)[:count], np.concatenate(got_b)[:count]


def build_experiment_weak_matrix(metric: TrueMetric, delta: float, seed: int = 0) -> np.ndarray:
    """Materialized weak answers with label-swap perturbation.

    One coin per unordered pair: with probability ``delta`` a same-cluster
    entry becomes the true distance of a uniformly random inter-cluster pair,
    and a cross-cluster entry that of a uniformly random intra-cluster pair.
    The result is symmetric with a zero diagonal and needs O(n^2) memory.
    """
    labels = metric.labels
    if labels is None:
        raise ConfigurationError("perturbed matrix needs ground-truth labels")
    if labels.max() < 1:
        raise ConfigurationError("perturbed matrix needs at least two clusters")
    if not 0 <= delta <= 1:
        raise ConfigurationError("delta must lie in [0, 1]")
    n = metric.n
    everyone = np.arange(n)
    out = metric.cross(everyone, everyone)
    rng = np.random.default_rng(seed)
    i, j = np.triu_indices(n, 1)
    hit = rng.random(i.size) < delta
    i, j = i[hit], j[hit]
    same = labels[i] == labels[j]
    vals = np.empty(i.size)
    for flag in (True, False):
        sel = same == flag
        count = int(sel.sum())
        if count:
            # same-cluster entries draw from the inter-cluster pool and vice versa
            a, b = _random_pairs(labels, not flag, count, rng)
            vals[sel] = metric.pair_distances(a, b)
    out[i, j] = vals
    out[j, i] = vals
    return out


def sbm_metric(spec: SbmSpec) -> EuclideanMetric:
    return EuclideanMetric(generate_sbm(spec))
