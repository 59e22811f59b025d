"""Ground-truth point storage and exact geometry.

Algorithms never touch these objects directly; they see distances only
through the oracle handles in :mod:`wsclust.oracles`. Evaluation code
(true costs, brute-force optima) is the one exception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional

import numpy as np

from .errors import DegenerateMetricError, ParseError, UsageError

EXACT_RANGE_LIMIT = 4096
TRIANGLE_CHECK_LIMIT = 64
_CHUNK_ELEMS = 4_000_000


def _check_labels(labels, n):
    labels = np.asarray(labels)
    if labels.shape != (n,):
        raise UsageError(f"expected {n} labels, got shape {labels.shape}")
    if labels.size and not np.issubdtype(labels.dtype, np.integer):
        if not np.all(np.equal(np.mod(labels, 1), 0)):
            raise UsageError("labels must be integers")
    labels = labels.astype(np.int64)
    if labels.size:
        present = np.unique(labels)
        if present[0] != 0 or present[-1] != len(present) - 1:
            raise UsageError("labels must form a contiguous range 0..k-1")
    return labels


@dataclass(frozen=True)
class Dataset:
    """Points in R^dim with optional ground-truth cluster labels."""

    points: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise UsageError("points must be a non-empty (n, dim) array")
        if not np.all(np.isfinite(pts)):
            raise UsageError("all coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            labels = _check_labels(self.labels, pts.shape[0])
            labels.setflags(write=False)
            object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def k_true(self) -> Optional[int]:
        if self.labels is None:
            return None
        return int(self.labels.max()) + 1


class TrueMetric:
    """Exact distances over point ids ``0..n-1``.

    Subclasses implement :meth:`_pairs`; everything else is shared.
    """

    n: int
    labels: Optional[np.ndarray]

    def check_ids(self, ids) -> np.ndarray:
        ids = np.asarray(ids)
        if ids.size and not np.issubdtype(ids.dtype, np.integer):
            raise UsageError("point ids must be integers")
        ids = ids.astype(np.int64, copy=False)
        if ids.size and (ids.min() < 0 or ids.max() >= self.n):
            raise UsageError(f"point id out of range [0, {self.n})")
        return ids

    def _pairs(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def distance(self, a: int, b: int) -> float:
        a_, b_ = self.check_ids([a, b])
        return float(self._pairs(a_[None], b_[None])[0])

    def pair_distances(self, a, b) -> np.ndarray:
        """Elementwise distances ``d(a[i], b[i])``."""
        a = self.check_ids(a)
        b = self.check_ids(b)
        a, b = np.broadcast_arrays(a, b)
        return self._pairs(a.ravel(), b.ravel()).reshape(a.shape)

    def cross(self, a, b) -> np.ndarray:
        """Distance matrix of shape ``(len(a), len(b))``."""
        a = self.check_ids(a).ravel()
        b = self.check_ids(b).ravel()
        out = np.empty((a.size, b.size))
        rows = max(1, _CHUNK_ELEMS // max(1, b.size * self._width()))
        for start in range(0, a.size, rows):
            block = a[start:start + rows]
            aa = np.repeat(block, b.size)
            bb = np.tile(b, block.size)
            out[start:start + rows] = self._pairs(aa, bb).reshape(block.size, b.size)
        return out

    def _width(self) -> int:
        return 1


class EuclideanMetric(TrueMetric):
    """Euclidean distance over a :class:`Dataset`, computed on demand."""

    def __init__(self, dataset: Dataset):
        self.dataset = dataset
        self.n = dataset.n
        self.labels = dataset.labels
        self._pts = dataset.points

    def _width(self) -> int:
        return self._pts.shape[1]

    def _pairs(self, a, b):
        # same summation order as cross() so both paths agree bit for bit
        pa, pb = self._pts[a], self._pts[b]
        acc = np.zeros(a.size)
        for k in range(pa.shape[1]):
            diff = pa[:, k] - pb[:, k]
            acc += diff * diff
        return np.sqrt(acc)

    def cross(self, a, b):
        a = self.check_ids(a).ravel()
        b = self.check_ids(b).ravel()
        pa, pb = self._pts[a], self._pts[b]
        out = np.empty((a.size, b.size))
        rows = max(1, _CHUNK_ELEMS // max(1, b.size))
        for start in range(0, a.size, rows):
            block = pa[start:start + rows]
            acc = np.zeros((block.shape[0], b.size))
            # coordinate-wise differences avoid the cancellation of the Gram form
            for k in range(pa.shape[1]):
                diff = block[:, k, None] - pb[None, :, k]
                diff *= diff
                acc += diff
            out[start:start + rows] = np.sqrt(acc, out=acc)
        return out


class MatrixMetric(TrueMetric):
    """Metric backed by an explicit symmetric ``n x n`` matrix.

    Symmetry, zero diagonal and non-negativity are checked at construction.
    The triangle inequality is checked only for ``n <= 64``.
    """

    def __init__(self, matrix, labels=None, *, check_triangle: Optional[bool] = None):
        m = np.array(matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
            raise UsageError("distance matrix must be square and non-empty")
        if not np.all(np.isfinite(m)):
            raise UsageError("distance matrix must be finite")
        if np.any(m < 0):
            raise UsageError("distances must be non-negative")
        if np.any(np.diag(m) != 0):
            raise UsageError("distance matrix must have a zero diagonal")
        if not np.allclose(m, m.T, rtol=1e-12, atol=0.0):
            raise UsageError("distance matrix must be symmetric")
        m = np.maximum(m, m.T)
        self.n = m.shape[0]
        if check_triangle is None:
            check_triangle = self.n <= TRIANGLE_CHECK_LIMIT
        if check_triangle and not satisfies_triangle_inequality(m):
            raise UsageError("distance matrix violates the triangle inequality")
        m.setflags(write=False)
        self.matrix = m
        self.labels = None if labels is None else _check_labels(labels, self.n)

    def _pairs(self, a, b):
        return self.matrix[a, b]

    def cross(self, a, b):
        a = self.check_ids(a).ravel()
        b = self.check_ids(b).ravel()
        return self.matrix[np.ix_(a, b)]


def satisfies_triangle_inequality(matrix, tol: float = 1e-9) -> bool:
    """Exhaustive O(n^3) triple scan."""
    m = np.asarray(matrix, dtype=np.float64)
    scale = max(1.0, float(m.max(initial=0.0)))
    for j in range(m.shape[0]):
        via = m[:, j, None] + m[None, j, :]
        if np.any(m > via + tol * scale):
            return False
    return True


def true_distance(metric: TrueMetric, a: int, b: int) -> float:
    return metric.distance(a, b)


class DistanceRange(NamedTuple):
    min_nonzero: float
    max: float
    estimated: bool


def distance_range(metric: TrueMetric, seed: int = 0,
                   exact_limit: int = EXACT_RANGE_LIMIT) -> DistanceRange:
    """Smallest nonzero and largest pairwise distance.

    Exact when ``n <= exact_limit``; otherwise computed over all pairs of a
    seeded sample of ``exact_limit`` points and flagged as an estimate.
    """
    estimated = metric.n > exact_limit
    # metrics are immutable, so the range is computed once per (metric, sample)
    key = (exact_limit, seed if estimated else None)
    cache = metric.__dict__.setdefault("_range_cache", {})
    if key in cache:
        return cache[key]
    if estimated:
        rng = np.random.default_rng(seed)
        ids = np.sort(rng.choice(metric.n, size=exact_limit, replace=False))
    else:
        ids = np.arange(metric.n)
    lo, hi = math.inf, 0.0
    rows = max(1, _CHUNK_ELEMS // max(1, ids.size * metric._width()))
    for start in range(0, ids.size, rows):
        block = metric.cross(ids[start:start + rows], ids)
        hi = max(hi, float(block.max()))
        nz = block[block > 0]
        if nz.size:
            lo = min(lo, float(nz.min()))
    if hi == 0.0:
        raise DegenerateMetricError("degenerate metric: all points coincide")
    cache[key] = DistanceRange(lo, hi, estimated)
    return cache[key]


def aspect_ratio(metric: TrueMetric, seed: int = 0) -> tuple[float, bool]:
    """Return ``(max / min nonzero distance, estimated)``."""
    if metric.n < 2:
        raise DegenerateMetricError("degenerate metric: fewer than two points")
    rng_ = distance_range(metric, seed)
    return rng_.max / rng_.min_nonzero, rng_.estimated


# --- file formats -------------------------------------------------------------

def write_points_csv(path, dataset: Dataset) -> None:
    lines = [f"label,dim={dataset.dim}"]
    for i in range(dataset.n):
        label = "" if dataset.labels is None else str(int(dataset.labels[i]))
        coords = ",".join(repr(float(v)) for v in dataset.points[i])
        lines.append(f"{label},{coords}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_points_csv(path) -> Dataset:
    """Read ``label,x_1,...,x_d`` rows under a ``label,dim=<d>`` header."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty file", line=1)
    header = [h.strip() for h in lines[0].split(",")]
    if len(header) != 2 or header[0] != "label" or not header[1].startswith("dim="):
        raise ParseError("header must be 'label,dim=<d>'", line=1)
    try:
        dim = int(header[1][4:])
    except ValueError:
        raise ParseError("dimension in header is not an integer", line=1) from None
    if dim < 1:
        raise ParseError("dimension must be positive", line=1)

    points, labels = [], []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        cells = raw.split(",")
        if len(cells) != dim + 1:
            raise ParseError(f"expected {dim + 1} fields, got {len(cells)}", line=lineno)
        lab = cells[0].strip()
        try:
            labels.append(int(lab) if lab else None)
            points.append([float(c) for c in cells[1:]])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
    if not points:
        raise ParseError("no data rows", line=len(lines) + 1)

    have = [lab is not None for lab in labels]
    if any(have) and not all(have):
        missing = have.index(False) + 2
        raise ParseError("label missing while other rows are labelled", line=missing)
    try:
        return Dataset(np.array(points), np.array(labels) if all(have) else None)
    except UsageError as exc:
        raise ParseError(str(exc)) from None


def write_matrix(path, metric: MatrixMetric) -> None:
    iu = np.triu_indices(metric.n, 1)
    vals = metric.matrix[iu]
    body = "\n".join(repr(float(v)) for v in vals)
    Path(path).write_text(f"{metric.n}\n{body}\n" if vals.size else f"{metric.n}\n")


def load_matrix(path, labels=None) -> MatrixMetric:
    """Read ``n`` followed by the ``n(n-1)/2`` upper-triangle values."""
    tokens = Path(path).read_text().split()
    if not tokens:
        raise ParseError("empty matrix file", line=1)
    try:
        n = int(tokens[0])
        vals = np.array([float(t) for t in tokens[1:]])
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    expected = n * (n - 1) // 2
    if n < 1 or vals.size != expected:
        raise ParseError(f"expected {expected} upper-triangle values for n={n}, got {vals.size}")
    m = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    m[iu] = vals
    m.T[iu] = vals
    return MatrixMetric(m, labels)


def load_labels(path) -> np.ndarray:
    """One integer label per line."""
    out = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        if raw.strip():
            try:
                out.append(int(raw))
            except ValueError:
                raise ParseError(f"bad label {raw!r}", line=lineno) from None
    return np.array(out, dtype=np.int64)
