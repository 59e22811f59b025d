import numpy as np

from wsclust import Dataset, EuclideanMetric


def line(*xs, labels=None):
    """1-D Euclidean metric over the given coordinates."""
    return EuclideanMetric(Dataset(np.array(xs, dtype=float)[:, None], labels))


def blobs(sizes, gap=100.0, spread=1.0, seed=0, dim=2):
    """Well-separated Gaussian groups with labels."""
    rng = np.random.default_rng(seed)
    pts, labels = [], []
    for i, s in enumerate(sizes):
        centre = np.zeros(dim)
        centre[0] = i * gap
        pts.append(centre + spread * rng.standard_normal((s, dim)))
        labels += [i] * s
    return EuclideanMetric(Dataset(np.vstack(pts), np.array(labels)))


def random_metric(n, seed, dim=2):
    rng = np.random.default_rng(seed)
    return EuclideanMetric(Dataset(rng.uniform(0, 10, size=(n, dim))))
