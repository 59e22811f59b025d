import numpy as np
import pytest

from helpers import line, random_metric
from wsclust import (Dataset, DegenerateMetricError, EuclideanMetric, HardInstanceSpec, MatrixMetric,
                     ParseError, UsageError, aspect_ratio, distance_range, generate_hard_instance,
                     true_distance)
from wsclust.metric import (load_labels, load_matrix, load_points_csv, satisfies_triangle_inequality,
                            write_matrix, write_points_csv)


def test_three_four_five():
    m = EuclideanMetric(Dataset([[0.0, 0.0], [3.0, 4.0]]))
    assert true_distance(m, 0, 1) == 5.0


def test_identity_is_zero():
    m = random_metric(5, seed=1)
    for a in range(5):
        assert true_distance(m, a, a) == 0.0


def test_hard_instance_same_partition_is_one():
    m = generate_hard_instance(HardInstanceSpec(12, 3, l=100.0))
    a, b = np.flatnonzero(m.labels == 0)[:2]
    assert true_distance(m, a, b) == 1.0


def test_out_of_range_id():
    m = line(0, 1, 2)
    with pytest.raises(UsageError):
        true_distance(m, 0, 3)
    with pytest.raises(UsageError):
        true_distance(m, -1, 0)


def test_symmetry_exact():
    m = random_metric(30, seed=2, dim=5)
    rng = np.random.default_rng(0)
    a, b = rng.integers(30, size=(2, 200))
    assert np.array_equal(m.pair_distances(a, b), m.pair_distances(b, a))


def test_cross_matches_pairs():
    m = random_metric(17, seed=3, dim=4)
    ids = np.arange(17)
    full = m.cross(ids, ids)
    a, b = np.meshgrid(ids, ids, indexing="ij")
    assert np.array_equal(full, m.pair_distances(a, b))
    assert np.all(np.diag(full) == 0)


def test_aspect_ratio_examples():
    assert aspect_ratio(line(0, 7))[0] == 1.0
    assert aspect_ratio(line(0, 1, 10))[0] == 10.0
    hard = generate_hard_instance(HardInstanceSpec(12, 3, l=100.0))
    ratio, estimated = aspect_ratio(hard)
    assert ratio == 100.0 and not estimated


def test_aspect_ratio_degenerate():
    with pytest.raises(DegenerateMetricError, match="degenerate metric"):
        aspect_ratio(line(3, 3, 3))
    with pytest.raises(DegenerateMetricError):
        aspect_ratio(line(3))


def test_distance_range_estimated_flag():
    m = random_metric(50, seed=4)
    exact = distance_range(m)
    sampled = distance_range(m, exact_limit=20)
    assert not exact.estimated and sampled.estimated
    assert exact.min_nonzero <= sampled.min_nonzero and sampled.max <= exact.max


def test_dataset_validation():
    with pytest.raises(UsageError):
        Dataset(np.empty((0, 2)))
    with pytest.raises(UsageError):
        Dataset([[0.0, np.nan]])
    with pytest.raises(UsageError, match="contiguous"):
        Dataset([[0.0], [1.0]], labels=[0, 2])
    ds = Dataset([[0.0], [1.0], [2.0]], labels=[1, 0, 1])
    assert ds.n == 3 and ds.dim == 1 and ds.k_true == 2


def test_matrix_validation():
    with pytest.raises(UsageError, match="symmetric"):
        MatrixMetric([[0, 1], [2, 0]])
    with pytest.raises(UsageError, match="diagonal"):
        MatrixMetric([[1, 1], [1, 0]])
    with pytest.raises(UsageError, match="non-negative"):
        MatrixMetric([[0, -1], [-1, 0]])
    with pytest.raises(UsageError, match="triangle"):
        MatrixMetric([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    # above the exhaustive-check size the triangle inequality is trusted
    bad = np.ones((65, 65)) - np.eye(65)
    bad[0, 1] = bad[1, 0] = 5.0
    MatrixMetric(bad)


def test_triangle_scan(square):
    assert satisfies_triangle_inequality(square.matrix)
    assert not satisfies_triangle_inequality([[0, 1, 3], [1, 0, 1], [3, 1, 0]])


def test_points_csv_round_trip(tmp_path):
    ds = Dataset(np.random.default_rng(0).standard_normal((6, 3)) * 1e5, labels=[0, 0, 1, 1, 2, 2])
    path = tmp_path / "p.csv"
    write_points_csv(path, ds)
    back = load_points_csv(path)
    assert np.array_equal(back.points, ds.points)
    assert np.array_equal(back.labels, ds.labels)


def test_points_csv_two_rows_unlabelled(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("label,dim=2\n,1,2\n,3,4\n")
    ds = load_points_csv(path)
    assert ds.n == 2 and ds.labels is None


def test_points_csv_errors(tmp_path):
    path = tmp_path / "p.csv"
    path.write_text("label,dim=3\n0,1,2\n")
    with pytest.raises(ParseError, match="line 2"):
        load_points_csv(path)
    path.write_text("label,dim=1\n0,1\n,2\n")
    with pytest.raises(ParseError, match="line 3"):
        load_points_csv(path)
    path.write_text("x,y\n")
    with pytest.raises(ParseError, match="line 1"):
        load_points_csv(path)
    path.write_text("label,dim=1\n0,abc\n")
    with pytest.raises(ParseError, match="line 2"):
        load_points_csv(path)


def test_matrix_file_round_trip(tmp_path):
    m = generate_hard_instance(HardInstanceSpec(7, 2, l=9.5, seed=3))
    write_matrix(tmp_path / "m.txt", m)
    (tmp_path / "l.txt").write_text("\n".join(map(str, m.labels)) + "\n")
    back = load_matrix(tmp_path / "m.txt", load_labels(tmp_path / "l.txt"))
    assert np.array_equal(back.matrix, m.matrix)
    assert np.array_equal(back.labels, m.labels)


def test_matrix_file_wrong_count(tmp_path):
    (tmp_path / "m.txt").write_text("3\n1 2\n")
    with pytest.raises(ParseError, match="expected 3"):
        load_matrix(tmp_path / "m.txt")
