import math

import numpy as np
import pytest

from helpers import line, random_metric
from wsclust import (BudgetExceeded, ConfigurationError, Dataset, EuclideanMetric, HardInstanceSpec,
                     SbmSpec, UsageError, WeakOracleConfig, distance_range, generate_hard_instance,
                     generate_sbm, make_oracles)
from wsclust.oracles import QueryLedger, corrupted_value, pair_uniform


def test_strong_exact_and_counted():
    o = make_oracles(EuclideanMetric(Dataset([[0.0, 0.0], [3.0, 4.0]])))
    assert o.strong.query(0, 1) == 5.0
    assert o.ledger.strong_raw == 1 and o.ledger.strong_distinct == 1


def test_strong_self_pair():
    o = make_oracles(line(0, 1))
    assert o.strong.query(1, 1) == 0.0


def test_strong_repeat_dedup():
    o = make_oracles(line(0, 5))
    first = o.strong.query(0, 1)
    second = o.strong.query(1, 0)
    assert first == second == 5.0
    assert (o.ledger.strong_raw, o.ledger.strong_distinct) == (2, 1)


def test_bad_ids_rejected():
    o = make_oracles(line(0, 1, 2))
    with pytest.raises(UsageError):
        o.strong.query(0, 3)
    with pytest.raises(UsageError):
        o.weak.query(-1, 0)


def test_delta_zero_is_exact():
    m = random_metric(40, seed=0)
    o = make_oracles(m, WeakOracleConfig(0.0, seed=9))
    ids = np.arange(40)
    assert np.array_equal(o.weak.cross(ids, ids), m.cross(ids, ids))


def test_delta_one_uniform_range_is_stable():
    m = random_metric(20, seed=1)
    rng = distance_range(m)
    o = make_oracles(m, WeakOracleConfig(1.0, "uniform-range", seed=4))
    v = o.weak.query(2, 7)
    assert rng.min_nonzero <= v <= rng.max
    replays = {o.weak.query(2, 7) for _ in range(1000)}
    assert replays == {v}
    assert o.ledger.weak_raw == 1001 and o.ledger.weak_distinct == 1


def test_hard_instance_label_swap_values():
    hard = generate_hard_instance(HardInstanceSpec(12, 3, l=100.0, seed=0))
    cfg = WeakOracleConfig(1.0, "label-swap", seed=2)
    same = np.flatnonzero(hard.labels == 0)[:2]
    cross = (np.flatnonzero(hard.labels == 0)[0], np.flatnonzero(hard.labels == 1)[0])
    assert corrupted_value(cfg, hard, *same) == 100.0
    assert corrupted_value(cfg, hard, *cross) == 1.0
    o = make_oracles(hard, cfg)
    assert o.weak.query(*same) == 100.0 and o.weak.query(*cross) == 1.0


def test_sbm_same_cluster_corruption_is_inter_cluster_distance():
    ds = generate_sbm(SbmSpec(700, 7, seed=3))
    m = EuclideanMetric(ds)
    cfg = WeakOracleConfig(1.0, "label-swap", seed=5)
    a, b = np.flatnonzero(ds.labels == 2)[:2]
    v = corrupted_value(cfg, m, a, b)
    assert v == pytest.approx(1e5 * math.sqrt(2), rel=1e-3)


def test_label_swap_requires_labels():
    with pytest.raises(ConfigurationError):
        make_oracles(random_metric(5, seed=0), WeakOracleConfig(0.3, "label-swap"))


def test_config_validation():
    with pytest.raises(ConfigurationError):
        WeakOracleConfig(-0.1)
    with pytest.raises(ConfigurationError):
        WeakOracleConfig(0.2, "adversarial")


def test_corruption_rate_uniform_range():
    m = random_metric(1000, seed=2)
    o = make_oracles(m, WeakOracleConfig(0.3, "uniform-range", seed=11))
    i, j = np.triu_indices(1000, 1)
    pick = np.random.default_rng(0).choice(i.size, size=100_000, replace=False)
    pairs = np.stack([i[pick], j[pick]])
    weak = o.weak.query_pairs(pairs[0], pairs[1])
    rate = np.mean(weak != m.pair_distances(pairs[0], pairs[1]))
    assert abs(rate - 0.3) <= 0.02


def test_corruption_rate_label_swap_bounded():
    ds = generate_sbm(SbmSpec(1000, 5, seed=1))
    m = EuclideanMetric(ds)
    o = make_oracles(m, WeakOracleConfig(0.3, "label-swap", seed=3))
    rng = np.random.default_rng(1)
    a = rng.integers(1000, size=100_000)
    b = rng.integers(1000, size=100_000)
    keep = a != b
    rate = np.mean(o.weak.query_pairs(a[keep], b[keep]) != m.pair_distances(a[keep], b[keep]))
    assert rate <= 0.32


def test_persistence_independent_of_order_and_batch():
    m = random_metric(30, seed=4)
    o = make_oracles(m, WeakOracleConfig(0.4, seed=8))
    ids = np.arange(30)
    block = o.weak.cross(ids, ids)
    assert np.array_equal(block, block.T)
    singles = np.array([[o.weak.query(i, j) for j in range(30)] for i in range(30)])
    assert np.array_equal(block, singles)
    assert np.array_equal(o.weak.pairwise(ids), block)


def test_unrelated_point_change_keeps_answers():
    # point 11 stays strictly inside the hull, so the corruption range is unchanged
    pts = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0], [10.0, 10.0]]
                   + [[x, y] for x, y in np.random.default_rng(5).uniform(1, 9, size=(8, 2))])
    pts[11] = [5.0, 5.0]
    m1 = EuclideanMetric(Dataset(pts))
    pts2 = pts.copy()
    pts2[11] = [5.5, 4.75]
    m2 = EuclideanMetric(Dataset(pts2))
    cfg = WeakOracleConfig(0.5, "uniform-range", seed=1)
    assert distance_range(m1) == distance_range(m2)
    w1, w2 = make_oracles(m1, cfg).weak, make_oracles(m2, cfg).weak
    i, j = np.triu_indices(12, 1)
    assert np.array_equal(w1.corrupted_mask(i, j), w2.corrupted_mask(i, j))
    ids = np.arange(11)
    assert np.array_equal(w1.cross(ids, ids), w2.cross(ids, ids))


def test_pair_uniform_symmetric_and_stream_dependent():
    a = np.arange(100)
    b = np.arange(100)[::-1]
    assert np.array_equal(pair_uniform(3, a, b, 1), pair_uniform(3, b, a, 1))
    assert not np.array_equal(pair_uniform(3, a, b, 1), pair_uniform(3, a, b, 2))
    assert not np.array_equal(pair_uniform(3, a, b, 1), pair_uniform(4, a, b, 1))


def test_ledger_matches_shadow_set():
    m = random_metric(25, seed=6)
    o = make_oracles(m, WeakOracleConfig(0.2, seed=1))
    rng = np.random.default_rng(7)
    shadow, raw = set(), 0
    for _ in range(40):
        kind = rng.integers(3)
        if kind == 0:
            a, b = rng.integers(25, size=2)
            o.strong.query(a, b)
            pairs = [(a, b)]
        elif kind == 1:
            a = rng.integers(25)
            others = rng.integers(25, size=6)
            o.strong.query_many(a, others)
            pairs = [(a, x) for x in others]
        else:
            ids = rng.choice(25, size=5, replace=False)
            o.strong.pairwise(ids)
            pairs = [(ids[i], ids[j]) for i in range(5) for j in range(i + 1, 5)]
        raw += len(pairs)
        shadow |= {(min(p), max(p)) for p in pairs}
        assert o.ledger.strong_raw == raw
        assert o.ledger.strong_distinct == len(shadow)
    assert o.ledger.weak_raw == 0


def test_strong_cap():
    o = make_oracles(line(0, 1, 2, 3), strong_cap=3)
    o.strong.query_many(0, [1, 2, 3])
    with pytest.raises(BudgetExceeded):
        o.strong.query(1, 2)
    assert o.ledger.strong_raw == 3


def test_matrix_backed_weak():
    m = line(0, 1, 2)
    table = np.array([[0, 9, 2], [9, 0, 1], [2, 1, 0.0]])
    o = make_oracles(m, weak_matrix=table)
    assert o.weak.query(0, 1) == 9.0
    with pytest.raises(ConfigurationError):
        make_oracles(m, weak_matrix=np.zeros((2, 2)))


def test_ledger_csv():
    led = QueryLedger(1, 1, 5, 3)
    assert led.to_csv() == "strong_raw,strong_distinct,weak_raw,weak_distinct\n1,1,5,3"
