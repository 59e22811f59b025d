import math

import numpy as np
import pytest

from helpers import blobs, line
from wsclust import (BallSpec, CenterState, Dataset, EstimatorParams, EuclideanMetric,
                     PreconditionError, UsageError, WeakOracleConfig, build_sampling_distribution,
                     make_oracles, point_to_point_estimate, point_to_set_estimate, refresh_balls)
from wsclust.estimator import ball_size_for, log_n, lower_median, sample_index


def test_median_of_constants():
    m = line(0, 4, 4, 4, 4, 4, 4)  # x = 0, members all at distance 4
    o = make_oracles(m)
    ball = BallSpec(1, 0.0, np.arange(1, 7))
    assert point_to_point_estimate(o.weak, 0, ball) == 4.0
    assert o.ledger.weak_raw == 6


def test_lower_median_by_hand():
    assert lower_median(np.array([1, 2, 100, 2, 3])) == 2.0
    assert lower_median(np.array([5.0, 1.0, 3.0, 7.0])) == 3.0
    with pytest.raises(UsageError):
        lower_median(np.array([]))


def test_answers_one_two_hundred():
    # x at 0; members placed so the true answers are 1, 2, 100, 2, 3
    m = line(0, 1, 2, 100, -2, 3)
    o = make_oracles(m)
    assert point_to_point_estimate(o.weak, 0, BallSpec(1, 0.0, np.arange(1, 6))) == 2.0


def test_empty_ball():
    o = make_oracles(line(0, 1))
    with pytest.raises(UsageError):
        point_to_point_estimate(o.weak, 0, BallSpec(1, 0.0, np.array([], dtype=int)))


def test_concentration_large_ball():
    # y = 0 with 1800 members in [-1, 1]; x = 10
    m_ball = 1800
    assert round(180 * log_n(1024)) == m_ball
    members = np.linspace(-1, 1, m_ball)
    m = EuclideanMetric(Dataset(np.concatenate([[10.0], members])[:, None]))
    ball = BallSpec(1 + m_ball // 2, 1.0, np.arange(1, m_ball + 1))
    inside = 0
    for trial in range(1000):
        o = make_oracles(m, WeakOracleConfig(1 / 3, "uniform-range", seed=trial))
        inside += 9.0 <= point_to_point_estimate(o.weak, 0, ball) <= 11.0
    assert inside >= 999


def test_sampling_distribution_examples():
    assert np.allclose(build_sampling_distribution([3, 4]), [9 / 25, 16 / 25], atol=1e-15)
    assert np.array_equal(build_sampling_distribution([0, 0, 0, 0]), np.full(4, 0.25))
    assert np.array_equal(build_sampling_distribution([0, 0, 5]), [0, 0, 1])


def test_sampling_distribution_rejects_bad_input():
    for bad in ([-1, 2], [np.nan, 1], [np.inf, 1], []):
        with pytest.raises(UsageError):
            build_sampling_distribution(bad)


def test_sampling_distribution_huge_values():
    p = build_sampling_distribution([1e200, 1e200])
    assert np.allclose(p, [0.5, 0.5])


def test_sample_index_respects_support():
    rng = np.random.default_rng(0)
    p = np.array([0.0, 0.25, 0.0, 0.75])
    draws = [sample_index(p, rng) for _ in range(2000)]
    assert set(draws) == {1, 3}
    assert abs(np.mean(np.array(draws) == 3) - 0.75) < 0.04


def test_ball_size_formula():
    assert EstimatorParams().ball_size(1024) == round(0.05 * 180 * 10)
    assert ball_size_for(4, 0.0001) == 3
    assert ball_size_for(2, 1.0) == 2
    assert ball_size_for(1000, 0.1, math.e) == 124
    assert ball_size_for(1000, 1.0) == 1000
    with pytest.raises(UsageError):
        ball_size_for(10, 0.0)


def test_refresh_counts_queries():
    o = make_oracles(line(*range(10)))
    state = CenterState.from_initial(o.strong, [0, 1, 2, 3, 4], ball_size=3)
    before = o.ledger.strong_raw
    refresh_balls(state, o.strong, 7)
    assert o.ledger.strong_raw - before == 5
    assert state.size == 6


def test_radius_is_order_statistic():
    o = make_oracles(line(*range(10)))
    state = CenterState.from_initial(o.strong, list(range(10)), ball_size=3)
    assert state.ball(0).radius == 2.0
    assert sorted(state.ball(0).members) == [0, 1, 2]
    assert state.ball(5).radius == 1.0


def test_colocated_centers_have_zero_radius():
    o = make_oracles(line(*([4.0] * 6)))
    state = CenterState.from_initial(o.strong, list(range(6)), ball_size=3)
    assert np.all(state.radii[:state.size] == 0)


def test_duplicate_center_appended():
    o = make_oracles(line(*range(6)))
    state = CenterState.from_initial(o.strong, [0, 1, 2], ball_size=3)
    refresh_balls(state, o.strong, 1)
    assert list(state.centers) == [0, 1, 2, 1]
    assert state.ball(3).radius == 1.0


def test_exact_when_colocated():
    m = line(0, 0, 0, 5, 9)
    o = make_oracles(m)
    state = CenterState.from_initial(o.strong, [0, 1, 2], ball_size=3)
    assert point_to_set_estimate(o.weak, 1, state) == (0.0, 0)


def test_one_dimensional_bounds():
    # x = 0; centers at 3, 3, 5 so every ball has r_c = 2 and d(x, C) = 3
    m = line(0, 3, 3, 5)
    o = make_oracles(m)
    state = CenterState.from_initial(o.strong, [1, 2, 3], ball_size=3)
    assert np.all(state.radii[:3] == 2.0)
    value, arg = point_to_set_estimate(o.weak, 0, state)
    assert 3.0 <= value <= 5.0
    assert arg == 1


def test_precondition_on_small_state():
    o = make_oracles(line(*range(6)))
    state = CenterState.from_initial(o.strong, [0, 1], ball_size=3)
    with pytest.raises(PreconditionError):
        point_to_set_estimate(o.weak, 4, state)
    with pytest.raises(PreconditionError):
        state.estimate_all(o.weak)


def test_argmin_earliest_center():
    m = line(0, 0, 0, 10, 10, 10, 5)
    o = make_oracles(m)
    state = CenterState.from_initial(o.strong, [0, 1, 2, 3, 4, 5], ball_size=3)
    value, arg = point_to_set_estimate(o.weak, 6, state)
    assert value == 5.0 and arg == 0
    _, idx = state.estimate_all(o.weak)
    assert idx[6] == 0


def test_upper_bound_when_errors_are_small():
    metric = blobs([15, 15, 15], gap=50, seed=2)
    o = make_oracles(metric, WeakOracleConfig(0.2, "uniform-range", seed=3))
    rng = np.random.default_rng(0)
    state = CenterState.from_initial(o.strong, rng.choice(45, 12, replace=False), ball_size=3)
    est, _ = state.estimate_all(o.weak)
    centers = state.centers
    true_to_set = metric.cross(np.arange(45), centers).min(axis=1)
    checked = 0
    for x in range(45):
        errs_ok = all(abs(state.est[x, j] - metric.distance(x, int(centers[j]))) <= state.radii[j]
                      for j in range(state.size))
        if errs_ok:
            checked += 1
            assert est[x] >= true_to_set[x] - 1e-9
    assert checked > 20


def test_delta_zero_error_within_radius():
    metric = blobs([20, 20], gap=30, seed=4)
    o = make_oracles(metric)
    state = CenterState.from_initial(o.strong, np.arange(0, 40, 3), ball_size=4)
    state.estimate_all(o.weak)
    for j in range(state.size):
        c = int(state.ids[j])
        err = np.abs(state.est[:, j] - metric.cross(np.arange(40), [c])[:, 0])
        assert np.all(err <= state.radii[j] + 1e-9)


def test_incremental_equals_scratch():
    metric = blobs([30, 30, 30], gap=20, seed=5)
    cfg = WeakOracleConfig(0.3, "uniform-range", seed=6)
    o = make_oracles(metric, cfg)
    first = [3, 40, 70, 10, 50]
    extra = [80, 33, 5, 61, 62, 12]
    state = CenterState.from_initial(o.strong, first, ball_size=4)
    state.estimate_all(o.weak)
    for p in extra:
        state.add_center(o.strong, p)
        state.estimate_all(o.weak)
    inc, inc_arg = state.estimate_all(o.weak)

    o2 = make_oracles(metric, cfg)
    fresh = CenterState.from_initial(o2.strong, first + extra, ball_size=4)
    scratch, scratch_arg = fresh.estimate_all(o2.weak)
    assert np.array_equal(inc, scratch)
    assert np.array_equal(inc_arg, scratch_arg)
    assert np.array_equal(state.radii[:state.size], fresh.radii[:fresh.size])
    for x in (0, 17, 89):
        assert point_to_set_estimate(o2.weak, x, fresh)[0] == inc[x]
