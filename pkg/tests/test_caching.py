import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uavudn.errors import InvalidParameterError
from uavudn.geometry import AreaSpec, NodeSet
from uavudn.scenarios.caching import (COLUMNS, CacheConfig, SurveillanceConfig,
                                      mean_uav_distance, mobility_trace, placement_phase,
                                      simulate, summary_row, surveillance_run, sweep_path,
                                      uav_tracking_policy, uav_trace)

SMALL = CacheConfig(users=60, duration=60.0)


def test_single_content_always_self_served():
    state = simulate(replace(SMALL, contents=1, uav_cache_size=0), "static", 3)
    fr = state.log.tier_fractions()
    assert fr["self"] == 1.0
    assert np.all(state.log.delay == 0.0)


def test_uniform_self_hit_rate():
    cfg = CacheConfig(users=1000, contents=10, popularity="uniform", duration=5.0)
    rates = [simulate(cfg, "static", s).log.tier_fractions()["self"] for s in range(10)]
    # Binomial(10000, 0.1): standard error 0.003.
    assert abs(np.mean(rates) - 0.1) < 4 * math.sqrt(0.09 / 10_000)


def test_zero_radius_disables_d2d():
    state = simulate(replace(SMALL, d2d_radius=0.0), "tracking", 1)
    assert state.log.tier_fractions()["d2d"] == 0.0


def test_fractions_sum_to_one():
    fr = simulate(SMALL, "tracking", 5).log.tier_fractions()
    assert sum(fr.values()) == pytest.approx(1.0)


def test_popularity_weights():
    np.testing.assert_allclose(CacheConfig(contents=3, popularity="uniform")
                               .popularity_weights(), [1 / 3] * 3)
    w = CacheConfig(contents=3).popularity_weights()
    np.testing.assert_allclose(w, np.array([1, 1 / 2, 1 / 3]) / (11 / 6))


@pytest.mark.parametrize("kw", [dict(d2d_radius=-1.0), dict(popularity="pareto"),
                                dict(mobility="levy"), dict(uav_cache_size=11),
                                dict(speed_min=3.0, speed_max=2.0)])
def test_config_validation(kw):
    with pytest.raises(InvalidParameterError):
        CacheConfig(**kw)


def test_tracking_step_examples():
    cfg = CacheConfig(uav_speed=20.0, step=1.0)
    users = np.array([[100.0, 0.0], [100.0, 0.0]])
    np.testing.assert_allclose(uav_tracking_policy(cfg, users, [0.0, 0.0]), [20.0, 0.0])
    np.testing.assert_allclose(uav_tracking_policy(cfg, users, [90.0, 0.0]), [100.0, 0.0])
    np.testing.assert_allclose(uav_tracking_policy(cfg, users, [0.0, 0.0], dt=10.0),
                               [100.0, 0.0])
    with pytest.raises(InvalidParameterError):
        uav_tracking_policy(cfg, np.zeros((0, 2)), [0.0, 0.0])


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=20)
def test_tracking_respects_speed(seed):
    cfg = replace(SMALL, mobility="rwp")
    users = mobility_trace(cfg, seed)
    tr = uav_trace(cfg, users, "tracking")
    assert np.all(np.hypot(*np.diff(tr, axis=0).T) <= cfg.uav_speed * cfg.step + 1e-9)


def test_static_uav_stays_at_center():
    tr = uav_trace(SMALL, mobility_trace(SMALL, 0), "static")
    assert np.all(tr == SMALL.area.center)


def test_users_stay_in_area():
    for kind in ("rwp", "cluster", "static"):
        tr = mobility_trace(replace(SMALL, mobility=kind), 4)
        assert np.all(tr >= 0) and np.all(tr[..., 0] <= 1000) and np.all(tr[..., 1] <= 1000)


def test_tracking_closes_distance():
    gaps = [mean_uav_distance(simulate(SMALL, "static", s))
            - mean_uav_distance(simulate(SMALL, "tracking", s)) for s in range(5)]
    assert min(gaps) > 0


@pytest.mark.parametrize("seed", range(3))
def test_delay_falls_with_radius(seed):
    cfg = replace(SMALL, users=120)
    delays = [float(np.mean(simulate(replace(cfg, d2d_radius=r), "static", seed).log.delay))
              for r in (0.0, 25.0, 50.0, 100.0, 200.0)]
    assert all(b <= a for a, b in zip(delays, delays[1:]))


def test_policies_share_requests():
    a, b = simulate(SMALL, "static", 9), simulate(SMALL, "tracking", 9)
    np.testing.assert_array_equal(a.log.content, b.log.content)
    np.testing.assert_array_equal(a.cached, b.cached)


def test_deterministic_and_row_shape():
    s1, s2 = simulate(SMALL, "tracking", 2), simulate(SMALL, "tracking", 2)
    r1, r2 = summary_row(SMALL, "tracking", 2, s1), summary_row(SMALL, "tracking", 2, s2)
    assert r1 == r2 and tuple(r1) == COLUMNS


def test_placement_ids_in_range():
    c = placement_phase(SMALL, 0)
    assert c.shape == (60,) and c.min() >= 1 and c.max() <= SMALL.contents


# --- surveillance ----------------------------------------------------------

def test_sweep_lanes():
    path = sweep_path(AreaSpec(), 50.0)
    lanes = np.unique(path[:, 1])
    np.testing.assert_allclose(lanes, np.arange(50.0, 1000.0, 100.0))
    np.testing.assert_array_equal(path[0], [0.0, 50.0])


def test_upload_time():
    cfg = SurveillanceConfig()
    res = surveillance_run(cfg, NodeSet(np.array([[0.0, 50.0, 0.0]])), [0.0, 50.0])
    assert res.collection_time == 0.0 and res.flight_time == 0.0
    assert res.transmission_time == pytest.approx(1e6 / (1e6 * math.log2(50001.0)))
    assert res.total_delay == pytest.approx(res.transmission_time)


def test_collection_time_reaches_last_sensor():
    cfg = SurveillanceConfig()
    # A sensor on the second lane, 100 m past its start at x = 1000.
    res = surveillance_run(cfg, NodeSet(np.array([[900.0, 150.0, 0.0]])), [500.0, 500.0])
    expect = 1000.0 + 100.0 + 100.0 - 50.0
    assert res.collection_time == pytest.approx(expect / cfg.speed)


def test_more_sensors_more_bits():
    cfg = SurveillanceConfig()
    rng = np.random.default_rng(0)
    pts = np.column_stack([rng.uniform(0, 1000, (20, 2)), np.zeros(20)])
    few = surveillance_run(cfg, NodeSet(pts[:5]), [500.0, 500.0])
    many = surveillance_run(cfg, NodeSet(pts), [500.0, 500.0])
    assert many.bits == 4 * few.bits
    assert many.transmission_time == pytest.approx(4 * few.transmission_time)
    assert many.collection_time >= few.collection_time


def test_surveillance_rejects_outside_points():
    with pytest.raises(InvalidParameterError):
        surveillance_run(SurveillanceConfig(), NodeSet(np.array([[2000.0, 0.0, 0.0]])),
                         [500.0, 500.0])
