import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from uavudn.channel import ChannelParams
from uavudn.energy import (HarvestParams, PropulsionParams, flight_energy, harvested_energy,
                           propulsion_power)
from uavudn.errors import InvalidParameterError
from uavudn.geometry import AreaSpec, NodeSet, Trajectory, build_trajectory, make_grid

PP = PropulsionParams()
CH = ChannelParams()


def _line(speed, seconds, dt=1.0, y=0.0):
    n = int(round(seconds / dt))
    t = np.arange(n + 1) * dt
    pos = np.column_stack([speed * t, np.full(n + 1, y), np.full(n + 1, 100.0)])
    return Trajectory(t, pos, dt)


def test_power_at_30():
    assert propulsion_power(30.0, PP) == pytest.approx(100.002, abs=1e-9)


def test_power_blows_up_at_both_ends():
    assert propulsion_power(0.1, PP) > propulsion_power(30.0, PP)
    assert propulsion_power(1000.0, PP) > propulsion_power(30.0, PP)


def test_power_undefined_at_rest():
    with pytest.raises(InvalidParameterError):
        propulsion_power(0.0, PP)


def test_max_endurance_speed_matches_grid():
    v = np.arange(1.0, 200.0 + 1e-9, 0.01)
    v_grid = v[np.argmin(propulsion_power(v, PP))]
    assert abs(v_grid - PP.max_endurance_speed) <= 0.01
    assert PP.max_endurance_speed == pytest.approx(30.0, abs=0.01)


@given(st.floats(1.0, 150.0), st.floats(1.0, 150.0))
def test_power_convex(a, b):
    mid = 0.5 * (a + b)
    assert propulsion_power(mid, PP) <= 0.5 * (propulsion_power(a, PP)
                                               + propulsion_power(b, PP)) + 1e-9


def test_flight_energy_constant_speed():
    assert flight_energy(_line(30.0, 100.0), PP) == pytest.approx(10000.2, rel=1e-6)


def test_flight_energy_linear_in_time():
    assert flight_energy(_line(40.0, 50.0), PP) * 2 == pytest.approx(
        flight_energy(_line(40.0, 100.0), PP), rel=1e-12)


def test_flight_energy_shape_invariant():
    area = AreaSpec()
    a = build_trajectory("straight", area, 100.0, 40.0, 25.0, 1.0)
    t = np.arange(26.0)
    ang = t * 40.0 / 300.0
    pos = np.column_stack([300 * np.cos(ang), 300 * np.sin(ang), np.full(26, 100.0)])
    b = Trajectory(t, pos, 1.0)
    # The circle's chords are a touch shorter than its arcs; compare at chord speed.
    chord = 2 * 300 * np.sin(40.0 / 600.0)
    b_energy = flight_energy(b, PP)
    assert b_energy == pytest.approx(25 * propulsion_power(chord, PP), rel=1e-12)
    assert flight_energy(a, PP) == pytest.approx(25 * propulsion_power(40.0, PP), rel=1e-12)


def test_hover_charged_at_max_endurance():
    tr = build_trajectory("hover", AreaSpec(), 100.0, 0.0, 10.0, 1.0)
    assert flight_energy(tr, PP) == pytest.approx(10 * propulsion_power(
        PP.max_endurance_speed, PP))


@given(st.lists(st.floats(0.0, 80.0), min_size=1, max_size=30))
def test_flight_energy_lower_bound(steps):
    x = np.concatenate([[0.0], np.cumsum(steps)])
    t = np.arange(x.size, dtype=float)
    tr = Trajectory(t, np.column_stack([x, 0 * x, 0 * x + 50]), 1.0)
    bound = tr.duration * propulsion_power(PP.max_endurance_speed, PP)
    assert flight_energy(tr, PP) >= bound - 1e-9


def test_harvest_hover_example():
    tr = build_trajectory("hover", AreaSpec(200.0, 200.0), 100.0, 0.0, 10.0, 1.0)
    node = NodeSet(np.array([[100.0, 100.0, 0.0]]))
    e = harvested_energy(tr, np.full(10, 5.0), node, CH, HarvestParams(0.5))
    assert e[0] == pytest.approx(2.5e-9, rel=1e-12)


def test_harvest_zero_schedule():
    tr = _line(10.0, 20.0)
    e = harvested_energy(tr, np.zeros(20), make_grid(AreaSpec(), 4, 4), CH, HarvestParams())
    assert np.all(e == 0)


def test_harvest_length_mismatch():
    with pytest.raises(InvalidParameterError):
        harvested_energy(_line(10.0, 20.0), np.ones(19), make_grid(AreaSpec(), 2, 2), CH,
                         HarvestParams())


def test_harvest_eta_range():
    with pytest.raises(InvalidParameterError):
        HarvestParams(1.5)


@given(st.floats(0.1, 10.0), st.integers(0, 2 ** 32 - 1))
def test_harvest_linearity(k, seed):
    rng = np.random.default_rng(seed)
    tr = _line(10.0, 30.0, y=300.0)
    nodes = make_grid(AreaSpec(), 5, 5)
    a, b = rng.uniform(0, 5, 30), rng.uniform(0, 5, 30)
    ea = harvested_energy(tr, a, nodes, CH, HarvestParams())
    eb = harvested_energy(tr, b, nodes, CH, HarvestParams())
    eab = harvested_energy(tr, k * a + b, nodes, CH, HarvestParams())
    np.testing.assert_allclose(eab, k * ea + eb, rtol=1e-12)


@given(st.floats(0.0, 2 * np.pi), st.floats(1.0, 200.0))
def test_harvest_falls_with_distance(theta, step):
    tr = build_trajectory("hover", AreaSpec(), 100.0, 0.0, 5.0, 1.0)
    c = np.array([500.0, 500.0, 0.0])
    d = np.array([np.cos(theta), np.sin(theta), 0.0])
    near = NodeSet(c + 50.0 * d)
    far = NodeSet(c + (50.0 + step) * d)
    p = np.full(5, 5.0)
    assert harvested_energy(tr, p, far, CH, HarvestParams())[0] < \
        harvested_energy(tr, p, near, CH, HarvestParams())[0]
