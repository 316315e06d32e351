import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pareto_explore.reward import LN2, OccupancyField, entropy_map, frontier_dynamics, reward_at
from oracles import bernoulli_entropy


@pytest.mark.parametrize("p", [0.0, 1e-9, 0.1, 0.5, 0.9, 1.0])
def test_entropy_closed_form(p):
    assert abs(entropy_map([p])[0] - bernoulli_entropy(p)) <= 1e-12


def test_entropy_examples():
    h = entropy_map([0.5, 0.0, 1.0, 0.9])
    assert h[0] == pytest.approx(0.6931, abs=1e-4) and h[0] == LN2
    assert h[1] == 0.0 and h[2] == 0.0
    assert h[3] == pytest.approx(0.3251, abs=1e-4)


def test_entropy_symmetry_exact():
    p = np.random.default_rng(0).uniform(0, 1, 100_000)
    assert np.array_equal(entropy_map(p), entropy_map(1 - p))
    assert entropy_map(p).max() <= LN2 + 1e-12


def test_entropy_keeps_shape():
    p = np.full((3, 4), 0.5)
    assert entropy_map(p).shape == (3, 4)


def test_dynamics_examples():
    a = np.random.default_rng(1).uniform(size=(5, 6))
    b = np.random.default_rng(2).uniform(size=(5, 6))
    assert np.all(frontier_dynamics(a, a) == 0)
    assert frontier_dynamics([0.5], [1.0])[0] == 0.5
    assert np.array_equal(frontier_dynamics(a, b), frontier_dynamics(b, a))
    with pytest.raises(ValueError):
        frontier_dynamics(a, b[:, :5])


def _field(H_row, D=None):
    H = np.tile(np.asarray(H_row, float), (3, 1))
    p = np.full(H.shape, 0.5)
    f = OccupancyField.from_maps((0.0, 0.0), 0.1, p)
    return OccupancyField(f.origin, f.resolution, p, H, np.zeros_like(H) if D is None else D)


def test_reward_on_node_and_midpoint():
    f = _field([0.0, LN2, 0.2])
    (h, d), ok = reward_at((0.1, 0.1), f)
    assert ok and h == LN2 and d == 0.0
    (h, _), ok = reward_at((0.05, 0.1), f)
    assert h == pytest.approx(0.3466, abs=1e-4)
    assert h == pytest.approx(LN2 / 2, rel=1e-12)


def test_reward_uniform_layer():
    f = _field([0.3, 0.3, 0.3])
    pts = np.random.default_rng(3).uniform(0, 0.2, size=(50, 2))
    np.testing.assert_allclose(f.rewards_at(pts)[:, 0], 0.3, rtol=1e-14)


def test_reward_out_of_bounds():
    f = _field([0.1, 0.2, 0.3])
    assert reward_at((-0.5, 0.1), f) == ((0.0, 0.0), False)
    assert reward_at((0.1, 0.25), f) == ((0.0, 0.0), False)
    assert f.prob_at([(5.0, 5.0)])[0] == 1.0


def test_from_maps_first_step_has_zero_dynamics():
    p = np.random.default_rng(4).uniform(size=(4, 4))
    f = OccupancyField.from_maps((0, 0), 0.1, p)
    assert np.all(f.D == 0) and np.array_equal(f.H, entropy_map(p))
    g = OccupancyField.from_maps((0, 0), 0.1, p, prev_p=np.full((4, 4), 0.5))
    assert np.array_equal(g.D, np.abs(p - 0.5))


def test_field_layers_are_frozen():
    p = np.full((3, 3), 0.5)
    f = OccupancyField.from_maps((0, 0), 0.1, p)
    p[0, 0] = 0.9
    assert f.p[0, 0] == 0.5
    with pytest.raises(ValueError):
        f.H[0, 0] = 1.0
    with pytest.raises(ValueError):
        OccupancyField((0, 0), 0.1, np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2)))


def test_scaled_layers():
    p = np.random.default_rng(5).uniform(size=(4, 4))
    f = OccupancyField.from_maps((0, 0), 0.1, p, prev_p=np.full((4, 4), 0.5))
    g = f.scaled(d_scale=10.0)
    assert np.array_equal(g.D, f.D * 10.0) and np.array_equal(g.H, f.H)


@settings(max_examples=60, deadline=None)
@given(
    H=arrays(np.float64, (4, 5), elements=st.floats(0, LN2)),
    x=st.floats(0, 0.4), y=st.floats(0, 0.3), dx=st.floats(-0.01, 0.01), dy=st.floats(-0.01, 0.01),
)
def test_reward_lipschitz(H, x, y, dx, dy):
    f = OccupancyField((0.0, 0.0), 0.1, np.full(H.shape, 0.5), H, np.zeros_like(H))
    x2 = min(max(x + dx, 0.0), 0.4)
    y2 = min(max(y + dy, 0.0), 0.3)
    a, b = f.rewards_at([(x, y), (x2, y2)])[:, 0]
    gx = np.abs(np.diff(H, axis=1)).max() / 0.1
    gy = np.abs(np.diff(H, axis=0)).max() / 0.1
    assert abs(a - b) <= gx * abs(x2 - x) + gy * abs(y2 - y) + 1e-12
