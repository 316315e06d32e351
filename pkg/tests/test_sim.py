import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pareto_explore.config import DATA_DIR
from pareto_explore.reward import OccupancyField
from pareto_explore.sim import (
    LidarScan,
    MotionPrimitive,
    RobotPose,
    WorldMap,
    apply_action,
    arc_samples,
    collision_free,
    load_world,
    parse_ascii_world,
    raycast,
    sample_training_points,
    scan,
    wrap_angle,
)


def boxed(nx, ny, cs=0.1, extra=()):
    occ = np.zeros((ny, nx), bool)
    occ[0] = occ[-1] = True
    occ[:, 0] = occ[:, -1] = True
    for i, j in extra:
        occ[j, i] = True
    return WorldMap(occ, (0.0, 0.0), cs)


@pytest.fixture(scope="module")
def maze():
    return load_world(DATA_DIR / "maze12.txt", 0.1)


def test_ascii_world_orientation():
    w = parse_ascii_world("####\n#..#\n#.##\n####\n", 0.5)
    assert (w.nx, w.ny) == (4, 4)
    # second line from the bottom is "#.##": cell (2, 1) occupied
    assert w.occ[1, 2] and not w.occ[2, 2]
    assert w.bounds == (0.0, 2.0, 0.0, 2.0)


@pytest.mark.parametrize("text", ["", "###\n#.\n###", "###\n#x#\n###", "###\n#..\n###"])
def test_ascii_world_errors(text):
    with pytest.raises(ValueError):
        parse_ascii_world(text, 0.1)


def test_world_is_read_only(maze):
    with pytest.raises(ValueError):
        maze.occ[5, 5] = True


def test_raycast_corridor_beyond_range():
    w = boxed(100, 5)
    assert raycast(w, (0.25, 0.25), 0.0, 3.0) == (3.0, False)


def test_raycast_wall_one_metre():
    w = boxed(40, 20, extra=[(20, j) for j in range(20)])
    t, hit = raycast(w, (1.0, 1.05), 0.0, 5.0)
    assert hit and t == pytest.approx(1.0, abs=1e-12)
    t, hit = raycast(w, (1.95, 1.05), math.pi, 5.0)
    assert hit and t == pytest.approx(1.85, abs=1e-12)


def test_raycast_corner_tie_takes_x_first():
    d = 0.05 * math.sqrt(2)
    # only the x-neighbour of the crossed corner is occupied -> stop at the corner
    t, hit = raycast(boxed(12, 12, extra=[(6, 5)]), (0.55, 0.55), math.pi / 4, 5.0)
    assert hit and t == pytest.approx(d, abs=1e-12)
    # both neighbours occupied -> still the corner
    t, hit = raycast(boxed(12, 12, extra=[(6, 5), (5, 6)]), (0.55, 0.55), math.pi / 4, 5.0)
    assert hit and t == pytest.approx(d, abs=1e-12)
    # only the y-neighbour: the ray slips through the corner into the diagonal cell
    t, hit = raycast(boxed(12, 12, extra=[(5, 6)]), (0.55, 0.55), math.pi / 4, 5.0)
    assert t > d + 0.05


def test_raycast_errors():
    w = boxed(10, 10)
    with pytest.raises(ValueError, match="occupied"):
        raycast(w, (0.05, 0.5), 0.0, 1.0)
    with pytest.raises(ValueError, match="outside"):
        raycast(w, (-1.0, 0.5), 0.0, 1.0)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), angle=st.floats(-math.pi, math.pi))
def test_raycast_monotone_in_obstacles(seed, angle):
    rng = np.random.default_rng(seed)
    base = boxed(30, 30)
    occ = base.occ.copy()
    occ[15, 15] = False
    more = occ.copy()
    cells = rng.integers(1, 29, size=(10, 2))
    for i, j in cells:
        if (i, j) != (15, 15):
            more[j, i] = True
    o = (1.55, 1.55)
    t0, _ = raycast(WorldMap(occ, (0, 0), 0.1), o, angle, 5.0)
    t1, _ = raycast(WorldMap(more, (0, 0), 0.1), o, angle, 5.0)
    assert t1 <= t0


def test_scan_beam_angles_and_open_room():
    w = boxed(200, 200)
    sc = scan(w, RobotPose(10.0, 10.0, 0.3), math.radians(270), 7, 5.0)
    np.testing.assert_allclose(sc.angles, np.linspace(-math.radians(135), math.radians(135), 7))
    assert np.all(sc.ranges == 5.0) and not sc.hits.any()
    assert sc.angles[0] != sc.angles[-1]


def test_scan_normal_beam_on_wall():
    w = boxed(40, 20, extra=[(20, j) for j in range(20)])
    sc = scan(w, RobotPose(1.0, 1.05, 0.0), math.pi, 3, 5.0)
    assert sc.hits[1] and sc.ranges[1] == pytest.approx(1.0, abs=1e-12)


def test_scan_deterministic_and_valid(maze):
    a = scan(maze, RobotPose(1.0, 1.0, 0.0), 2 * math.pi, 181, 4.0)
    b = scan(maze, RobotPose(1.0, 1.0, 0.0), 2 * math.pi, 181, 4.0)
    assert a.ranges.tobytes() == b.ranges.tobytes()
    assert np.all((a.ranges > 0) & (a.ranges <= 4.0))
    assert np.all(a.ranges[~a.hits] == 4.0)


def test_scan_errors():
    with pytest.raises(ValueError):
        scan(boxed(10, 10), RobotPose(0.5, 0.5, 0), 1.0, 1, 2.0)


def _one_beam(r, hit, max_range=5.0):
    return LidarScan(RobotPose(0.0, 0.0, 0.0), np.array([0.0]), np.array([r]), np.array([hit]), max_range, 1, 0.0)


def test_sampling_counts():
    tp = sample_training_points(_one_beam(1.0, True), 0.3)
    np.testing.assert_allclose(tp.pos[:, 0], [0.3, 0.6, 0.9, 1.0])
    assert tp.label.tolist() == [0, 0, 0, 1]

    tp = sample_training_points(_one_beam(0.2, True), 0.3)
    assert tp.pos.tolist() == [[0.2, 0.0]] and tp.label.tolist() == [1]

    tp = sample_training_points(_one_beam(5.0, False), 1.0)
    np.testing.assert_allclose(tp.pos[:, 0], [1, 2, 3, 4, 5])
    assert tp.label.tolist() == [0] * 5


def test_sampling_exact_multiple_is_not_free():
    tp = sample_training_points(_one_beam(0.9, True), 0.3)
    assert len(tp) == 3 and tp.label.tolist() == [0, 0, 1]


def test_sampling_error():
    with pytest.raises(ValueError):
        sample_training_points(_one_beam(1.0, True), 0.0)


@pytest.mark.parametrize("pose", [(1.0, 1.0, 0.0), (6.0, 3.0, 1.0), (10.5, 10.5, -2.0), (2.3, 8.7, 0.5)])
def test_samples_agree_with_ground_truth(maze, pose):
    sc = scan(maze, RobotPose(*pose), 2 * math.pi, 361, 4.0)
    tp = sample_training_points(sc, 0.1)
    free = tp.pos[tp.label == 0]
    assert not maze.occupied_at(free).any()
    # an occupied endpoint sits on the near face: a small step further is inside a wall
    ang = np.repeat(pose[2] + sc.angles[sc.hits], 1)
    ends = tp.pos[tp.label == 1]
    beyond = ends + 1e-6 * np.column_stack([np.cos(ang), np.sin(ang)])
    before = ends - 1e-6 * np.column_stack([np.cos(ang), np.sin(ang)])
    assert maze.occupied_at(beyond).all()
    assert not maze.occupied_at(before).any()


def test_apply_action_straight():
    assert apply_action(RobotPose(0, 0, 0), MotionPrimitive(1.0, 0.0)) == (1.0, 0.0, 0.0)


def test_apply_action_quarter_circle():
    p = apply_action(RobotPose(0, 0, 0), MotionPrimitive(math.pi / 2, math.pi / 2))
    np.testing.assert_allclose(p, (1.0, 1.0, math.pi / 2), atol=1e-12, rtol=0)


def test_apply_action_wraps():
    p = apply_action(RobotPose(0, 0, 3.0), MotionPrimitive(0.5, 2 * math.pi))
    assert -math.pi < p.theta <= math.pi
    assert p.theta == pytest.approx(3.0, abs=1e-12)


@pytest.mark.parametrize("t", [0.0, math.pi, -math.pi, 3 * math.pi, -3 * math.pi, 7.0, -0.5, 1e-17])
def test_wrap_range(t):
    w = wrap_angle(t)
    assert -math.pi < w <= math.pi
    assert math.isclose(math.cos(w), math.cos(t), abs_tol=1e-12)
    assert math.isclose(math.sin(w), math.sin(t), abs_tol=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    x=st.floats(-10, 10), y=st.floats(-10, 10), th=st.floats(-math.pi, math.pi),
    L=st.floats(0.01, 3.0), dth=st.floats(-3.0, 3.0),
)
def test_chord_not_longer_than_arc(x, y, th, L, dth):
    p = apply_action(RobotPose(x, y, th), MotionPrimitive(L, dth))
    chord = math.hypot(p.x - x, p.y - y)
    assert chord <= L + 1e-9
    if abs(dth) > 1e-3:
        assert chord < L


def test_arc_samples_end_on_apply_action():
    a = MotionPrimitive(0.5, math.radians(60))
    pts = arc_samples(RobotPose(1, 2, 0.4), a, 0.1)
    assert len(pts) == 5
    np.testing.assert_allclose(pts[-1], apply_action(RobotPose(1, 2, 0.4), a)[:2], atol=1e-12)


def _band_field(band_value=0.5):
    p = np.zeros((31, 31))
    p[10:, :] = band_value  # rows at y >= 1.0
    return OccupancyField.from_maps((0.0, 0.0), 0.1, p)


def test_collision_free_examples():
    f = _band_field()
    go = MotionPrimitive(1.0, 0.0)
    assert collision_free(f.prob_at, RobotPose(0.5, 0.5, 0.0), MotionPrimitive(0.5, 0.0), 0.2, 0.4)
    assert not collision_free(f.prob_at, RobotPose(0.5, 0.5, math.pi / 2), go, 0.2, 0.4)
    # grazing the unknown band at exactly the robot radius
    assert not collision_free(f.prob_at, RobotPose(0.5, 0.8, 0.0), go, 0.2, 0.45)
    assert collision_free(f.prob_at, RobotPose(0.5, 0.8, 0.0), go, 0.15, 0.45)
    with pytest.raises(ValueError):
        collision_free(f.prob_at, RobotPose(0.5, 0.5, 0.0), go, 0.2, 1.0)


def test_collision_off_grid_is_blocked():
    f = OccupancyField.from_maps((0.0, 0.0), 0.1, np.zeros((11, 11)))
    assert not collision_free(f.prob_at, RobotPose(0.8, 0.5, 0.0), MotionPrimitive(0.5, 0.0), 0.1, 0.4)
