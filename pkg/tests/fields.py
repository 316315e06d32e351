"""Synthetic occupancy fields shared by the planner tests and the acceptance suite."""
import numpy as np

from pareto_explore.reward import LN2, OccupancyField
from pareto_explore.sim import RobotPose

START = RobotPose(3.0, 3.0, 0.0)


def field_from(p, H=None, D=None, res=0.1):
    p = np.asarray(p, float)
    base = OccupancyField.from_maps((0.0, 0.0), res, p)
    return OccupancyField(base.origin, res, p, base.H if H is None else H, base.D if D is None else D)


def random_field(seed, n=61):
    """Mostly free 6x6 m field with a few walls and random layers; START sits on a clear pad."""
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.0, 0.3, size=(n, n))
    for _ in range(4):
        i, j = rng.integers(0, n - 8, size=2)
        if rng.random() < 0.5:
            p[j:j + 2, i:i + 8] = 1.0
        else:
            p[j:j + 8, i:i + 2] = 1.0
    p[20:41, 20:41] = 0.05  # covers one arc plus the robot radius around START
    H = rng.uniform(0, LN2, size=(n, n))
    D = rng.uniform(0, 0.5, size=(n, n))
    return field_from(p, H, D)
