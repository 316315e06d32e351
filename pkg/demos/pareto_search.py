"""
One Pareto tree search
======================

The planner weighs two rewards at once: map entropy (how unknown a place is)
and frontier dynamics (how much it just changed). Neither is scaled against
the other; children are compared by Pareto dominance of their UCB vectors.

This script builds a field whose unknown region lies up and to the left of
the robot, with a freshly mapped band at its lower edge, runs a single 500-iteration search and prints what the root saw.
"""

import math

import numpy as np

from pareto_explore.planner import PlannerParams, dump_tree_csv, pareto_front, search
from pareto_explore.reward import OccupancyField
from pareto_explore.sim import RobotPose

n = 81  # 8 x 8 m at 0.1 m
ys, xs = np.mgrid[0:n, 0:n] * 0.1
p = np.where((ys > 4.5) & (xs < 4.0), 0.5, 0.01)     # unknown block, the rest free
prev = np.where((ys > 4.0) & (xs < 4.0), 0.5, 0.01)  # one step ago the block reached lower
field = OccupancyField.from_maps((0.0, 0.0), 0.1, p, prev_p=prev)

# %%
# Search from the middle of the free area, heading east.
res = search(RobotPose(4.5, 2.5, 0.0), field, 500, PlannerParams(), np.random.default_rng(0))
for action, visits, (h, d) in res.root_stats:
    print(f"turn {math.degrees(action.dtheta):+5.0f} deg  visits {visits:4d}  entropy {h:.3f}  dynamics {d:.4f}")

front = pareto_front([m for _, _, m in res.root_stats])
print("Pareto front at the root:", [round(math.degrees(res.root_stats[k][0].dtheta)) for k in front])
print("planned:", [round(math.degrees(a.dtheta)) for a in res.best_trajectory])

# %%
# The tree can be dumped for offline plotting.
dump_tree_csv("pareto_tree.csv", res.root)
