"""Pareto Monte Carlo tree search over arc primitives.

Each node keeps a running mean of K reward vectors. Selection draws
uniformly from the Pareto front of per-objective UCB vectors; expansion
takes the next untried primitive that survives the collision filter;
rollouts drive straight ahead.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .reward import OccupancyField
from .sim import MotionPrimitive, RobotPose, apply_action, collision_free, default_primitives

CollisionFilter = Callable[[RobotPose, MotionPrimitive], bool]


class TrappedError(RuntimeError):
    """Every primitive from the root pose collides."""


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    """Maximisation dominance: a >= b everywhere and > somewhere."""
    if len(a) != len(b):
        raise ValueError(f"reward vectors differ in length: {len(a)} vs {len(b)}")
    strict = False
    for x, y in zip(a, b):
        if x < y:
            return False
        if x > y:
            strict = True
    return strict


def pareto_front(vectors: Sequence[Sequence[float]]) -> list[int]:
    """Ascending indices of the vectors no other vector dominates."""
    n = len(vectors)
    if n == 0:
        raise ValueError("pareto_front of an empty set")
    return [i for i in range(n) if not any(dominates(vectors[j], vectors[i]) for j in range(n) if j != i)]


class TreeNode:
    __slots__ = (
        "id", "pose", "action", "parent", "depth", "visits", "mean",
        "children", "untried", "terminal", "self_rollouts",
    )

    def __init__(self, pose: RobotPose, action, parent, depth: int, untried, n_obj: int = 2, node_id: int = 0):
        self.id = node_id
        self.pose = pose
        self.action = action
        self.parent = parent
        self.depth = depth
        self.visits = 0
        self.mean = [0.0] * n_obj
        self.children: list[TreeNode] = []
        self.untried: list[MotionPrimitive] = list(untried)
        self.terminal = False  # dead end: nothing left to expand and no live child
        self.self_rollouts = 0

    def live_children(self) -> list["TreeNode"]:
        return [c for c in self.children if not c.terminal]

    def __repr__(self) -> str:
        return f"TreeNode(id={self.id}, depth={self.depth}, visits={self.visits}, mean={self.mean})"


def normalized_means(children: Sequence[TreeNode], normalize: bool = True) -> list[list[float]]:
    """Per-objective division by the largest sibling mean; all-zero objectives stay raw."""
    means = [list(c.mean) for c in children]
    if not normalize or not means:
        return means
    for k in range(len(means[0])):
        mx = max(m[k] for m in means)
        if mx > 0:
            for m in means:
                m[k] = m[k] / mx
    return means


def pareto_ucb_select(node: TreeNode, c: float, rng: np.random.Generator, normalize: bool = True) -> TreeNode:
    """Uniform draw from the Pareto front of the children's UCB vectors.

    Terminal children are skipped; the others must have been visited.
    """
    if not node.children:
        raise ValueError("selection on a node without children")
    cands = node.live_children()
    if not cands:
        raise ValueError("every child of this node is a dead end")
    if len(cands) == 1:
        return cands[0]
    log_n = math.log(node.visits) if node.visits > 0 else 0.0
    ucb = []
    for child, m in zip(cands, normalized_means(cands, normalize)):
        bonus = c * math.sqrt(2.0 * log_n / child.visits)
        ucb.append([v + bonus for v in m])
    front = pareto_front(ucb)
    return cands[front[int(rng.integers(len(front)))]]


class SweptDiskFilter:
    """Collision filter over an occupancy lookup (see :func:`sim.collision_free`)."""

    def __init__(self, prob_at, robot_radius: float, occ_threshold: float):
        self.prob_at = prob_at
        self.robot_radius = robot_radius
        self.occ_threshold = occ_threshold

    def __call__(self, pose: RobotPose, action: MotionPrimitive) -> bool:
        return collision_free(self.prob_at, pose, action, self.robot_radius, self.occ_threshold)


def expand(node: TreeNode, collision_filter: CollisionFilter, max_depth: int, primitives, next_id: int):
    """Pop untried actions until one passes the filter and attach its child.

    Returns the child, or None once the node has nothing left to expand;
    a node left with no children at all becomes terminal.
    """
    while node.untried:
        a = node.untried.pop(0)
        if collision_filter(node.pose, a):
            depth = node.depth + 1
            child = TreeNode(
                apply_action(node.pose, a), a, node, depth,
                primitives if depth < max_depth else (), len(node.mean), next_id,
            )
            node.children.append(child)
            return child
    if not node.children:
        node.terminal = True
    return None


def rollout(
    pose: RobotPose,
    field: OccupancyField,
    depth: int,
    collision_filter: CollisionFilter,
    step: MotionPrimitive = MotionPrimitive(0.5, 0.0),
) -> tuple[float, ...]:
    """Mean reward over the poses reached by driving straight up to ``depth`` times."""
    if depth < 1:
        raise ValueError("rollout depth must be >= 1")
    visited = []
    p = pose
    for _ in range(depth):
        if not collision_filter(p, step):
            break
        p = apply_action(p, step)
        if not field.in_bounds(p.x, p.y):
            break
        visited.append((p.x, p.y))
    if not visited:
        visited.append((pose.x, pose.y))
    r = field.rewards_at(np.array(visited)).mean(axis=0)
    return tuple(float(v) for v in r)


def backpropagate(path: Sequence[TreeNode], r: Sequence[float]) -> None:
    for node in path:
        node.visits += 1
        n = node.visits
        m = node.mean
        for k in range(len(m)):
            m[k] += (r[k] - m[k]) / n


@dataclass
class PlannerParams:
    primitives: list = field(default_factory=default_primitives)
    c: float = 0.4
    max_depth: int = 8
    rollout_depth: int = 5
    robot_radius: float = 0.3
    occ_threshold: float = 0.4
    normalize: bool = True

    @property
    def straight(self) -> MotionPrimitive:
        for a in self.primitives:
            if a.dtheta == 0.0:
                return a
        return MotionPrimitive(self.primitives[0].arc_length, 0.0)


@dataclass
class SearchResult:
    best_trajectory: list
    first_action: MotionPrimitive
    root_stats: list  # (action, visits, mean) per root child
    root: TreeNode


def _mark_dead(node: TreeNode, max_depth: int) -> None:
    # depth-capped leaves are legitimate leaves, not dead ends
    while node is not None and node.depth < max_depth and not node.untried and not node.live_children():
        node.terminal = True
        node = node.parent


def best_child(node: TreeNode, normalize: bool = True) -> TreeNode:
    """Most visited child; ties go to the larger summed normalised mean, then action order."""
    scores = [sum(m) for m in normalized_means(node.children, normalize)]
    best = 0
    for k in range(1, len(node.children)):
        ck, cb = node.children[k], node.children[best]
        if ck.visits > cb.visits or (ck.visits == cb.visits and scores[k] > scores[best]):
            best = k
    return node.children[best]


def search(
    root_pose: RobotPose,
    field: OccupancyField,
    budget: int,
    params: PlannerParams,
    rng: np.random.Generator,
    collision_filter: CollisionFilter | None = None,
) -> SearchResult:
    if budget < 1:
        raise ValueError("search budget must be >= 1")
    if collision_filter is None:
        collision_filter = SweptDiskFilter(field.prob_at, params.robot_radius, params.occ_threshold)
    prims = list(params.primitives)
    root = TreeNode(RobotPose(*root_pose), None, None, 0, prims if params.max_depth > 0 else ())
    next_id = 1

    for it in range(budget):
        node = root
        path = [root]
        leaf = None
        while True:
            if node.untried:
                child = expand(node, collision_filter, params.max_depth, prims, next_id)
                if child is not None:
                    next_id += 1
                    path.append(child)
                    leaf = child
                    break
                if node is root and not root.children:
                    raise TrappedError("no collision-free action from the root pose")
            if not node.live_children():
                _mark_dead(node, params.max_depth)
                leaf = node
                break
            node = pareto_ucb_select(node, params.c, rng, params.normalize)
            path.append(node)
        leaf.self_rollouts += 1
        r = rollout(leaf.pose, field, params.rollout_depth, collision_filter, params.straight)
        backpropagate(path, r)

    traj = []
    node = root
    while node.children:
        node = best_child(node, params.normalize)
        traj.append(node.action)
    stats = [(c.action, c.visits, tuple(c.mean)) for c in root.children]
    return SearchResult(traj, traj[0], stats, root)


def iter_tree(root: TreeNode):
    stack = [root]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.children))


def dump_tree_csv(path, root: TreeNode) -> None:
    """``id,parent_id,x,y,theta,visits,mean_h,mean_d`` per node; the root's parent is -1."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "parent_id", "x", "y", "theta", "visits", "mean_h", "mean_d"])
        for n in sorted(iter_tree(root), key=lambda n: n.id):
            w.writerow([
                n.id, -1 if n.parent is None else n.parent.id,
                repr(n.pose.x), repr(n.pose.y), repr(n.pose.theta),
                n.visits, repr(n.mean[0]), repr(n.mean[1]),
            ])
