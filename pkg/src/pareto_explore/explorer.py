"""Receding-horizon exploration loop.

One step: scan, sample training points, pick hinges under the enlarged
hull, update the map, rebuild the reward layers, search, and execute only
the first action of the returned trajectory.
"""
from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bhm import GlobalMapDb, init_model, merge_into_db, predict, vi_update
from .config import ExplorationConfig
from .features import (
    DegenerateHullError,
    build_hinge_grid,
    convex_hull,
    disk_polygon,
    enlarge_hull,
    select_hinges,
)
from .io import write_map_csv, write_map_pgm
from .planner import PlannerParams, TrappedError, search
from .reward import OccupancyField, entropy_map
from .sim import (
    MotionPrimitive,
    RobotPose,
    WorldMap,
    apply_action,
    arc_samples,
    load_world,
    sample_training_points,
    scan,
    wrap_angle,
)

log = logging.getLogger(__name__)

RECOVERY_TURN = math.radians(60.0)
METRIC_COLUMNS = [
    "step", "x", "y", "theta", "arc_length", "dtheta", "recovery",
    "total_entropy", "coverage", "max_dynamics", "collision",
]


@dataclass
class StepRecord:
    step: int
    pose: RobotPose  # where the scan was taken
    action: MotionPrimitive
    recovery: bool
    total_entropy: float
    coverage: float
    max_dynamics: float
    collision: bool
    planner_ms: float = 0.0
    mapping_ms: float = 0.0

    def metric_row(self) -> list:
        return [
            self.step, repr(self.pose.x), repr(self.pose.y), repr(self.pose.theta),
            repr(self.action.arc_length), repr(self.action.dtheta), int(self.recovery),
            repr(self.total_entropy), repr(self.coverage), repr(self.max_dynamics), int(self.collision),
        ]


def total_entropy(p: np.ndarray) -> float:
    return float(entropy_map(p).sum())


def coverage(p: np.ndarray) -> float:
    """Fraction of cells whose probability is at least 0.25 away from 0.5."""
    return float(np.mean(np.abs(p - 0.5) > 0.25))


class Explorer:
    def __init__(self, config: ExplorationConfig, world: WorldMap | None = None, base_dir=None):
        self.config = cfg = config.validate()
        self.world = world if world is not None else load_world(cfg.world_path(base_dir), cfg.cell_size)
        bounds = self.world.bounds
        self.hinges = build_hinge_grid(bounds, cfg.hinge_res)
        self.model = init_model(self.hinges, cfg.alpha, cfg.gamma)
        self.db = GlobalMapDb.from_bounds(bounds, cfg.query_res)
        self.prev_p: np.ndarray | None = None
        self.pose = RobotPose(cfg.start_x, cfg.start_y, wrap_angle(math.radians(cfg.start_theta_deg)))
        if self.world.occupied_at([(self.pose.x, self.pose.y)])[0]:
            raise ValueError(f"start pose ({self.pose.x}, {self.pose.y}) is inside an obstacle")
        self.params = PlannerParams(
            primitives=[MotionPrimitive(cfg.arc_length, math.radians(d)) for d in cfg.dtheta_deg],
            c=cfg.c,
            max_depth=cfg.tree_depth,
            rollout_depth=cfg.rollout_depth,
            robot_radius=cfg.robot_radius,
            occ_threshold=cfg.occ_threshold,
            normalize=cfg.normalize,
        )
        self.rng = np.random.default_rng(cfg.seed)
        self.initial_entropy = total_entropy(self.db.p)
        self.records: list[StepRecord] = []
        self.hulls = []  # enlarged hull per step
        self.field: OccupancyField | None = None
        self.last_search = None
        self.termination: str | None = None
        self._calm_steps = 0

    # -- mapping -----------------------------------------------------------
    def update_map(self):
        cfg = self.config
        sc = scan(
            self.world, self.pose, math.radians(cfg.fov_deg), cfg.n_beams, cfg.max_range,
            cfg.range_noise, self.rng if cfg.range_noise > 0 else None,
        )
        batch = sample_training_points(sc, cfg.free_spacing)
        try:
            hull = convex_hull(batch.pos)
        except DegenerateHullError:
            hull = disk_polygon((self.pose.x, self.pose.y), cfg.max_range)
        big = enlarge_hull(hull, cfg.hull_margin)
        active = select_hinges(big, self.hinges)
        self.model = vi_update(self.model, batch, active, cfg.vi_iters)
        # The raw hull is overwritten. The margin ring only fills cells never
        # seen before: its fading predictions give the planner an entropy
        # gradient toward unseen space without eroding cells already mapped.
        cells, pos = self.db.cells_in(big)
        if len(cells):
            fresh = hull.contains(pos) | ~self.db.seen.ravel()[cells]
            pos = pos[fresh]
            if len(pos):
                merge_into_db(self.db, big, pos, predict(self.model, pos, active))
        self.hulls.append(big)
        self.field = OccupancyField.from_maps(self.db.origin, self.db.resolution, self.db.p, self.prev_p)
        self.prev_p = self.db.p.copy()
        return sc, batch

    # -- loop --------------------------------------------------------------
    def step(self) -> StepRecord:
        t0 = time.perf_counter()
        self.update_map()
        t1 = time.perf_counter()
        field = self.field
        try:
            res = search(self.pose, field, self.config.budget, self.params, self.rng)
            action, recovery = res.first_action, False
            self.last_search = res
        except TrappedError:
            log.info("step %d: trapped, rotating in place", len(self.records))
            action, recovery = MotionPrimitive(0.0, RECOVERY_TURN), True
            self.last_search = None
        t2 = time.perf_counter()

        start = self.pose
        if recovery:
            new_pose = RobotPose(start.x, start.y, wrap_angle(start.theta + RECOVERY_TURN))
            collided = False
        else:
            new_pose, collided = self._execute(start, action)
        rec = StepRecord(
            step=len(self.records),
            pose=start,
            action=action,
            recovery=recovery,
            total_entropy=float(field.H.sum()),
            coverage=coverage(field.p),
            max_dynamics=float(field.D.max()),
            collision=collided,
            planner_ms=(t2 - t1) * 1e3,
            mapping_ms=(t1 - t0) * 1e3,
        )
        self.pose = new_pose
        self.records.append(rec)
        return rec

    def _execute(self, start: RobotPose, action: MotionPrimitive) -> tuple[RobotPose, bool]:
        """Drive the arc in the true world; a bump stops the robot at the last free sample."""
        n = max(1, int(math.ceil(action.arc_length / 0.02)))
        s = action.arc_length * np.arange(1, n + 1) / n
        hit = self.world.occupied_at(arc_samples(start, action, action.arc_length / n))
        if not hit.any():
            return apply_action(start, action), False
        k = int(np.argmax(hit))
        if k == 0:
            return start, True
        part = s[k - 1]
        return apply_action(start, MotionPrimitive(part, action.dtheta * part / action.arc_length)), True

    def check_termination(self) -> str | None:
        cfg = self.config
        rec = self.records[-1]
        if rec.step > 0 and rec.max_dynamics < cfg.dynamics_epsilon:
            self._calm_steps += 1
        else:
            self._calm_steps = 0
        if rec.total_entropy <= cfg.entropy_fraction * self.initial_entropy:
            return "entropy"
        if self._calm_steps >= cfg.dynamics_patience:
            return "dynamics"
        if len(self.records) >= cfg.max_steps:
            return "max_steps"
        return None

    def run(self, on_step=None) -> list[StepRecord]:
        while self.termination is None:
            rec = self.step()
            if on_step is not None:
                on_step(self, rec)
            self.termination = self.check_termination()
        return self.records


def run(config: ExplorationConfig, world: WorldMap | None = None, base_dir=None, on_step=None):
    """Explore until a termination trigger fires. Returns (records, final map)."""
    ex = Explorer(config, world, base_dir)
    ex.run(on_step)
    return ex.records, ex.db


def write_metrics(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(METRIC_COLUMNS)
        for r in records:
            w.writerow(r.metric_row())


def write_timing(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "planner_ms", "mapping_ms"])
        for r in records:
            w.writerow([r.step, f"{r.planner_ms:.3f}", f"{r.mapping_ms:.3f}"])


def write_trajectory(path, records, final_pose: RobotPose | None = None) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "x", "y", "theta"])
        for r in records:
            w.writerow([r.step, repr(r.pose.x), repr(r.pose.y), repr(r.pose.theta)])
        if final_pose is not None:
            w.writerow([len(records), repr(final_pose.x), repr(final_pose.y), repr(final_pose.theta)])


def run_to_dir(config: ExplorationConfig, out_dir, world: WorldMap | None = None, base_dir=None) -> Explorer:
    """Run and write metrics, timing, trajectory and map artifacts into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    every = config.snapshot_every

    def snapshot(ex: Explorer, rec: StepRecord):
        if every and rec.step % every == 0:
            write_map_pgm(out / f"map_{rec.step:05d}.pgm", ex.db)

    ex = Explorer(config, world, base_dir)
    ex.run(snapshot)
    write_metrics(out / "metrics.csv", ex.records)
    write_timing(out / "timing.csv", ex.records)
    write_trajectory(out / "trajectory.csv", ex.records, ex.pose)
    write_map_pgm(out / "map_final.pgm", ex.db)
    write_map_csv(out / "map_final.csv", ex.db)
    return ex
