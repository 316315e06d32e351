"""Ground-truth 2D world, lidar, unicycle arc primitives and swept-disk collision checks."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .bhm import TrainingPoints

TWO_PI = 2.0 * math.pi


def wrap_angle(theta: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.pi - (math.pi - theta) % TWO_PI
    return w


class RobotPose(NamedTuple):
    x: float
    y: float
    theta: float


class MotionPrimitive(NamedTuple):
    arc_length: float
    dtheta: float


def default_primitives(arc_length: float = 0.5, dtheta_deg: Sequence[float] = (-60, -30, 0, 30, 60)):
    return [MotionPrimitive(float(arc_length), math.radians(d)) for d in dtheta_deg]


@dataclass(frozen=True)
class WorldMap:
    occ: np.ndarray  # (ny, nx) bool, row 0 at origin y
    origin: tuple[float, float]
    cell_size: float

    def __post_init__(self):
        occ = np.asarray(self.occ, dtype=bool)
        if occ.ndim != 2 or min(occ.shape) < 3:
            raise ValueError("world grid must be 2D and at least 3x3")
        if not (occ[0].all() and occ[-1].all() and occ[:, 0].all() and occ[:, -1].all()):
            raise ValueError("world border must be fully occupied")
        if not self.cell_size > 0:
            raise ValueError("cell size must be positive")
        occ.setflags(write=False)
        object.__setattr__(self, "occ", occ)

    @property
    def nx(self) -> int:
        return self.occ.shape[1]

    @property
    def ny(self) -> int:
        return self.occ.shape[0]

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        ox, oy = self.origin
        return (ox, ox + self.nx * self.cell_size, oy, oy + self.ny * self.cell_size)

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (
            int(math.floor((x - self.origin[0]) / self.cell_size)),
            int(math.floor((y - self.origin[1]) / self.cell_size)),
        )

    def occupied_at(self, xy) -> np.ndarray:
        """Ground-truth occupancy of points; anything off the grid counts as occupied."""
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        i = np.floor((xy[:, 0] - self.origin[0]) / self.cell_size).astype(np.intp)
        j = np.floor((xy[:, 1] - self.origin[1]) / self.cell_size).astype(np.intp)
        out = np.ones(len(xy), dtype=bool)
        ok = (i >= 0) & (i < self.nx) & (j >= 0) & (j < self.ny)
        out[ok] = self.occ[j[ok], i[ok]]
        return out


def parse_ascii_world(text: str, cell_size: float, origin=(0.0, 0.0)) -> WorldMap:
    """``#`` occupied, ``.`` free; the first line is the top (largest y) row."""
    rows = [ln.rstrip("\r\n") for ln in text.splitlines()]
    rows = [r for r in rows if r.strip() and not r.lstrip().startswith(";")]
    if not rows:
        raise ValueError("empty ASCII world")
    width = len(rows[0])
    for k, r in enumerate(rows):
        if len(r) != width:
            raise ValueError(f"ASCII world row {k + 1} has length {len(r)}, expected {width}")
        bad = set(r) - {"#", "."}
        if bad:
            raise ValueError(f"ASCII world row {k + 1} has unexpected characters {sorted(bad)}")
    occ = np.array([[c == "#" for c in r] for r in rows], dtype=bool)[::-1]
    return WorldMap(occ, tuple(origin), float(cell_size))


def load_world(path, cell_size: float) -> WorldMap:
    """Load a ``.pgm`` (occupied where value < 128) or ASCII world file."""
    from .io import read_pgm

    path = Path(path)
    if path.suffix.lower() == ".pgm":
        img = read_pgm(path)
        return WorldMap(img[::-1] < 128, (0.0, 0.0), float(cell_size))
    return parse_ascii_world(path.read_text(), cell_size)


def raycast(world: WorldMap, origin, angle: float, max_range: float) -> tuple[float, bool]:
    """Amanatides-Woo traversal to the first occupied cell boundary.

    When the ray crosses a cell corner exactly, the x-step is taken first.
    """
    ox, oy = float(origin[0]), float(origin[1])
    cs = world.cell_size
    fx = (ox - world.origin[0]) / cs
    fy = (oy - world.origin[1]) / cs
    i, j = int(math.floor(fx)), int(math.floor(fy))
    nx, ny = world.nx, world.ny
    if not (0 <= i < nx and 0 <= j < ny):
        raise ValueError(f"ray origin ({ox:.3f}, {oy:.3f}) is outside the world")
    occ = world.occ
    if occ[j, i]:
        raise ValueError(f"ray origin ({ox:.3f}, {oy:.3f}) is inside an occupied cell")

    dx, dy = math.cos(angle), math.sin(angle)
    if abs(dx) < 1e-15:
        dx = 0.0
    if abs(dy) < 1e-15:
        dy = 0.0
    if dx > 0:
        step_i, t_max_x, t_dx = 1, ((i + 1) - fx) * cs / dx, cs / dx
    elif dx < 0:
        step_i, t_max_x, t_dx = -1, (i - fx) * cs / dx, -cs / dx
    else:
        step_i, t_max_x, t_dx = 0, math.inf, math.inf
    if dy > 0:
        step_j, t_max_y, t_dy = 1, ((j + 1) - fy) * cs / dy, cs / dy
    elif dy < 0:
        step_j, t_max_y, t_dy = -1, (j - fy) * cs / dy, -cs / dy
    else:
        step_j, t_max_y, t_dy = 0, math.inf, math.inf

    while True:
        if t_max_x <= t_max_y:
            t = t_max_x
            i += step_i
            t_max_x += t_dx
        else:
            t = t_max_y
            j += step_j
            t_max_y += t_dy
        if t >= max_range:
            return float(max_range), False
        if not (0 <= i < nx and 0 <= j < ny) or occ[j, i]:
            return t, True


class LidarScan(NamedTuple):
    pose: RobotPose
    angles: np.ndarray  # robot frame
    ranges: np.ndarray
    hits: np.ndarray
    max_range: float
    n_beams: int
    fov: float


def scan(
    world: WorldMap,
    pose: RobotPose,
    fov: float,
    n_beams: int,
    max_range: float,
    noise_std: float = 0.0,
    rng: np.random.Generator | None = None,
) -> LidarScan:
    if n_beams < 2:
        raise ValueError("a scan needs at least 2 beams")
    angles = -fov / 2.0 + np.arange(n_beams) * (fov / (n_beams - 1))
    ranges = np.empty(n_beams)
    hits = np.empty(n_beams, dtype=bool)
    for k, a in enumerate(angles):
        ranges[k], hits[k] = raycast(world, (pose.x, pose.y), wrap_angle(pose.theta + a), max_range)
    if noise_std > 0:
        if rng is None:
            raise ValueError("range noise needs an rng")
        noisy = ranges + rng.normal(0.0, noise_std, n_beams)
        ranges = np.where(hits, np.clip(noisy, 1e-6, max_range), ranges)
    return LidarScan(pose, angles, ranges, hits, float(max_range), int(n_beams), float(fov))


def sample_training_points(scan: LidarScan, free_spacing: float) -> TrainingPoints:
    """Free samples every ``free_spacing`` short of each return, plus the endpoint.

    A hit endpoint is labelled occupied; a max-range endpoint is labelled free.
    """
    if not free_spacing > 0:
        raise ValueError("free_spacing must be positive")
    pose = scan.pose
    pos, lab = [], []
    for a, r, hit in zip(scan.angles, scan.ranges, scan.hits):
        ang = pose.theta + a
        c, s = math.cos(ang), math.sin(ang)
        n_free = int(math.ceil(r / free_spacing - 1e-9)) - 1
        d = free_spacing * np.arange(1, max(n_free, 0) + 1)
        d = d[d < r - 1e-9]
        d = np.append(d, r)
        pos.append(np.column_stack([pose.x + d * c, pose.y + d * s]))
        lab_b = np.zeros(len(d), dtype=np.int8)
        lab_b[-1] = 1 if hit else 0
        lab.append(lab_b)
    return TrainingPoints(np.vstack(pos), np.concatenate(lab))


def apply_action(pose: RobotPose, a: MotionPrimitive) -> RobotPose:
    x, y, th = pose
    L, dth = a
    half = 0.5 * dth
    chord = L * (math.sin(half) / half) if half != 0.0 else L
    mid = th + half
    return RobotPose(x + chord * math.cos(mid), y + chord * math.sin(mid), wrap_angle(th + dth))


def arc_samples(pose: RobotPose, a: MotionPrimitive, spacing: float) -> np.ndarray:
    """Positions along the arc at multiples of ``spacing`` (start excluded, end included)."""
    n = max(1, int(math.ceil(a.arc_length / spacing - 1e-9)))
    s = a.arc_length * np.arange(1, n + 1) / n
    return _arc_points(pose, a, s)


def _arc_points(pose: RobotPose, a: MotionPrimitive, s: np.ndarray) -> np.ndarray:
    # chord form: length s*sinc(phi/2) along th + phi/2, stable as dtheta -> 0
    x, y, th = pose
    k = a.dtheta / a.arc_length if a.arc_length else 0.0
    half = 0.5 * k * s
    chord = s * np.sinc(half / math.pi)
    mid = th + half
    return np.column_stack([x + chord * np.cos(mid), y + chord * np.sin(mid)])


_RIM = np.array([[math.cos(k * math.pi / 4), math.sin(k * math.pi / 4)] for k in range(8)])


def disk_footprint(centers: np.ndarray, radius: float) -> np.ndarray:
    """Each centre followed by its 8 rim points: (n*9, 2)."""
    offs = np.vstack([[0.0, 0.0], radius * _RIM])
    return (centers[:, None, :] + offs[None, :, :]).reshape(-1, 2)


def collision_free(
    prob_at: Callable[[np.ndarray], np.ndarray],
    pose_from: RobotPose,
    action: MotionPrimitive,
    robot_radius: float,
    occ_threshold: float,
) -> bool:
    """True iff every swept-disk sample has occupancy probability below ``occ_threshold``."""
    if not 0 < occ_threshold < 1:
        raise ValueError("occ_threshold must lie in (0, 1)")
    pts = disk_footprint(arc_samples(pose_from, action, robot_radius / 2.0), robot_radius)
    return bool(np.all(prob_at(pts) < occ_threshold))
