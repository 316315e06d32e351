"""Entropy and frontier-dynamics layers on the query grid, with bilinear lookup."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LN2 = math.log(2.0)


def entropy_map(p) -> np.ndarray:
    """Bernoulli entropy in nats, 0 at p in {0, 1}.

    Evaluated through w = max(p, 1 - p), for which 1 - w is exact, so
    H(p) and H(1 - p) agree bit for bit.
    """
    p = np.asarray(p, dtype=float)
    w = np.maximum(p, 1.0 - p)
    small = 1.0 - w
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(small > 0, -small * np.log(np.where(small > 0, small, 1.0)), 0.0)
        b = -w * np.log1p(-small)
    return a + b


def frontier_dynamics(prev_p, curr_p) -> np.ndarray:
    prev_p = np.asarray(prev_p, dtype=float)
    curr_p = np.asarray(curr_p, dtype=float)
    if prev_p.shape != curr_p.shape:
        raise ValueError(f"grid mismatch: {prev_p.shape} vs {curr_p.shape}")
    return np.abs(curr_p - prev_p)


class Bilinear:
    """Bilinear lookup of a (ny, nx, ...) node grid; ``fill`` outside the grid."""

    def __init__(self, values: np.ndarray, origin, resolution: float, fill: float):
        self.values = np.asarray(values, dtype=float)
        self.ox, self.oy = float(origin[0]), float(origin[1])
        self.res = float(resolution)
        self.fill = fill
        ny, nx = self.values.shape[:2]
        self.nx, self.ny = nx, ny
        self.xmax = self.ox + (nx - 1) * self.res
        self.ymax = self.oy + (ny - 1) * self.res
        # padded copy so the +1 neighbour always exists
        pad = [(0, 1), (0, 1)] + [(0, 0)] * (self.values.ndim - 2)
        self._v = np.pad(self.values, pad, mode="edge")

    def __call__(self, xy) -> np.ndarray:
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        fx = (xy[:, 0] - self.ox) / self.res
        fy = (xy[:, 1] - self.oy) / self.res
        inside = (fx >= -1e-9) & (fx <= self.nx - 1 + 1e-9) & (fy >= -1e-9) & (fy <= self.ny - 1 + 1e-9)
        np.clip(fx, 0.0, self.nx - 1, out=fx)
        np.clip(fy, 0.0, self.ny - 1, out=fy)
        i0 = fx.astype(np.intp)
        j0 = fy.astype(np.intp)
        tx = fx - i0
        ty = fy - j0
        if self.values.ndim > 2:
            tx = tx[:, None]
            ty = ty[:, None]
        v = self._v
        out = (v[j0, i0] * (1 - tx) + v[j0, i0 + 1] * tx) * (1 - ty) + (
            v[j0 + 1, i0] * (1 - tx) + v[j0 + 1, i0 + 1] * tx
        ) * ty
        out[~inside] = self.fill
        return out

    def inside(self, x: float, y: float) -> bool:
        return (
            self.ox - 1e-9 <= x <= self.xmax + 1e-9 and self.oy - 1e-9 <= y <= self.ymax + 1e-9
        )


@dataclass(frozen=True)
class OccupancyField:
    """Immutable snapshot of the occupancy, entropy and dynamics layers."""

    origin: tuple[float, float]
    resolution: float
    p: np.ndarray
    H: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        shapes = {np.shape(self.p), np.shape(self.H), np.shape(self.D)}
        if len(shapes) != 1:
            raise ValueError(f"layer shapes differ: {shapes}")
        for name in ("p", "H", "D"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        # unknown space off the grid is never safe to enter
        object.__setattr__(self, "_p", Bilinear(self.p, self.origin, self.resolution, 1.0))
        hd = np.stack([self.H, self.D], axis=-1)
        object.__setattr__(self, "_hd", Bilinear(hd, self.origin, self.resolution, 0.0))

    @classmethod
    def from_maps(cls, origin, resolution, p, prev_p=None) -> "OccupancyField":
        p = np.asarray(p, dtype=float)
        D = np.zeros_like(p) if prev_p is None else frontier_dynamics(prev_p, p)
        return cls(tuple(origin), float(resolution), p, entropy_map(p), D)

    @property
    def shape(self) -> tuple[int, int]:
        return self.p.shape

    def prob_at(self, xy) -> np.ndarray:
        return self._p(xy)

    def rewards_at(self, xy) -> np.ndarray:
        """(n, 2) reward vectors; zeros off the grid."""
        return self._hd(xy)

    def in_bounds(self, x: float, y: float) -> bool:
        return self._p.inside(x, y)

    def scaled(self, h_scale: float = 1.0, d_scale: float = 1.0) -> "OccupancyField":
        return OccupancyField(self.origin, self.resolution, self.p, self.H * h_scale, self.D * d_scale)


def reward_at(pos, field: OccupancyField) -> tuple[tuple[float, float], bool]:
    """(entropy, dynamics) at ``pos`` and an in-bounds flag; (0, 0) off the grid."""
    x, y = float(pos[0]), float(pos[1])
    if not field.in_bounds(x, y):
        return (0.0, 0.0), False
    r = field.rewards_at([[x, y]])[0]
    return (float(r[0]), float(r[1])), True
