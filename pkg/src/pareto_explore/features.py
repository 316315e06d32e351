"""RBF features over a hinge lattice and convex-hull hinge selection."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.spatial import cKDTree

# activations below this are treated as exact zeros
SPARSITY_CUTOFF = 1e-6
_EPS = 1e-9


class DegenerateHullError(ValueError):
    """Raised when a point set has no 2D convex hull (too few or collinear points)."""


@dataclass(frozen=True)
class HingeGrid:
    origin: tuple[float, float]
    resolution: float
    nx: int
    ny: int
    points: np.ndarray  # (nx*ny, 2), index = j*nx + i

    def __len__(self) -> int:
        return self.nx * self.ny

    def point(self, i: int, j: int) -> np.ndarray:
        return self.points[j * self.nx + i]


@dataclass(frozen=True)
class FeatureVector:
    active_indices: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class Polygon:
    """Convex polygon, vertices counter-clockwise."""

    vertices: np.ndarray  # (n, 2)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
            raise ValueError("polygon needs at least 3 two-dimensional vertices")
        object.__setattr__(self, "vertices", v)

    def __len__(self) -> int:
        return len(self.vertices)

    def centroid(self) -> np.ndarray:
        """Area centroid (shoelace)."""
        v = self.vertices
        w = np.roll(v, -1, axis=0)
        cross = v[:, 0] * w[:, 1] - w[:, 0] * v[:, 1]
        area = cross.sum() / 2.0
        if abs(area) < 1e-15:
            return v.mean(axis=0)
        cx = ((v[:, 0] + w[:, 0]) * cross).sum() / (6.0 * area)
        cy = ((v[:, 1] + w[:, 1]) * cross).sum() / (6.0 * area)
        return np.array([cx, cy])

    def contains(self, pts: np.ndarray, eps: float = _EPS) -> np.ndarray:
        """Vectorised inside-or-on test for an (n, 2) array."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        v = self.vertices
        lo, hi = v.min(axis=0) - eps, v.max(axis=0) + eps
        inside = np.all((pts >= lo) & (pts <= hi), axis=1)
        idx = np.flatnonzero(inside)
        if idx.size == 0:
            return inside
        p = pts[idx]
        e = np.roll(v, -1, axis=0) - v
        # cross(edge_k, p - v_k) for every (point, edge) pair
        dx = p[:, 0, None] - v[None, :, 0]
        dy = p[:, 1, None] - v[None, :, 1]
        cross = e[None, :, 0] * dy - e[None, :, 1] * dx
        inside[idx] = np.all(cross >= -eps, axis=1)
        return inside


def build_hinge_grid(bounds: Sequence[float], resolution: float) -> HingeGrid:
    """Lattice of hinge points covering ``bounds = (xmin, xmax, ymin, ymax)`` inclusively."""
    xmin, xmax, ymin, ymax = (float(b) for b in bounds)
    if not resolution > 0:
        raise ValueError(f"resolution must be positive, got {resolution}")
    if not (xmax > xmin and ymax > ymin):
        raise ValueError(f"bounds {tuple(bounds)} have zero area")
    nx = int(math.ceil((xmax - xmin) / resolution - _EPS)) + 1
    ny = int(math.ceil((ymax - ymin) / resolution - _EPS)) + 1
    ii, jj = np.meshgrid(np.arange(nx), np.arange(ny))
    pts = np.column_stack([xmin + ii.ravel() * resolution, ymin + jj.ravel() * resolution])
    return HingeGrid((xmin, ymin), float(resolution), nx, ny, pts)


def rbf_features(x, hinges: HingeGrid, active, gamma: float) -> FeatureVector:
    """Squared-exponential activations of ``x`` against the active hinges.

    Activations under ``SPARSITY_CUTOFF`` are dropped from the result.
    """
    active = np.asarray(active, dtype=np.intp)
    if active.size == 0:
        raise ValueError("empty active hinge set")
    if not gamma > 0:
        raise ValueError("gamma must be positive")
    active = np.sort(active)
    d2 = np.sum((hinges.points[active] - np.asarray(x, dtype=float)) ** 2, axis=1)
    vals = np.exp(-gamma * d2)
    keep = vals >= SPARSITY_CUTOFF
    return FeatureVector(active[keep], vals[keep])


def cutoff_radius(gamma: float) -> float:
    """Distance beyond which an activation falls under the sparsity cutoff."""
    return math.sqrt(-math.log(SPARSITY_CUTOFF) / gamma)


def feature_matrix(xs: np.ndarray, hinge_points: np.ndarray, gamma: float) -> sparse.csr_matrix:
    """Sparse (n_points, n_hinges) matrix of RBF activations, cutoff applied.

    Column order follows ``hinge_points``; rows follow ``xs``.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    n, m = len(xs), len(hinge_points)
    if m == 0:
        raise ValueError("empty active hinge set")
    tree = cKDTree(hinge_points)
    # slightly generous radius, the exact cutoff is re-applied below
    pairs = tree.query_ball_point(xs, cutoff_radius(gamma) * (1 + 1e-9), return_sorted=True)
    counts = np.fromiter((len(p) for p in pairs), dtype=np.intp, count=n)
    indptr = np.zeros(n + 1, dtype=np.intp)
    np.cumsum(counts, out=indptr[1:])
    cols = np.fromiter((c for p in pairs for c in p), dtype=np.intp, count=int(indptr[-1]))
    rows = np.repeat(np.arange(n), counts)
    d2 = np.sum((xs[rows] - hinge_points[cols]) ** 2, axis=1)
    vals = np.exp(-gamma * d2)
    keep = vals >= SPARSITY_CUTOFF
    if not keep.all():
        rows, cols, vals = rows[keep], cols[keep], vals[keep]
        counts = np.bincount(rows, minlength=n)
        indptr = np.zeros(n + 1, dtype=np.intp)
        np.cumsum(counts, out=indptr[1:])
    return sparse.csr_matrix((vals, cols, indptr), shape=(n, m))


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> Polygon:
    """Andrew's monotone chain. Collinear boundary points are dropped."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) < 3:
        raise DegenerateHullError("need at least 3 points for a hull")
    uniq = sorted(set(map(tuple, pts.tolist())))
    if len(uniq) < 3:
        raise DegenerateHullError("need at least 3 distinct points for a hull")

    lower: list = []
    for p in uniq:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(uniq):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateHullError("points are collinear")
    return Polygon(np.array(hull))


def enlarge_hull(poly: Polygon, margin: float) -> Polygon:
    """Push every vertex ``margin`` metres away from the area centroid.

    The hull of the moved vertices is returned, so the result stays convex
    and contains the input.
    """
    if margin < 0:
        raise ValueError("margin must be non-negative")
    if margin == 0:
        return poly
    c = poly.centroid()
    d = poly.vertices - c
    r = np.hypot(d[:, 0], d[:, 1])
    r[r == 0] = 1.0
    moved = poly.vertices + margin * d / r[:, None]
    return convex_hull(moved)


def disk_polygon(center, radius: float, n: int = 16) -> Polygon:
    ang = 2 * np.pi * np.arange(n) / n
    c = np.asarray(center, dtype=float)
    return Polygon(c + radius * np.column_stack([np.cos(ang), np.sin(ang)]))


def select_hinges(hull: Polygon, hinges: HingeGrid) -> np.ndarray:
    """Ascending indices of hinges inside or on ``hull``."""
    return np.flatnonzero(hull.contains(hinges.points))
