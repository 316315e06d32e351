"""Online Bayesian Hilbert map.

Weights carry a diagonal Gaussian posterior that is refined batch by batch
with the Jaakkola-Jordan local bound on the logistic likelihood. Only the
hinges selected for the current batch are touched.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .features import HingeGrid, Polygon, feature_matrix


@dataclass(frozen=True)
class TrainingPoints:
    pos: np.ndarray  # (n, 2)
    label: np.ndarray  # (n,) int8, 1 = occupied

    def __post_init__(self):
        pos = np.asarray(self.pos, dtype=float).reshape(-1, 2)
        label = np.asarray(self.label, dtype=np.int8).reshape(-1)
        if len(pos) != len(label):
            raise ValueError("positions and labels differ in length")
        if label.size and not np.isin(label, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        object.__setattr__(self, "pos", pos)
        object.__setattr__(self, "label", label)

    def __len__(self) -> int:
        return len(self.label)

    @classmethod
    def concat(cls, parts) -> "TrainingPoints":
        parts = list(parts)
        if not parts:
            return cls(np.empty((0, 2)), np.empty(0, dtype=np.int8))
        return cls(np.vstack([p.pos for p in parts]), np.concatenate([p.label for p in parts]))


@dataclass
class BhmModel:
    hinges: HingeGrid
    mu: np.ndarray
    s2: np.ndarray
    alpha: float
    gamma: float

    def copy(self) -> "BhmModel":
        return BhmModel(self.hinges, self.mu.copy(), self.s2.copy(), self.alpha, self.gamma)


def init_model(hinges: HingeGrid, alpha: float = 10.0, gamma: float = 40.0) -> BhmModel:
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    n = len(hinges)
    return BhmModel(hinges, np.zeros(n), np.full(n, float(alpha)), float(alpha), float(gamma))


def jj_lambda(xi: np.ndarray) -> np.ndarray:
    """tanh(xi/2) / (4 xi), continuously extended with 1/8 at zero."""
    xi = np.abs(np.asarray(xi, dtype=float))
    out = np.full(xi.shape, 0.125)
    nz = xi > 1e-8
    out[nz] = np.tanh(xi[nz] / 2.0) / (4.0 * xi[nz])
    return out


def _design(model: BhmModel, xs, active: np.ndarray):
    # z = -phi, so the logistic link reads sigma(w.z) = sigma(-w.phi)
    return -feature_matrix(xs, model.hinges.points[active], model.gamma)


def local_xi(model: BhmModel, xs, active) -> np.ndarray:
    """xi_n recomputed from the current posterior for the points ``xs``."""
    active = np.asarray(active, dtype=np.intp)
    z = _design(model, xs, active)
    m = z @ model.mu[active]
    v = z.multiply(z) @ model.s2[active]
    return np.sqrt(m * m + v)


def vi_update(
    model: BhmModel,
    batch: TrainingPoints,
    active,
    n_iters: int = 3,
    return_xi: bool = False,
):
    """Absorb ``batch`` into the posterior over the ``active`` hinges.

    The previous posterior acts as the prior. ``n_iters`` alternations of
    the (mu, s2) and xi updates are run, starting from xi = 1.
    Returns a new model (and the final xi when ``return_xi``).
    """
    active = np.asarray(active, dtype=np.intp)
    if len(batch) == 0:
        raise ValueError("empty training batch")
    if active.size == 0:
        raise ValueError("empty active hinge set")
    if n_iters < 1:
        raise ValueError("n_iters must be >= 1")

    z = _design(model, batch.pos, active)
    z2 = z.multiply(z).tocsr()
    zt, z2t = z.T.tocsr(), z2.T.tocsr()
    s2_0 = model.s2[active]
    mu_0 = model.mu[active]
    lin0 = mu_0 / s2_0 + zt @ (batch.label - 0.5)
    # hinges without any activation keep their posterior bit for bit
    touched = np.diff(zt.indptr) > 0

    xi = np.ones(len(batch))
    for _ in range(n_iters):
        # 1 / (1/s2_0 + a) written so that a = 0 returns s2_0 exactly
        s2 = s2_0 / (1.0 + s2_0 * (2.0 * (z2t @ jj_lambda(xi))))
        mu = np.where(touched, s2 * lin0, mu_0)
        m = z @ mu
        xi = np.sqrt(m * m + z2 @ s2)

    out = model.copy()
    out.mu[active] = mu
    out.s2[active] = s2
    if return_xi:
        return out, xi
    return out


def predict(model: BhmModel, queries, active) -> np.ndarray:
    """Occupancy probability with probit-style moderation by posterior variance."""
    active = np.asarray(active, dtype=np.intp)
    if active.size == 0:
        raise ValueError("empty active hinge set")
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    if len(queries) == 0:
        return np.empty(0)
    z = _design(model, queries, active)
    m = z @ model.mu[active]
    v = z.multiply(z) @ model.s2[active]
    return expit(m / np.sqrt(1.0 + (math.pi / 8.0) * v))


@dataclass
class GlobalMapDb:
    """Query-grid occupancy store. Cells are grid nodes ``origin + (i, j) * resolution``."""

    origin: tuple[float, float]
    resolution: float
    nx: int
    ny: int
    p: np.ndarray = field(default=None)  # (ny, nx)
    seen: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.p is None:
            self.p = np.full((self.ny, self.nx), 0.5)
        if self.seen is None:
            self.seen = np.zeros((self.ny, self.nx), dtype=bool)

    @classmethod
    def from_bounds(cls, bounds, resolution: float) -> "GlobalMapDb":
        xmin, xmax, ymin, ymax = (float(b) for b in bounds)
        nx = int(math.floor((xmax - xmin) / resolution + 1e-9)) + 1
        ny = int(math.floor((ymax - ymin) / resolution + 1e-9)) + 1
        return cls((xmin, ymin), float(resolution), nx, ny)

    def cell_centers(self) -> np.ndarray:
        """(ny*nx, 2) node positions in row-major (j, i) order."""
        ii, jj = np.meshgrid(np.arange(self.nx), np.arange(self.ny))
        return np.column_stack(
            [self.origin[0] + ii.ravel() * self.resolution, self.origin[1] + jj.ravel() * self.resolution]
        )

    def cells_in(self, poly: Polygon) -> tuple[np.ndarray, np.ndarray]:
        """(flat indices, positions) of the grid nodes inside or on ``poly``."""
        lo = poly.vertices.min(axis=0)
        hi = poly.vertices.max(axis=0)
        i0 = max(0, int(math.floor((lo[0] - self.origin[0]) / self.resolution)))
        i1 = min(self.nx - 1, int(math.ceil((hi[0] - self.origin[0]) / self.resolution)))
        j0 = max(0, int(math.floor((lo[1] - self.origin[1]) / self.resolution)))
        j1 = min(self.ny - 1, int(math.ceil((hi[1] - self.origin[1]) / self.resolution)))
        if i1 < i0 or j1 < j0:
            return np.empty(0, dtype=np.intp), np.empty((0, 2))
        ii, jj = np.meshgrid(np.arange(i0, i1 + 1), np.arange(j0, j1 + 1))
        ii, jj = ii.ravel(), jj.ravel()
        pos = np.column_stack([self.origin[0] + ii * self.resolution, self.origin[1] + jj * self.resolution])
        inside = poly.contains(pos)
        return (jj * self.nx + ii)[inside], pos[inside]

    def index_of(self, queries) -> np.ndarray:
        q = np.atleast_2d(np.asarray(queries, dtype=float))
        fi = (q[:, 0] - self.origin[0]) / self.resolution
        fj = (q[:, 1] - self.origin[1]) / self.resolution
        i, j = np.rint(fi), np.rint(fj)
        off = (np.abs(fi - i) > 1e-6) | (np.abs(fj - j) > 1e-6)
        off |= (i < 0) | (i >= self.nx) | (j < 0) | (j >= self.ny)
        if off.any():
            bad = q[np.argmax(off)]
            raise ValueError(f"query ({bad[0]:.6g}, {bad[1]:.6g}) is not on the map grid")
        return j.astype(np.intp) * self.nx + i.astype(np.intp)

    def copy(self) -> "GlobalMapDb":
        return GlobalMapDb(self.origin, self.resolution, self.nx, self.ny, self.p.copy(), self.seen.copy())


def merge_into_db(db: GlobalMapDb, hull: Polygon, queries, probs) -> GlobalMapDb:
    """Overwrite the cells of ``queries`` that fall inside ``hull``. Mutates and returns ``db``."""
    queries = np.atleast_2d(np.asarray(queries, dtype=float))
    probs = np.asarray(probs, dtype=float).reshape(-1)
    if len(queries) == 0:
        return db
    if len(queries) != len(probs):
        raise ValueError("queries and probabilities differ in length")
    flat = db.index_of(queries)
    inside = hull.contains(queries)
    flat = flat[inside]
    db.p.ravel()[flat] = np.clip(probs[inside], 0.0, 1.0)
    db.seen.ravel()[flat] = True
    return db
