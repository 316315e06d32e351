"""PGM and CSV serialisation of worlds, maps and layers."""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .bhm import GlobalMapDb


def _tokens(data: bytes, count: int, pos: int = 0):
    """Read ``count`` whitespace-separated header tokens, skipping ``#`` comments."""
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos : pos + 1].isspace():
            pos += 1
        if pos < n and data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ValueError("truncated PGM header")
        out.append(data[start:pos])
    return out, pos


def read_pgm(path) -> np.ndarray:
    """Read a P2 or P5 PGM into a (rows, cols) uint8/uint16 array, first row on top."""
    data = Path(path).read_bytes()
    (magic, w, h, maxval), pos = _tokens(data, 4)
    w, h, maxval = int(w), int(h), int(maxval)
    if w < 1 or h < 1 or not 0 < maxval < 65536:
        raise ValueError(f"{path}: bad PGM header ({w}x{h}, maxval {maxval})")
    if magic == b"P5":
        pos += 1  # single whitespace byte before the raster
        dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
        raster = np.frombuffer(data, dtype=dtype, count=w * h, offset=pos)
        return raster.reshape(h, w).astype(np.uint8 if maxval < 256 else np.uint16)
    if magic == b"P2":
        vals, _ = _tokens(data, w * h, pos)
        return np.array([int(v) for v in vals], dtype=np.uint16 if maxval > 255 else np.uint8).reshape(h, w)
    raise ValueError(f"{path}: not a P2/P5 PGM file")


def write_pgm(path, img: np.ndarray) -> None:
    """Write an 8-bit binary (P5) PGM; ``img[0]`` becomes the top row."""
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError("PGM image must be 2D")
    img = np.clip(img, 0, 255).astype(np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def occupancy_to_gray(p: np.ndarray) -> np.ndarray:
    """p=0 -> 255 (free, white), p=1 -> 0, p=0.5 -> 128. Grid row 0 (min y) ends up at the bottom."""
    g = np.floor(255.0 * (1.0 - np.asarray(p, dtype=float)) + 0.5)
    return g.astype(np.uint8)[::-1]


def entropy_to_gray(h: np.ndarray) -> np.ndarray:
    """0 nats -> 0, ln 2 -> 255."""
    g = np.floor(255.0 * np.asarray(h, dtype=float) / math.log(2.0) + 0.5)
    return np.clip(g, 0, 255).astype(np.uint8)[::-1]


def write_map_pgm(path, db: GlobalMapDb) -> None:
    write_pgm(path, occupancy_to_gray(db.p))


def write_map_csv(path, db: GlobalMapDb) -> None:
    """One ``x,y,p`` row per grid node, full float precision."""
    xy = db.cell_centers()
    p = db.p.ravel()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y", "p"])
        for (x, y), v in zip(xy.tolist(), p.tolist()):
            w.writerow([repr(x), repr(y), repr(v)])


def read_map_csv(path) -> GlobalMapDb:
    """Rebuild a grid from ``x,y,p`` rows. The grid geometry is inferred from the coordinates."""
    rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if rows.shape[1] != 3:
        raise ValueError(f"{path}: expected x,y,p columns")
    xs, ys = np.unique(rows[:, 0]), np.unique(rows[:, 1])
    nx, ny = len(xs), len(ys)
    if nx * ny != len(rows):
        raise ValueError(f"{path}: rows do not form a full grid")
    span, n = (xs[-1] - xs[0], nx) if nx > 1 else (ys[-1] - ys[0], ny)
    # coordinates were printed from origin + k*res; 12 digits recovers res exactly
    res = float(f"{span / (n - 1):.12g}") if n > 1 else 1.0
    db = GlobalMapDb((float(xs[0]), float(ys[0])), res, nx, ny)
    i = np.searchsorted(xs, rows[:, 0])
    j = np.searchsorted(ys, rows[:, 1])
    db.p[j, i] = rows[:, 2]
    db.seen[j, i] = rows[:, 2] != 0.5
    return db
