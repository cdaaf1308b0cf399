"""Region descriptors and their rasterization onto uniform node grids.

Compact plates are rasterized by a cover rule: a node belongs to the
discrete set when its distance to the set is at most half a grid step, and
the nearest node of every sample point is always included so small sets
never vanish. Open sets keep only the nodes strictly inside them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import InvalidArgument


def _vec(x) -> np.ndarray:
    return np.asarray(x, dtype=float).ravel()


@dataclass(frozen=True)
class Ball:
    """Ball ``|x - center| <= radius`` (closed as a plate, open as a domain)."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        if not self.radius > 0:
            raise InvalidArgument("ball radius must be positive")

    @property
    def n(self):
        return self.center.size

    def distance(self, pts):
        return np.maximum(np.linalg.norm(pts - self.center, axis=-1) - self.radius, 0.0)

    def inside(self, pts):
        return np.linalg.norm(pts - self.center, axis=-1) < self.radius

    def samples(self, spacing):
        return self.center[None, :]

    def bounds(self):
        return self.center - self.radius, self.center + self.radius


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        if not self.radius > 0:
            raise InvalidArgument("sphere radius must be positive")

    @property
    def n(self):
        return self.center.size

    def distance(self, pts):
        return np.abs(np.linalg.norm(pts - self.center, axis=-1) - self.radius)

    def samples(self, spacing):
        n = self.n
        if n == 2:
            k = max(8, math.ceil(2 * math.pi * self.radius / spacing))
            a = np.arange(k) * 2 * math.pi / k
            return self.center + self.radius * np.stack([np.cos(a), np.sin(a)], axis=1)
        k = max(16, math.ceil(4 * math.pi * self.radius ** 2 / spacing ** 2))
        rng = np.random.default_rng(7)
        d = rng.standard_normal((k, n))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        return self.center + self.radius * d

    def bounds(self):
        return self.center - self.radius, self.center + self.radius


@dataclass(frozen=True)
class Box:
    """Axis-aligned box; open as a domain, closed as a plate."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo, hi = _vec(self.lo), _vec(self.hi)
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise InvalidArgument("box needs lo < hi componentwise")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n(self):
        return self.lo.size

    def distance(self, pts):
        d = np.maximum(np.maximum(self.lo - pts, pts - self.hi), 0.0)
        return np.linalg.norm(d, axis=-1)

    def inside(self, pts, slack=0.0):
        return np.all((pts > self.lo + slack) & (pts < self.hi - slack), axis=-1)

    def samples(self, spacing):
        return (0.5 * (self.lo + self.hi))[None, :]

    def bounds(self):
        return self.lo, self.hi


@dataclass(frozen=True)
class PointSet:
    points: np.ndarray

    def __post_init__(self):
        p = np.atleast_2d(np.asarray(self.points, dtype=float))
        if p.size == 0:
            raise InvalidArgument("empty point set")
        object.__setattr__(self, "points", p)

    @property
    def n(self):
        return self.points.shape[1]

    def distance(self, pts):
        # a point at infinity (row of inf) is at infinite Euclidean distance;
        # chart-based callers pick it up through the samples instead
        fin = self.points[np.all(np.isfinite(self.points), axis=1)]
        flat = pts.reshape(-1, self.n)
        out = np.full(len(flat), np.inf)
        if len(fin) == 0:
            return out.reshape(pts.shape[:-1])
        tree = cKDTree(fin)
        ok = np.all(np.isfinite(flat), axis=1)
        out[ok] = tree.query(flat[ok])[0]
        return out.reshape(pts.shape[:-1])

    def samples(self, spacing):
        return self.points

    def bounds(self):
        return self.points.min(axis=0), self.points.max(axis=0)


@dataclass(frozen=True)
class Segment:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", _vec(self.a))
        object.__setattr__(self, "b", _vec(self.b))
        if self.a.shape != self.b.shape:
            raise InvalidArgument("segment endpoints differ in dimension")

    @property
    def n(self):
        return self.a.size

    def distance(self, pts):
        d = self.b - self.a
        L2 = float(d @ d)
        if L2 == 0.0:
            return np.linalg.norm(pts - self.a, axis=-1)
        s = np.clip(((pts - self.a) @ d) / L2, 0.0, 1.0)
        return np.linalg.norm(pts - (self.a + s[..., None] * d), axis=-1)

    def samples(self, spacing):
        L = float(np.linalg.norm(self.b - self.a))
        k = max(2, math.ceil(L / spacing) + 1)
        s = np.linspace(0.0, 1.0, k)
        return self.a + s[:, None] * (self.b - self.a)

    def bounds(self):
        return np.minimum(self.a, self.b), np.maximum(self.a, self.b)


@dataclass(frozen=True)
class Cells:
    """Union of closed grid cells ``lo + h*(idx + [0,1]^n)``."""

    indices: np.ndarray
    lo: np.ndarray
    h: float

    def __post_init__(self):
        idx = np.atleast_2d(np.asarray(self.indices, dtype=int))
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "lo", _vec(self.lo))

    @property
    def n(self):
        return self.lo.size

    def _boxes(self):
        lo = self.lo + self.h * self.indices
        return lo, lo + self.h

    def distance(self, pts):
        blo, bhi = self._boxes()
        flat = pts.reshape(-1, self.n)
        out = np.full(len(flat), np.inf)
        for lo, hi in zip(blo, bhi):
            d = np.maximum(np.maximum(lo - flat, flat - hi), 0.0)
            out = np.minimum(out, np.linalg.norm(d, axis=1))
        return out.reshape(pts.shape[:-1])

    def samples(self, spacing):
        blo, bhi = self._boxes()
        return 0.5 * (blo + bhi)

    def bounds(self):
        blo, bhi = self._boxes()
        return blo.min(axis=0), bhi.max(axis=0)


@dataclass(frozen=True)
class Union:
    parts: Tuple

    def __post_init__(self):
        if not self.parts:
            raise InvalidArgument("empty union")
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def n(self):
        return self.parts[0].n

    def distance(self, pts):
        return np.min([p.distance(pts) for p in self.parts], axis=0)

    def samples(self, spacing):
        return np.concatenate([p.samples(spacing) for p in self.parts])

    def bounds(self):
        b = [p.bounds() for p in self.parts]
        return np.min([x[0] for x in b], axis=0), np.max([x[1] for x in b], axis=0)


@dataclass(frozen=True)
class NodeMask:
    """A set given directly as a boolean mask on a specific grid."""

    mask: np.ndarray


@dataclass(frozen=True)
class Grid:
    """Uniform node grid ``lo + h * index`` with ``shape`` nodes per axis."""

    lo: np.ndarray
    h: float
    shape: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lo", _vec(self.lo))
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))
        if len(self.shape) != self.lo.size:
            raise InvalidArgument("grid shape does not match dimension")

    @classmethod
    def cube(cls, lo, hi, cells: int, n: int) -> "Grid":
        """Cubic grid on ``[lo, hi]^n`` with ``cells`` cells per axis."""
        h = (hi - lo) / cells
        return cls(np.full(n, float(lo)), h, (cells + 1,) * n)

    @classmethod
    def covering(cls, lo, hi, h: float) -> "Grid":
        lo, hi = _vec(lo), _vec(hi)
        cells = np.maximum(1, np.ceil((hi - lo) / h - 1e-9)).astype(int)
        return cls(lo, h, tuple(cells + 1))

    @property
    def n(self):
        return len(self.shape)

    @property
    def hi(self):
        return self.lo + self.h * (np.array(self.shape) - 1)

    def points(self) -> np.ndarray:
        axes = [self.lo[a] + self.h * np.arange(s) for a, s in enumerate(self.shape)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)

    def nearest_index(self, pts) -> np.ndarray:
        pts = np.atleast_2d(pts)
        idx = np.rint((pts - self.lo) / self.h).astype(np.int64)
        keep = np.all((idx >= 0) & (idx < np.array(self.shape)), axis=1)
        return idx[keep]


def cover_mask(region, grid: Grid, transform: Optional[Callable] = None,
               pts: Optional[np.ndarray] = None) -> np.ndarray:
    """Nodes within ``h/2`` of ``region``, plus the nearest node of each sample.

    With ``transform`` (a chordal isometry sending grid coordinates to the
    region's coordinates and back), distances are measured at the preimage
    with the tolerance rescaled by the ratio of chordal metric factors.
    """
    if isinstance(region, NodeMask):
        if region.mask.shape != grid.shape:
            raise InvalidArgument("node mask does not match the grid")
        return region.mask.astype(bool).copy()
    if pts is None:
        pts = grid.points()
    half = 0.5 * grid.h
    if transform is None:
        mask = region.distance(pts) <= half * (1 + 1e-9)
        samples = region.samples(half)
    else:
        y = transform(pts)
        finite = np.all(np.isfinite(y), axis=-1)
        yz = np.where(finite[..., None], y, 0.0)
        scale = (1.0 + np.sum(yz * yz, axis=-1)) / (1.0 + np.sum(pts * pts, axis=-1))
        d = region.distance(yz)
        mask = finite & (d <= half * scale * (1 + 1e-9))
        # sample spacing fine enough after the chart's local stretching
        raw = region.samples(half * 0.25)
        samples = transform(raw)
        samples = samples[np.all(np.isfinite(samples), axis=1)]
    idx = grid.nearest_index(samples)
    if len(idx):
        mask[tuple(idx.T)] = True
    return mask


def interior_mask(region, grid: Grid, pts: Optional[np.ndarray] = None) -> np.ndarray:
    """Nodes strictly inside an open region (Ball, Box or NodeMask)."""
    if isinstance(region, NodeMask):
        return region.mask.astype(bool).copy()
    if pts is None:
        pts = grid.points()
    if isinstance(region, Box):
        return region.inside(pts, slack=1e-9 * grid.h)
    if isinstance(region, Ball):
        return region.inside(pts)
    raise InvalidArgument(f"{type(region).__name__} cannot serve as an open domain")
