"""Points of the compactified space, the chordal metric and its isometries.

The chordal metric is the Euclidean distance between stereographic images
on the sphere of diameter one resting on the origin, so every distance
lies in ``[0, 1]``. Finite points are plain coordinate vectors; the point
at infinity is carried by :class:`ExtPoint`.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import InvalidArgument

ATOL = 1e-12


@dataclass(frozen=True)
class ExtPoint:
    """A point of the one-point compactification of n-space.

    ``coords`` is ``None`` exactly for the point at infinity.
    """

    n: int
    coords: Optional[tuple] = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidArgument(f"dimension must be an integer >= 2, got {self.n}")
        if self.coords is not None:
            c = tuple(float(v) for v in self.coords)
            if len(c) != self.n:
                raise InvalidArgument(f"expected {self.n} coordinates, got {len(c)}")
            if not all(np.isfinite(c)):
                raise InvalidArgument("finite points need finite coordinates")
            object.__setattr__(self, "coords", c)

    @classmethod
    def finite(cls, coords: Sequence[float]) -> "ExtPoint":
        coords = tuple(np.asarray(coords, dtype=float).ravel())
        return cls(len(coords), coords)

    @classmethod
    def infinity(cls, n: int) -> "ExtPoint":
        return cls(n, None)

    @property
    def is_infinity(self) -> bool:
        return self.coords is None

    @property
    def array(self) -> np.ndarray:
        if self.coords is None:
            raise InvalidArgument("the point at infinity has no coordinates")
        return np.array(self.coords)

    def __repr__(self):
        if self.coords is None:
            return f"ExtPoint(inf, n={self.n})"
        return f"ExtPoint({list(self.coords)})"


def as_point(x, n: Optional[int] = None) -> ExtPoint:
    """Coerce an array-like, ``None``/``inf`` or ExtPoint into an ExtPoint."""
    if isinstance(x, ExtPoint):
        return x
    if x is None or (np.isscalar(x) and np.isinf(x)):
        if n is None:
            raise InvalidArgument("dimension needed to build the point at infinity")
        return ExtPoint.infinity(n)
    return ExtPoint.finite(x)


def chordal(x, y) -> np.ndarray:
    """Vectorized chordal distance between arrays of finite points.

    Points live on the last axis; the usual broadcasting rules apply.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    num = np.linalg.norm(x - y, axis=-1)
    den = np.sqrt(1.0 + np.sum(x * x, axis=-1)) * np.sqrt(1.0 + np.sum(y * y, axis=-1))
    return num / den


def chordal_to_infinity(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return 1.0 / np.sqrt(1.0 + np.sum(x * x, axis=-1))


def chordal_distance(x, y) -> float:
    """Chordal distance ``h(x, y)`` between two points of compactified space."""
    if not isinstance(x, ExtPoint) and not isinstance(y, ExtPoint):
        x, y = as_point(x), as_point(y)
    else:
        n = x.n if isinstance(x, ExtPoint) else y.n
        x, y = as_point(x, n), as_point(y, n)
    if x.n != y.n:
        raise InvalidArgument(f"dimension mismatch: {x.n} vs {y.n}")
    if x.is_infinity and y.is_infinity:
        return 0.0
    if x.is_infinity:
        return float(chordal_to_infinity(y.array))
    if y.is_infinity:
        return float(chordal_to_infinity(x.array))
    return float(chordal(x.array, y.array))


def chordal_diameter(points: Iterable) -> float:
    """Largest pairwise chordal distance of a finite point list."""
    pts = list(points)
    if not pts:
        raise InvalidArgument("chordal diameter of an empty list")
    if len(pts) == 1:
        return 0.0
    n = next((p.n for p in pts if isinstance(p, ExtPoint)), None)
    pts = [as_point(p, n) for p in pts]
    finite = np.array([p.array for p in pts if not p.is_infinity])
    has_inf = any(p.is_infinity for p in pts)
    best = 0.0
    if len(finite) > 1:
        if len(finite) <= 2048:
            d = chordal(finite[:, None, :], finite[None, :, :])
            best = float(d.max())
        else:
            best = max(float(chordal(a, b)) for a, b in combinations(finite, 2))
    if has_inf and len(finite):
        best = max(best, float(chordal_to_infinity(finite).max()))
    return best


def antipodal(x) -> ExtPoint:
    """The map ``x -> -x/|x|^2``, with ``0 <-> infinity``.

    On the sphere this is the antipodal point, so ``h(x, antipodal(x)) = 1``.
    """
    x = as_point(x)
    if x.is_infinity:
        return ExtPoint.finite(np.zeros(x.n))
    a = x.array
    r2 = float(a @ a)
    if r2 == 0.0:
        return ExtPoint.infinity(x.n)
    return ExtPoint.finite(-a / r2)


# Stereographic projection onto the unit sphere of R^{n+1}; the chordal
# metric is half the Euclidean distance between these images.

def to_sphere(x) -> np.ndarray:
    """Unit-sphere image ``(2x, |x|^2 - 1)/(|x|^2 + 1)`` of finite points."""
    x = np.asarray(x, dtype=float)
    r2 = np.sum(x * x, axis=-1, keepdims=True)
    return np.concatenate([2.0 * x, r2 - 1.0], axis=-1) / (r2 + 1.0)


def from_sphere(s) -> np.ndarray:
    """Inverse of :func:`to_sphere`; the north pole maps to ``inf`` entries."""
    s = np.asarray(s, dtype=float)
    top = 1.0 - s[..., -1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = s[..., :-1] / top
    out = np.where(top <= 1e-300, np.inf, out)
    return out


def point_on_sphere(x: ExtPoint) -> np.ndarray:
    if x.is_infinity:
        s = np.zeros(x.n + 1)
        s[-1] = 1.0
        return s
    return to_sphere(x.array)


class ChordalChart:
    """Chordal isometry of compactified space sending ``x`` to the origin.

    Implemented as the Householder reflection of the unit sphere that swaps
    the image of ``x`` with the south pole. It is its own inverse, preserves
    the chordal metric, and as a Moebius map preserves moduli of curve
    families, so chordal balls about ``x`` become Euclidean balls about 0.
    """

    def __init__(self, x: ExtPoint):
        self.x = x
        self.n = x.n
        # sigma(x) minus the south pole is proportional to (x, |x|^2);
        # forming it directly avoids cancellation for x near 0
        if x.is_infinity:
            v = np.zeros(self.n + 1)
            v[-1] = 1.0
        else:
            a = x.array
            v = np.append(a, a @ a)
        nv = float(v @ v)
        self._v = None if nv == 0.0 else v / np.sqrt(nv)

    def _reflect(self, s: np.ndarray) -> np.ndarray:
        if self._v is None:
            return s
        return s - 2.0 * (s @ self._v)[..., None] * self._v

    def __call__(self, pts) -> np.ndarray:
        """Map finite points (last axis = coordinates). ``inf`` rows allowed."""
        pts = np.asarray(pts, dtype=float)
        inf_rows = ~np.all(np.isfinite(pts), axis=-1)
        s = to_sphere(np.where(inf_rows[..., None], 0.0, pts))
        if np.any(inf_rows):
            north = np.zeros(self.n + 1)
            north[-1] = 1.0
            s = np.where(inf_rows[..., None], north, s)
        return from_sphere(self._reflect(s))

    inverse = __call__

    def map_point(self, p: ExtPoint) -> ExtPoint:
        s = self._reflect(point_on_sphere(p))
        if s[-1] > 1.0 - 1e-15:
            return ExtPoint.infinity(self.n)
        return ExtPoint.finite(from_sphere(s))


def chordal_ball_chart_radius(t: float) -> float:
    """Euclidean radius of the chart image of a chordal ball of radius ``t``.

    ``h(0, y) < t`` iff ``|y| < t / sqrt(1 - t^2)``.
    """
    if not 0.0 < t < 1.0:
        raise InvalidArgument(f"chordal radius must lie in (0, 1), got {t}")
    return t / np.sqrt(1.0 - t * t)
