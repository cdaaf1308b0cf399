"""A modulus-based size functional of compact sets in compactified space.

For a compact ``E`` and a point ``x``,

    m_t(E, r, x) = M(Gamma(dB*(x, t), E cap cl B*(x, r)))

is the modulus of curves joining the chordal sphere of radius ``t`` about
``x`` to the part of ``E`` in the closed chordal ball of radius ``r``. With
``m(E, x) = m_{sqrt3/2}(E, sqrt2/2, x)``,

    c(E, x) = max(m(E, x), m(E, -x/|x|^2)),    c(E) = inf_x c(E, x).

A chordal isometry moves ``x`` to the origin, where chordal balls are
Euclidean balls; moduli are invariant under it, so each ``m_t`` is the
capacity of a Euclidean condenser solved on a grid.
"""
from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from ._energy import EnergyProblem, minimize
from .errors import InvalidArgument
from .geom import (ChordalChart, ExtPoint, antipodal, as_point, chordal_ball_chart_radius,
                   from_sphere, point_on_sphere)
from .quadrature import omega
from .regions import Ball, Grid, PointSet, Segment, Union, cover_mask

T_OUTER = math.sqrt(3.0) / 2.0
R_INNER = math.sqrt(2.0) / 2.0


def cap_bound(n: int) -> float:
    """``omega_{n-1} (log sqrt3)^{1-n}``: the value of ``m`` on a full cap."""
    return omega(n) * math.log(math.sqrt(3.0)) ** (1 - n)


@dataclass(frozen=True)
class CompactSet:
    """A compact set given by a region descriptor and its ambient dimension.

    Point sets may contain the point at infinity as a row of ``inf``.
    """

    region: object
    n: int
    label: str = "E"

    def __post_init__(self):
        if self.region.n != self.n:
            raise InvalidArgument("set descriptor dimension does not match n")


def point_set(points, label="points") -> CompactSet:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return CompactSet(PointSet(pts), pts.shape[1], label)


def segment_set(a, b, label="segment") -> CompactSet:
    s = Segment(a, b)
    return CompactSet(s, s.n, label)


def ball_set(center, radius, label="ball") -> CompactSet:
    b = Ball(center, radius)
    return CompactSet(b, b.n, label)


def chordal_cap(x, r: float, label="cap") -> CompactSet:
    """Closed chordal ball ``cl B*(x, r)`` as a Euclidean ball or ball complement.

    Only finite caps that are Euclidean balls (``h(x, inf) > r``) are
    supported.
    """
    x = as_point(x)
    if x.is_infinity:
        raise InvalidArgument("caps about infinity are not Euclidean balls")
    a = x.array
    s2 = float(a @ a)
    # h(x, y) <= r  <=>  |y - a|^2 (1) <= r^2 (1 + s2)(1 + |y|^2), a sphere in y
    k = r * r * (1.0 + s2)
    if k >= 1.0:
        raise InvalidArgument("this cap contains infinity")
    c = a / (1.0 - k)
    rad2 = float(c @ c) - (s2 - k) / (1.0 - k)
    return CompactSet(Ball(c, math.sqrt(max(rad2, 0.0))), x.n, label)


def load_set(path_or_text: str, n: Optional[int] = None) -> CompactSet:
    """Read a set from lines ``point x1..xn``, ``ball c1..cn r`` or
    ``segment a1..an b1..bn``; ``point inf`` is the point at infinity.
    Blank lines and ``#`` comments are ignored.
    """
    text = path_or_text
    if "\n" not in text:
        try:
            with open(text) as fh:
                text = fh.read()
        except OSError:
            pass
    pts, parts = [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        kind, *vals = line.split()
        try:
            if kind == "point" and vals == ["inf"]:
                pts.append(None)
                continue
            v = [float(s) for s in vals]
        except ValueError as exc:
            raise InvalidArgument(f"line {lineno}: bad number") from exc
        if kind == "point":
            d = len(v)
            pts.append(v)
        elif kind == "ball":
            d = len(v) - 1
            parts.append(Ball(v[:-1], v[-1]))
        elif kind == "segment":
            if len(v) % 2:
                raise InvalidArgument(f"line {lineno}: segment needs 2n numbers")
            d = len(v) // 2
            parts.append(Segment(v[:d], v[d:]))
        else:
            raise InvalidArgument(f"line {lineno}: unknown primitive {kind!r}")
        if n is None:
            n = d
        if d != n or d < 2:
            raise InvalidArgument(f"line {lineno}: expected dimension {n}")
    if n is None:
        raise InvalidArgument("empty set description")
    if pts:
        parts.append(PointSet([[math.inf] * n if p is None else p for p in pts]))
    region = parts[0] if len(parts) == 1 else Union(tuple(parts))
    return CompactSet(region, n, "loaded")


def _chart_grid(t: float, n: int, resolution: int) -> Grid:
    R = chordal_ball_chart_radius(t)
    return Grid.cube(-R, R, resolution, n)


def m_t_modulus(E: CompactSet, r: float, x, t: float, tol: float = 1e-8,
                resolution: int = 64) -> float:
    """Modulus of the curves joining ``dB*(x, t)`` to ``E cap cl B*(x, r)``.

    After the chart moves ``x`` to 0 the two chordal balls are Euclidean
    balls of radii ``R_r < R_t``; nodes with ``|z| >= R_t`` carry ``u = 0``
    and the cover nodes of ``E`` with ``|z| <= R_r + h/2`` carry ``u = 1``.
    Returns 0 when no such node exists.
    """
    if not (0.0 < r < t < 1.0):
        raise InvalidArgument(f"need 0 < r < t < 1, got r={r}, t={t}")
    x = as_point(x, E.n)
    if x.n != E.n:
        raise InvalidArgument("point and set dimensions differ")
    grid = _chart_grid(t, E.n, resolution)
    pts = grid.points()
    rad = np.linalg.norm(pts, axis=-1)
    chart = ChordalChart(x)
    plate = cover_mask(E.region, grid, transform=chart, pts=pts)
    plate &= rad <= chordal_ball_chart_radius(r) + 0.5 * grid.h
    if not plate.any():
        return 0.0
    outside = rad >= chordal_ball_chart_radius(t)
    prob = EnergyProblem(outside | plate, plate.astype(float), grid.h, E.n)
    return minimize(prob, tol=tol).energy


def m_standard(E: CompactSet, x, tol: float = 1e-8, resolution: int = 64) -> float:
    """``m(E, x)`` with outer radius ``sqrt3/2`` and inner radius ``sqrt2/2``."""
    return m_t_modulus(E, R_INNER, x, T_OUTER, tol, resolution)


def sphere_design(n: int) -> np.ndarray:
    """Unit vectors of ``{-1, 0, 1}^{n+1} \\ {0}``, normalized (26 for n = 2).

    These are points of the unit sphere in ``R^{n+1}``; the design is closed
    under ``s -> -s``, which is the antipodal map of compactified space.
    """
    v = np.array([p for p in itertools.product((-1.0, 0.0, 1.0), repeat=n + 1) if any(p)])
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _ext_from_sphere(s) -> ExtPoint:
    n = len(s) - 1
    if s[-1] > 1.0 - 1e-14:
        return ExtPoint.infinity(n)
    return ExtPoint.finite(from_sphere(np.asarray(s)))


@dataclass
class CSetResult:
    c_value: float
    argmin_x: ExtPoint
    search: List[ExtPoint] = field(repr=False)
    c_values: np.ndarray = field(repr=False)
    m_values: np.ndarray = field(repr=False)


def _tangent_basis(s):
    # orthonormal basis of the tangent space of the sphere at s
    q, _ = np.linalg.qr(np.column_stack([s, np.eye(len(s))]))
    return q[:, 1:].T


def c_set(E: CompactSet, x_grid: Optional[Sequence] = None, tol: float = 1e-8,
          resolution: int = 64, refine: Optional[int] = None) -> CSetResult:
    """Upper approximation of ``c(E)`` by a search over candidate points.

    The default search set is :func:`sphere_design` (it contains 0 and
    infinity), refined ``refine`` times (default 2) around the current best
    candidate with half the previous angular step. An explicit ``x_grid``
    is searched as given unless ``refine`` is set. Ties go to the lowest
    index.
    """
    n = E.n
    if x_grid is None:
        S = list(sphere_design(n))
        refine = 2 if refine is None else refine
    else:
        S = [point_on_sphere(as_point(p, n)) for p in x_grid]
        if not S:
            raise InvalidArgument("empty search set")
        refine = 0 if refine is None else refine
    cache = {}

    def m_at(s):
        key = tuple(np.round(s, 12))
        if key not in cache:
            cache[key] = m_standard(E, _ext_from_sphere(s), tol, resolution)
        return cache[key]

    def c_at(s):
        # the antipodal map -x/|x|^2 is s -> -s on the sphere
        return max(m_at(s), m_at(-s))

    cvals = [c_at(s) for s in S]
    step = math.pi / 4.0
    for _ in range(refine):
        best = S[int(np.argmin(cvals))]
        step *= 0.5
        for d in _tangent_basis(best):
            for sgn in (1.0, -1.0):
                s = math.cos(step) * best + math.sin(step) * sgn * d
                S.append(s / np.linalg.norm(s))
                cvals.append(c_at(S[-1]))
    cvals = np.array(cvals)
    i = int(np.argmin(cvals))
    mvals = np.array([m_at(s) for s in S])
    return CSetResult(float(cvals[i]), _ext_from_sphere(S[i]),
                      [_ext_from_sphere(s) for s in S], cvals, mvals)


def c_at_point(E: CompactSet, x, tol: float = 1e-8, resolution: int = 64) -> float:
    """``c(E, x) = max(m(E, x), m(E, antipodal(x)))``."""
    x = as_point(x, E.n)
    return max(m_standard(E, x, tol, resolution), m_standard(E, antipodal(x), tol, resolution))


@dataclass(frozen=True)
class LowerBound:
    c_n: float
    value: float
    raw_min_form: float
    branch: str
    note: str = "up to cited constants"


def lemma9_lower_bound(c_fC: float, c_Ef: float, beta_vu: float = 1.0, a_vu: float = 1.0,
                       n: int = 2, h_fC: Optional[float] = None) -> LowerBound:
    """Lower estimate of the modulus joining two sets via their ``c`` values.

    ``c_n = min(beta_vu, beta_vu a_vu / cap_bound(n))``; the returned value is
    ``c_n h c_Ef`` with ``h`` the chordal diameter of the first set (default
    ``min(1, c_fC / a_vu)``, the diameter implied by ``c >= a_vu h``), and
    ``raw_min_form`` is ``beta_vu min(c_fC, c_Ef)``.
    """
    if not (beta_vu > 0 and a_vu > 0):
        raise InvalidArgument("beta_vu and a_vu must be positive")
    if c_fC < 0 or c_Ef < 0:
        raise InvalidArgument("set-function values must be nonnegative")
    cb = cap_bound(n)
    first, second = beta_vu, beta_vu * a_vu / cb
    c_n = min(first, second)
    branch = "beta_vu" if first <= second else "beta_vu*a_vu/cap"
    h = min(1.0, c_fC / a_vu) if h_fC is None else h_fC
    if not 0.0 <= h <= 1.0:
        raise InvalidArgument("chordal diameter must lie in [0, 1]")
    return LowerBound(c_n, c_n * h * c_Ef, beta_vu * min(c_fC, c_Ef), branch)


def lemma9_equicontinuity_estimate(alpha_eps: float, c_n: float, delta: float) -> float:
    """Chordal-diameter estimate ``alpha(eps) / (c_n delta)``."""
    if not delta > 0:
        raise InvalidArgument("delta must be positive")
    if not c_n > 0:
        raise InvalidArgument("c_n must be positive")
    if alpha_eps < 0:
        raise InvalidArgument("alpha must be nonnegative")
    return alpha_eps / (c_n * delta)


def fit_diameter_constant(c_values, diameters) -> float:
    """Largest ``a`` with ``c(E) >= a h(E)`` over the probe sets."""
    c = np.asarray(c_values, dtype=float)
    d = np.asarray(diameters, dtype=float)
    keep = d > 0
    if not keep.any():
        raise InvalidArgument("need sets of positive diameter")
    return float(np.min(c[keep] / d[keep]))


def write_probe_csv(rows, path) -> None:
    """Rows ``(set_id, x, m, c)`` where ``x`` is printed as coordinates or ``inf``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["set_id", "x", "m", "c"])
        for sid, x, m, c in rows:
            xs = "inf" if x.is_infinity else " ".join(repr(v) for v in x.coords)
            w.writerow([sid, xs, repr(float(m)), repr(float(c))])
