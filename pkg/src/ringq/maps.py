"""Radial stretch maps ``x -> x0 + (x - x0)/|x - x0| rho(|x - x0|)``.

The main construction is the family ``f_m`` whose radial profile solves
``rho'/rho = 1/(r q_m(r)^{1/(n-1)})`` with ``rho(1) = 1``, where ``q_m``
is the spherical mean of a dilatation truncated to 1 on ``|x| <= 1/m``.
Its inner dilatation equals ``q_m`` and the image of every spherical ring
is a spherical ring, so ring moduli are available in closed form.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import DegenerateProfile, InvalidArgument, OutOfDomain
from .geom import chordal
from .modulus import ring_modulus_exact
from .qprofile import (QProfile, dini_integral, inverse_mean_integral, q_mean,
                       _rule)
from .quadrature import QuadratureRule, _gauss_legendre, omega, radial_integral


@dataclass(frozen=True)
class RadialMap:
    """Radial stretch about ``center`` with increasing profile ``rho``.

    ``rho`` is vectorized on ``(0, radius)``. ``kinks`` lists radii where
    ``rho`` is only one-sidedly differentiable.
    """

    center: np.ndarray
    rho: Callable[[np.ndarray], np.ndarray]
    n: int
    radius: float = 1.0
    value_at_center: Optional[np.ndarray] = None
    label: str = "f"
    kinks: tuple = ()

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).ravel()
        if c.shape != (self.n,):
            raise InvalidArgument("center dimension does not match n")
        object.__setattr__(self, "center", c)
        v = np.zeros(self.n) if self.value_at_center is None else \
            np.asarray(self.value_at_center, dtype=float).ravel()
        object.__setattr__(self, "value_at_center", v)
        r = self.radius * np.geomspace(1e-6, 1.0 - 1e-6, 64)
        vals = np.asarray(self.rho(r), dtype=float)
        if not np.all(np.diff(vals) > 0):
            raise InvalidArgument("rho must be strictly increasing")

    def __call__(self, x):
        return radial_map_eval(self, x)


def radial_map_eval(f: RadialMap, x) -> np.ndarray:
    """Image of one point or an array of points (coordinates on the last axis)."""
    x = np.asarray(x, dtype=float)
    d = x - f.center
    r = np.linalg.norm(d, axis=-1)
    if np.any(r >= f.radius):
        raise OutOfDomain(f"point outside the ball of radius {f.radius}")
    at0 = r == 0.0
    rs = np.where(at0, 1.0, r)
    scale = np.where(at0, 0.0, np.asarray(f.rho(rs), dtype=float) / rs)
    return f.value_at_center + d * scale[..., None]


class _RhoTable:
    """``rho(r) = exp(-int_r^1 dt/(t q^{1/(n-1)}))`` with cached partial sums.

    The interval ``[r_floor, 1]`` is split at log-uniform nodes (plus any
    kink radii); the integral from a node to 1 is stored, and the remainder
    from ``r`` to the next node is done by Gauss-Legendre in ``log t``.
    Below ``r_floor`` the profile is extended by ``rho(r) = (r/r_floor)
    rho(r_floor)``, exact when ``q = 1`` there.
    """

    def __init__(self, g: Callable, r_floor: float, kinks=(), nodes: int = 4096,
                 points: int = 16):
        self.g = g
        edges = set(np.geomspace(r_floor, 1.0, nodes).tolist())
        edges |= {k for k in kinks if r_floor < k < 1.0}
        self.edges = np.array(sorted(edges))
        self.edges[-1] = 1.0
        self.x, self.w = _gauss_legendre(points)
        seg = self._piece(self.edges[:-1], self.edges[1:])
        # tail[i] = integral from edges[i] to 1
        self.tail = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
        self.r_floor = r_floor

    def _piece(self, a, b):
        a, b = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float))
        la, lb = np.log(a), np.log(b)
        half = 0.5 * (lb - la)
        s = 0.5 * (la + lb)[..., None] + half[..., None] * self.x
        t = np.exp(s)
        vals = np.asarray(self.g(t.ravel()), dtype=float).reshape(t.shape)
        return np.sum(self.w * vals * t, axis=-1) * half

    def integral(self, r):
        """``int_r^1 dt/(t q^{1/(n-1)})`` for ``r_floor <= r <= 1``."""
        r = np.asarray(r, dtype=float)
        i = np.searchsorted(self.edges, r, side="right")
        i = np.clip(i, 1, len(self.edges) - 1)
        right = self.edges[i]
        out = self.tail[i] + self._piece(r, right)
        return np.where(r >= 1.0, 0.0, out)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        low = r < self.r_floor
        rr = np.where(low, self.r_floor, r)
        val = np.exp(-self.integral(rr))
        return np.where(low, val * r / self.r_floor, val)


def _check_q_at_least_one(Q: QProfile, rule, probe: int = 257):
    r = np.geomspace(1e-8, 1.0, probe)[:-1] * min(1.0, Q.radius)
    q = np.asarray(q_mean(Q, r, rule), dtype=float)
    if np.any(q < 1.0 - 1e-12):
        bad = float(r[np.argmax(q < 1.0 - 1e-12)])
        raise InvalidArgument(f"Q must be >= 1 on the unit ball (q({bad:.3g}) < 1)")


def rho_m_build(Q: QProfile, m: int, n: Optional[int] = None,
                rule: QuadratureRule = None, nodes: int = 4096,
                check: bool = True) -> RadialMap:
    """The map ``f_m`` built from ``Q`` truncated to 1 on ``|x| <= 1/m``.

    ``rho_m(1) = 1``; for ``r <= 1/m``, ``rho_m(r) = m r rho_m(1/m)``.
    """
    n = Q.n if n is None else n
    if n != Q.n:
        raise InvalidArgument("dimension does not match the profile")
    if int(m) != m or m < 1:
        raise InvalidArgument("m must be a positive integer")
    if Q.radius < 1.0:
        raise InvalidArgument("the profile must be defined on the unit ball")
    rule = _rule(rule, n)
    if check:
        _check_q_at_least_one(Q, rule)
    Qm = Q.truncated(m)
    k = 1.0 / (n - 1)
    r0 = 1.0 / m

    def g(t):
        q = np.asarray(q_mean(Qm, np.minimum(t, np.nextafter(1.0, 0.0)), rule), dtype=float)
        return 1.0 / (t * q ** k)

    kinks = tuple(sorted({r0, *[b for b in Q.breaks if 0 < b < 1]}))
    if m == 1:
        rho = lambda r: np.asarray(r, dtype=float) * 1.0
        return RadialMap(Q.center, rho, n, 1.0, None, f"f_1[{Q.label}]", kinks)
    table = _RhoTable(g, r0, kinks, nodes)
    return RadialMap(Q.center, table, n, 1.0, None, f"f_{m}[{Q.label}]", kinks)


@dataclass
class MapFamily:
    members: List[RadialMap]
    ms: List[int]
    Q: QProfile

    def __post_init__(self):
        if not self.members:
            raise InvalidArgument("empty family")
        f0 = self.members[0]
        for f in self.members:
            if f.n != f0.n or not np.allclose(f.center, f0.center, atol=1e-12, rtol=0):
                raise InvalidArgument("family members must share n and center")

    @property
    def n(self):
        return self.members[0].n

    @property
    def center(self):
        return self.members[0].center


def truncation_family(Q: QProfile, ms: Sequence[int], rule: QuadratureRule = None,
                    nodes: int = 4096) -> MapFamily:
    """``[f_m for m in ms]`` for a profile ``Q >= 1``."""
    rule = _rule(rule, Q.n)
    _check_q_at_least_one(Q, rule)
    members = [rho_m_build(Q, int(m), Q.n, rule, nodes, check=False) for m in ms]
    return MapFamily(members, [int(m) for m in ms], Q)


def pushforward_ring_modulus(Q: QProfile, r1: float, r2: float, n: Optional[int] = None,
                             rule: QuadratureRule = None) -> float:
    """Modulus of the image of the ring family ``r1 < |x| < r2`` under the
    radial map built from ``Q``: ``omega / (int dt/(t q^{1/(n-1)}))^{n-1}``.
    """
    n = Q.n if n is None else n
    if not (0.0 < r1 < r2 < Q.radius):
        raise InvalidArgument(f"need 0 < r1 < r2 < {Q.radius}")
    rule = _rule(rule, n)
    probe = np.geomspace(r1, r2, 130)[1:-1]
    qp = np.asarray(q_mean(Q, probe, rule), dtype=float)
    zero = qp <= 0.0
    if np.any(zero[1:] & zero[:-1]):
        raise DegenerateProfile("q vanishes on a subinterval of the ring")
    J = inverse_mean_integral(Q, r1, r2, rule)
    if not math.isfinite(J):
        raise DegenerateProfile("the inverse-mean integral is not finite")
    return omega(n) / J ** (n - 1)


def map_ring_modulus(f: RadialMap, r1: float, r2: float) -> float:
    """Modulus of ``f(Gamma(S(r1), S(r2), ring))``: the image is the ring
    between the spheres of radii ``rho(r1)`` and ``rho(r2)``."""
    rho = np.asarray(f.rho(np.array([r1, r2])), dtype=float)
    return ring_modulus_exact(float(rho[0]), float(rho[1]), f.n)


@dataclass
class RingQReport:
    lhs: float
    rhs: np.ndarray = field(repr=False)
    slack: np.ndarray = field(repr=False)
    worst_slack: float
    violations: int
    extremal_rhs: float
    extremal_slack: float
    extremal_violation: bool

    @property
    def total_violations(self) -> int:
        return self.violations + int(self.extremal_violation)


def random_densities(r1: float, r2: float, samples: int, seed: int, panels: int = 64):
    """Piecewise-constant densities on ``panels`` equal subintervals with
    unit integral; entries are exponential draws from a fixed seed."""
    rng = np.random.default_rng(seed)
    vals = rng.exponential(1.0, size=(samples, panels))
    width = (r2 - r1) / panels
    vals /= vals.sum(axis=1, keepdims=True) * width
    return np.linspace(r1, r2, panels + 1), vals


def verify_ring_q_inequality(f: RadialMap, Q: QProfile, r1: float, r2: float,
                             eta_samples: int = 100, seed: int = 0,
                             rule: QuadratureRule = None, rtol: float = 1e-9,
                             panels: int = 64) -> RingQReport:
    """Test ``M(f(Gamma)) <= int Q eta^n`` on the ring ``r1 < |x - x0| < r2``.

    ``eta`` runs over ``eta_samples`` random admissible step densities and,
    separately, over the extremal density ``1/(t q^{1/(n-1)} I)`` of ``Q``.
    A violation means ``rhs < lhs (1 - rtol)``; slack is ``rhs/lhs - 1``.
    """
    if eta_samples < 1:
        raise InvalidArgument("eta_samples must be >= 1")
    if not (0.0 < r1 < r2 < min(f.radius, Q.radius)):
        raise InvalidArgument("the ring must lie inside the domain")
    n = f.n
    rule = _rule(rule, n)
    lhs = map_ring_modulus(f, r1, r2)
    edges, eta = random_densities(r1, r2, eta_samples, seed, panels)

    def qt(t):
        return np.asarray(q_mean(Q, t, rule), dtype=float) * t ** (n - 1)

    mass = np.array([radial_integral(qt, a, b, rule, Q.breaks)
                     for a, b in zip(edges[:-1], edges[1:])])
    rhs = omega(n) * (eta ** n) @ mass
    slack = rhs / lhs - 1.0
    violations = int(np.sum(rhs < lhs * (1.0 - rtol)))
    # extremal density: int Q eta^n = omega / I^{n-1}
    I = inverse_mean_integral(Q, r1, r2, rule)
    k = 1.0 / (n - 1)

    def ext(t):
        q = np.asarray(q_mean(Q, t, rule), dtype=float)
        return q * (1.0 / (t * q ** k * I)) ** n * t ** (n - 1)

    ext_rhs = omega(n) * radial_integral(ext, r1, r2, rule, Q.breaks)
    ext_slack = ext_rhs / lhs - 1.0
    return RingQReport(lhs, rhs, slack, float(min(slack.min(), ext_slack)), violations,
                       ext_rhs, ext_slack, bool(ext_rhs < lhs * (1.0 - rtol)))


def _derivative(rho, r, step, kinks):
    # central differences, second-order one-sided next to a kink
    near = [k for k in kinks if abs(r - k) < 2.5 * step]
    if not near:
        v = np.asarray(rho(np.array([r - step, r + step])), dtype=float)
        return (v[1] - v[0]) / (2 * step)
    k = near[0]
    s = step if r >= k else -step
    v = np.asarray(rho(np.array([r, r + s, r + 2 * s])), dtype=float)
    return (-3 * v[0] + 4 * v[1] - v[2]) / (2 * s)


def inner_dilatation_radial(f: RadialMap, r: float, rel_step: float = 1e-6) -> float:
    """Inner dilatation ``|J| / l^n`` of a radial map at radius ``r``.

    With radial stretch ``a = rho'(r)`` and tangential stretch
    ``b = rho(r)/r`` (multiplicity ``n - 1``), ``J = a b^{n-1}`` and
    ``l = min(a, b)``.
    """
    if not (0.0 < r < f.radius):
        raise OutOfDomain(f"radius must lie in (0, {f.radius})")
    step = rel_step * r
    step = min(step, 0.5 * (f.radius - r))
    a = _derivative(f.rho, r, step, f.kinks)
    if not a > 0:
        raise InvalidArgument(f"rho is not increasing at r={r}")
    b = float(np.asarray(f.rho(np.array([r])))[0]) / r
    n = f.n
    if a == b:
        return 1.0
    J = a * b ** (n - 1)
    return J / min(a, b) ** n


@dataclass
class EquicontinuityReport:
    ms: List[int]
    radii: np.ndarray
    table: np.ndarray = field(repr=False)
    sup_by_radius: np.ndarray = field(repr=False)
    own_radius_values: np.ndarray = field(repr=False)
    sigma: float
    C: float
    below_sigma: int

    def rows(self):
        """``(m, r, h)`` rows of the chordal-distance table."""
        return [(m, float(r), float(self.table[i, j]))
                for i, m in enumerate(self.ms) for j, r in enumerate(self.radii)]

    @property
    def sup_decreasing(self) -> bool:
        """Whether the family supremum shrinks strictly as the radius does."""
        order = np.argsort(self.radii)
        return bool(np.all(np.diff(self.sup_by_radius[order]) > 0))


def equicontinuity_experiment(fam: MapFamily, radii: Sequence[float],
                              rule: QuadratureRule = None) -> EquicontinuityReport:
    """Chordal distances ``h(f_m(x), f_m(x0))`` for ``|x - x0| = r``.

    Also records ``|f_m(x_m) - f_m(x0)|`` at ``|x_m - x0| = 1/m`` and the
    lower level ``sigma = exp(-C)`` with ``C = int_0^1 dt/(t q^{1/(n-1)})``
    (``sigma = 0`` when that integral diverges): ``rho_m(1/m)`` equals
    ``exp(-int_{1/m}^1 ...) >= exp(-C)`` for every ``m``.
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(radii <= 0) or np.any(radii >= 1):
        raise InvalidArgument("radii must lie in (0, 1)")
    n = fam.n
    e1 = np.zeros(n)
    e1[0] = 1.0
    table = np.empty((len(fam.members), len(radii)))
    own = np.empty(len(fam.members))
    for i, (m, f) in enumerate(zip(fam.ms, fam.members)):
        x = fam.center + radii[:, None] * e1
        y = radial_map_eval(f, x)
        table[i] = chordal(y, f.value_at_center[None, :])
        if 1.0 / m < 1.0:
            own[i] = float(np.asarray(f.rho(np.array([1.0 / m])))[0])
        else:
            own[i] = 1.0
    dini = dini_integral(fam.Q, 1.0, _rule(rule, n))
    C = dini.value
    sigma = 0.0 if dini.diverges else math.exp(-C)
    below = int(np.sum(own < sigma * (1.0 - 1e-12)))
    return EquicontinuityReport(list(fam.ms), radii, table, table.max(axis=0), own, sigma, C,
                                below)


def write_family_csv(report: EquicontinuityReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "r", "h_value"])
        for m, r, h in report.rows():
            w.writerow([m, repr(r), repr(h)])
