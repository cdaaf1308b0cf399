"""Dilatation profiles ``Q``, their spherical means and the admissibility
integrals built from them.

A :class:`QProfile` wraps a vectorized field ``Q(x)`` around a center
``x0``; radial profiles also carry their exact spherical mean, which is
used in place of sphere quadrature whenever it is available.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from .errors import DegenerateProfile, InvalidArgument
from .quadrature import (QuadratureRule, annulus_integral, ball_integral, ball_volume,
                         default_rule, omega, radial_integral, radial_nodes,
                         sphere_integral)


@dataclass(frozen=True)
class QProfile:
    """An evaluable dilatation ``Q: B(center, radius) -> [0, inf]``.

    ``evaluate`` maps an array of points with coordinates on the last axis
    to an array of values. ``radial_mean`` (optional) maps an array of radii
    to the exact spherical means ``q(r)``.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    n: int
    center: np.ndarray = None
    radius: float = 1.0
    radial_mean: Optional[Callable[[np.ndarray], np.ndarray]] = None
    label: str = "Q"
    breaks: tuple = ()

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidArgument(f"dimension must be an integer >= 2, got {self.n}")
        c = np.zeros(self.n) if self.center is None else np.asarray(self.center, float).ravel()
        if c.shape != (self.n,):
            raise InvalidArgument("center dimension does not match n")
        object.__setattr__(self, "center", c)
        if not self.radius > 0:
            raise InvalidArgument("domain radius must be positive")

    def __call__(self, pts):
        return self.evaluate(np.asarray(pts, dtype=float))

    @classmethod
    def radial(cls, g: Callable, n: int, center=None, radius: float = 1.0,
               label: str = "Q", breaks=()) -> "QProfile":
        """Profile ``Q(x) = g(|x - center|)``; its spherical mean is ``g``."""
        c = np.zeros(n) if center is None else np.asarray(center, float)

        def evaluate(pts):
            return g(np.linalg.norm(np.asarray(pts) - c, axis=-1))

        return cls(evaluate, n, c, radius, radial_mean=g, label=label, breaks=tuple(breaks))

    def truncated(self, m: float) -> "QProfile":
        """``Q_m``: equal to ``Q`` for ``|x - x0| > 1/m`` and to 1 inside."""
        r0 = 1.0 / m
        c = self.center
        base, mean = self.evaluate, self.radial_mean

        def evaluate(pts):
            pts = np.asarray(pts, dtype=float)
            d = np.linalg.norm(pts - c, axis=-1)
            return np.where(d > r0, base(pts), 1.0)

        trunc_mean = None
        if mean is not None:
            def trunc_mean(r):
                r = np.asarray(r, dtype=float)
                return np.where(r > r0, mean(r), 1.0)
        return QProfile(evaluate, self.n, c, self.radius, trunc_mean, f"{self.label}_m{m:g}",
                        tuple(sorted({*self.breaks, r0})))


def _log_inv(r):
    with np.errstate(divide="ignore"):
        return np.log(1.0 / np.asarray(r, dtype=float))


def constant_profile(K: float, n: int, radius: float = 1.0) -> QProfile:
    return QProfile.radial(lambda r: np.full(np.shape(r), float(K)), n, radius=radius,
                           label=f"const:{K:g}")


def log_profile(n: int, radius: float = 1.0) -> QProfile:
    """``Q(x) = log(1/|x|)``, the standard unbounded FMO witness."""
    return QProfile.radial(_log_inv, n, radius=radius, label="log")


def log2_profile(n: int, radius: float = 1.0) -> QProfile:
    """``Q(x) = max(1, log^2(1/|x|))``: Dini-convergent when n = 2."""
    return QProfile.radial(lambda r: np.maximum(1.0, _log_inv(r) ** 2), n, radius=radius,
                           label="log2", breaks=(math.exp(-1.0),))


def powlog_profile(C: float, n: int, radius: float = 1.0, s: float = 0.0) -> QProfile:
    """``Q(x) = C log^{(1+s)(n-1)}(1/|x|)``; ``s = 0`` is the boundary case."""
    e = (1.0 + s) * (n - 1)
    return QProfile.radial(lambda r: C * _log_inv(r) ** e, n, radius=radius,
                           label=f"powlog:{C:g}" + (f",s={s:g}" if s else ""))


def named_profile(spec: str, n: int, radius: float = 1.0) -> QProfile:
    """Parse ``const:K``, ``log``, ``log2``, ``logmax`` or ``powlog:C``."""
    name, _, arg = spec.partition(":")
    try:
        if name == "const":
            return constant_profile(float(arg or 1.0), n, radius)
        if name == "log":
            return log_profile(n, radius)
        if name == "logmax":
            return QProfile.radial(lambda r: np.maximum(1.0, _log_inv(r)), n, radius=radius,
                                   label="logmax", breaks=(math.exp(-1.0),))
        if name == "log2":
            return log2_profile(n, radius)
        if name == "powlog":
            return powlog_profile(float(arg or 1.0), n, radius)
    except ValueError as exc:
        raise InvalidArgument(f"bad profile argument in {spec!r}") from exc
    raise InvalidArgument(f"unknown profile {spec!r}")


@dataclass(frozen=True)
class PsiFunction:
    """A nonnegative function on ``(lo, hi)`` used as an admissible weight."""

    evaluate: Callable[[np.ndarray], np.ndarray]
    label: str = "psi"
    lo: float = 0.0
    hi: float = math.inf
    breaks: tuple = ()

    def __call__(self, t):
        return self.evaluate(np.asarray(t, dtype=float))


def _rule(rule, n):
    return default_rule(n) if rule is None else rule


def q_mean(Q: QProfile, r, rule: QuadratureRule = None):
    """Spherical mean ``q(r)`` of ``Q`` over ``|x - x0| = r``."""
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0) or np.any(r_arr >= Q.radius):
        raise InvalidArgument(f"radius must lie in (0, {Q.radius})")
    if Q.radial_mean is not None:
        out = np.asarray(Q.radial_mean(r_arr), dtype=float)
        return float(out) if out.ndim == 0 else out
    rule = _rule(rule, Q.n)
    area = omega(Q.n)
    vals = np.array([sphere_integral(Q.evaluate, Q.center, float(ri), rule) / (area * ri ** (Q.n - 1))
                     for ri in np.atleast_1d(r_arr)])
    return float(vals[0]) if r_arr.ndim == 0 else vals.reshape(r_arr.shape)


def _q_on(Q, t, rule):
    # q at radii that may touch the domain radius from below only through
    # quadrature nodes; nodes are strictly inside (a, b) so this is safe.
    return np.asarray(q_mean(Q, t, rule), dtype=float)


def psi_integral(psi: PsiFunction, eps: float, eps0: float, rule: QuadratureRule = None) -> float:
    """``I(eps, eps0) = int_eps^eps0 psi(t) dt``."""
    if not (0.0 < eps < eps0):
        raise InvalidArgument(f"need 0 < eps < eps0, got eps={eps}, eps0={eps0}")
    return radial_integral(psi.evaluate, eps, eps0, _rule(rule, 2), psi.breaks)


@dataclass(frozen=True)
class Admissibility:
    value: float
    positive: bool
    divergent: bool


def check_admissible(psi: PsiFunction, eps: float, eps0: float, rule: QuadratureRule = None,
                     cap: float = 1e12) -> Admissibility:
    """Evaluate ``I`` and flag ``I = 0`` or a numerically infinite value."""
    v = psi_integral(psi, eps, eps0, rule)
    return Admissibility(v, v > 0.0, not math.isfinite(v) or v > cap)


def psi_canonical(t):
    """``1 / (t log(1/t))`` on ``(0, 1)``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0) or np.any(t_arr >= 1):
        raise InvalidArgument("psi_canonical is defined for 0 < t < 1")
    out = 1.0 / (t_arr * np.log(1.0 / t_arr))
    return float(out) if out.ndim == 0 else out


CANONICAL_PSI = PsiFunction(psi_canonical, "1/(t log(1/t))", 0.0, 1.0)


def psi_from_q(Q: QProfile, eps: float, eps0: float, rule: QuadratureRule = None,
               probe: int = 257) -> PsiFunction:
    """``psi(t) = 1/(t q(t)^{1/(n-1)})`` on ``(eps, eps0)`` and 0 outside.

    Raises :class:`DegenerateProfile` if ``q`` vanishes on two consecutive
    points of a log-spaced probe grid, i.e. on a subinterval at that
    resolution. Isolated zeros give ``psi = inf`` at a null set.
    """
    if not (0.0 < eps < eps0):
        raise InvalidArgument(f"need 0 < eps < eps0, got eps={eps}, eps0={eps0}")
    rule = _rule(rule, Q.n)
    tp = np.geomspace(eps, eps0, probe)[1:-1]
    qp = _q_on(Q, tp, rule)
    zero = qp <= 0.0
    if np.any(zero[1:] & zero[:-1]):
        raise DegenerateProfile("q vanishes on a subinterval; psi is infinite there")
    k = 1.0 / (Q.n - 1)

    def evaluate(t):
        t = np.asarray(t, dtype=float)
        inside = (t > eps) & (t < eps0)
        out = np.zeros(t.shape)
        if np.any(inside):
            ti = t[inside]
            q = _q_on(Q, ti, rule)
            with np.errstate(divide="ignore"):
                out[inside] = 1.0 / (ti * q ** k)
        return out if out.ndim else float(out)

    return PsiFunction(evaluate, f"1/(t q^(1/(n-1))) [{Q.label}]", eps, eps0, Q.breaks)


def dini_integrand(Q: QProfile, rule: QuadratureRule = None):
    """The function ``t -> 1/(t q(t)^{1/(n-1)})``."""
    rule = _rule(rule, Q.n)
    k = 1.0 / (Q.n - 1)

    def g(t):
        t = np.asarray(t, dtype=float)
        q = _q_on(Q, t, rule)
        with np.errstate(divide="ignore"):
            return 1.0 / (t * q ** k)

    return g


def inverse_mean_integral(Q: QProfile, a: float, b: float, rule: QuadratureRule = None) -> float:
    """``int_a^b dt / (t q(t)^{1/(n-1)})``."""
    if not (0.0 < a < b):
        raise InvalidArgument(f"need 0 < a < b, got a={a}, b={b}")
    rule = _rule(rule, Q.n)
    return radial_integral(dini_integrand(Q, rule), a, b, rule, Q.breaks)


@dataclass
class DiniResult:
    """Outcome of the divergence probe for ``int_0 dt/(t q^{1/(n-1)})``."""

    value: float
    diverges: bool
    eps: np.ndarray = field(repr=False)
    partials: np.ndarray = field(repr=False)
    tail_exponent: float = math.nan
    reason: str = ""


def _tail_integral(g, s0: float, rule: QuadratureRule, s_max: float = 700.0) -> float:
    # Remaining integral below t = exp(-s0), written in s = log(1/t):
    # int_{s0}^inf f(s) ds with f(s) = g(e^{-s}) e^{-s}. Quadrature covers
    # s <= s_max (t stays a normal float); beyond, f is extended by the
    # power law s^{-b} fitted on [s_max/2, s_max].
    def f(s):
        t = np.exp(-np.asarray(s, dtype=float))
        return np.asarray(g(t)) * t

    if s0 >= s_max:
        return 0.0
    head = radial_integral(f, s0, s_max, rule)
    f1, f2 = float(f(np.array([s_max / 2]))[0]), float(f(np.array([s_max]))[0])
    if f2 <= 0.0:
        return head
    b = math.log(f1 / f2) / math.log(2.0)
    if b <= 1.0:
        return math.inf
    return head + f2 * s_max / (b - 1.0)


def dini_integral(Q: QProfile, eps0: float, rule: QuadratureRule = None, *,
                  k_max: int = 40, increment: float = 0.05, window: int = 5,
                  exponent_margin: float = 0.1) -> DiniResult:
    """Probe ``int_0^eps0 dt / (t q(t)^{1/(n-1)})`` for divergence.

    Partial integrals ``J_k`` are accumulated over ``eps_k = eps0 2^{-k}``.
    The integral is declared divergent if the last ``window`` increments
    all exceed ``increment``, or if the increments decay no faster than
    ``u^{-(1 + exponent_margin)}`` in ``u = log(1/eps_k)`` (the harmonic
    boundary ``int du/u`` moves too slowly for the increment test alone).
    Otherwise the tail below ``eps_K`` is integrated and added.
    """
    if not eps0 > 0:
        raise InvalidArgument("eps0 must be positive")
    rule = _rule(rule, Q.n)
    g = dini_integrand(Q, rule)
    eps = eps0 * 2.0 ** -np.arange(k_max + 1)
    inc = np.array([radial_integral(g, eps[k], eps[k - 1], rule, Q.breaks)
                    for k in range(1, k_max + 1)])
    partials = np.concatenate([[0.0], np.cumsum(inc)])
    if not np.all(np.isfinite(partials)):
        return DiniResult(math.inf, True, eps, partials, math.nan, "non-finite partial integral")
    if np.all(inc[-window:] > increment):
        return DiniResult(math.inf, True, eps, partials, math.nan,
                          f"last {window} increments exceed {increment}")
    tail = slice(max(1, k_max - 15), k_max + 1)
    u = np.log(1.0 / eps[tail])
    di = inc[tail.start - 1:tail.stop - 1]
    positive = di > 0
    if positive.sum() >= 4 and np.all(u > 0):
        slope = np.polyfit(np.log(u[positive]), np.log(di[positive]), 1)[0]
        exponent = -slope
    else:
        exponent = math.inf
    if exponent <= 1.0 + exponent_margin:
        return DiniResult(math.inf, True, eps, partials, exponent,
                          f"increments decay like u^-{exponent:.3f}")
    s_last = math.log(1.0 / eps[-1])
    value = partials[-1] + (_tail_integral(g, s_last, rule) if s_last > 0 else 0.0)
    return DiniResult(float(value), False, eps, partials, float(exponent), "converges")


def fmo_oscillation(phi: Callable, x0, eps: float, rule: QuadratureRule = None) -> float:
    """Normalized mean oscillation of ``phi`` over the ball ``B(x0, eps)``."""
    x0 = np.asarray(x0, dtype=float).ravel()
    n = x0.size
    if not eps > 0:
        raise InvalidArgument("eps must be positive")
    rule = _rule(rule, n)
    vol = ball_volume(n) * eps ** n
    mean = ball_integral(phi, x0, eps, rule) / vol
    return ball_integral(lambda p: np.abs(phi(p) - mean), x0, eps, rule) / vol


@dataclass
class FMOReport:
    eps: np.ndarray
    values: np.ndarray
    max_value: float
    finite: Optional[bool]


def fmo_probe(phi: Callable, x0, rule: QuadratureRule = None, ks=range(4, 21),
              growth: float = 0.5) -> FMOReport:
    """Sweep the oscillation over ``eps = 2^{-k}``.

    ``finite`` is False when the last third of the sweep keeps increasing
    and the total rise across it exceeds ``growth``; None when the values
    are not finite.
    """
    eps = 2.0 ** -np.asarray(list(ks), dtype=float)
    vals = np.array([fmo_oscillation(phi, x0, e, rule) for e in eps])
    if not np.all(np.isfinite(vals)):
        return FMOReport(eps, vals, math.inf, None)
    tail = vals[-max(3, len(vals) // 3):]
    rising = np.all(np.diff(tail) > 0) and (tail[-1] - tail[0]) > growth
    return FMOReport(eps, vals, float(vals.max()), not rising)


@dataclass
class Theorem1Report:
    fmo: Optional[bool]
    fmo_max: float
    log_bound: bool
    log_constant: float
    dini_diverges: bool
    dini: DiniResult

    @property
    def any_holds(self) -> bool:
        return bool(self.fmo) or self.log_bound or self.dini_diverges


def log_bound_constant(Q: QProfile, eps0: float, rule: QuadratureRule = None, k_max: int = 40):
    """Smallest ``C`` with ``q(r) <= C log^{n-1}(1/r)`` on the probe radii.

    Returns ``(C, holds)``; ``holds`` is False when the ratio is still
    increasing at the small-radius end of the sweep.
    """
    r0 = min(eps0, 0.5, 0.999 * Q.radius)
    r = r0 * 2.0 ** -np.arange(k_max + 1)
    ratio = np.asarray(q_mean(Q, r, rule)) / np.log(1.0 / r) ** (Q.n - 1)
    head, tail = ratio[: k_max // 2], ratio[k_max // 2:]
    holds = bool(np.all(np.isfinite(ratio)) and tail.max() <= head.max() * (1 + 1e-9))
    return float(ratio.max()), holds


def check_theorem1_conditions(Q: QProfile, eps0: float, rule: QuadratureRule = None,
                              fmo_ks=range(4, 21)) -> Theorem1Report:
    """Evaluate the three sufficient conditions on ``Q`` at its center."""
    rule = _rule(rule, Q.n)
    ks = [k for k in fmo_ks if 2.0 ** -k < Q.radius]
    fmo = fmo_probe(Q.evaluate, Q.center, rule, ks)
    C, holds = log_bound_constant(Q, eps0, rule)
    dini = dini_integral(Q, min(eps0, 0.999 * Q.radius), rule)
    return Theorem1Report(fmo.finite, fmo.max_value, holds, C, dini.diverges, dini)


def weighted_annulus_integral(Q: QProfile, psi: PsiFunction, eps: float, eps0: float,
                              rule: QuadratureRule = None) -> float:
    """``int_{eps<|x-x0|<eps0} Q(x) psi^n(|x - x0|) dm``."""
    rule = _rule(rule, Q.n)
    n = Q.n
    if Q.radial_mean is not None:
        def g(t):
            with np.errstate(invalid="ignore"):
                return Q.radial_mean(t) * psi(t) ** n * t ** (n - 1)
        return omega(n) * radial_integral(g, eps, eps0, rule, (*Q.breaks, *psi.breaks))
    c = Q.center

    def F(p):
        return Q.evaluate(p) * psi(np.linalg.norm(p - c, axis=-1)) ** n
    return annulus_integral(F, c, eps, eps0, rule, (*Q.breaks, *psi.breaks))


@dataclass
class Eq26Report:
    eps: np.ndarray
    I: np.ndarray
    ratios: np.ndarray
    slope: float
    trends_to_zero: bool


def check_condition_eq26(Q: QProfile, psi: PsiFunction, eps0: float,
                         rule: QuadratureRule = None, k_max: int = 30,
                         slope_threshold: float = -0.5) -> Eq26Report:
    """Track ``int Q psi^n / I^n`` along ``eps = eps0 2^{-k}``.

    The ratio is judged to tend to zero when it is nonincreasing over the
    second half of the sweep and decays at least like ``I^{slope_threshold}``.
    """
    rule = _rule(rule, Q.n)
    eps = eps0 * 2.0 ** -np.arange(1, k_max + 1)
    I = np.array([psi_integral(psi, e, eps0, rule) for e in eps])
    if np.any(I <= 0):
        raise DegenerateProfile("I(eps, eps0) vanishes; psi is not admissible")
    W = np.array([weighted_annulus_integral(Q, psi, e, eps0, rule) for e in eps])
    with np.errstate(over="ignore", invalid="ignore"):
        ratios = W / I ** Q.n
    half = slice(k_max // 2, None)
    ok = np.all(np.isfinite(ratios[half])) and np.all(ratios[half] > 0)
    if ok and I[-1] > I[k_max // 2] * (1 + 1e-12):
        slope = float(np.polyfit(np.log(I[half]), np.log(ratios[half]), 1)[0])
    else:
        slope = math.nan
    decreasing = bool(ok and np.all(np.diff(ratios[half]) <= 1e-12 * ratios[half][:-1]))
    trends = decreasing and math.isfinite(slope) and slope <= slope_threshold
    return Eq26Report(eps, I, ratios, slope, trends)
