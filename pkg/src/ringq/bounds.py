"""Explicit distortion bounds for ring Q-mappings and their constants.

All bounds control the chordal distance ``h(f(x), f(x0))`` in terms of
``|x - x0|``. The constants come in one pack:

    alpha = 2 lambda^2,  beta = (omega/K)^{1/(n-1)},
    beta~ = (omega/(2K))^{1/(n-1)},  gamma = 1 - (p-1)/(n-1),

with ``lambda`` in ``[4, 2 e^{n-1})``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from .errors import InvalidArgument
from .geom import chordal
from .maps import MapFamily, radial_map_eval
from .modulus import check_lambda, default_lambda
from .qprofile import QProfile, _rule, inverse_mean_integral
from .quadrature import QuadratureRule, ball_volume, omega


@dataclass(frozen=True)
class BoundConstants:
    n: int
    lambda_n: float
    K: float
    p: float
    alpha_n: float
    beta_n: float
    beta_n_tilde: float
    gamma_np: float
    omega_prev: float
    ball_volume: float


def make_constants(n: int, K: float, p: float, lambda_choice: Optional[float] = None
                   ) -> BoundConstants:
    """Populate the constant pack; ``lambda_choice`` defaults to 4 for
    ``n = 2`` and to the midpoint of the admissible interval otherwise."""
    if int(n) != n or n < 2:
        raise InvalidArgument(f"dimension must be an integer >= 2, got {n}")
    if not K > 0:
        raise InvalidArgument("K must be positive")
    if not p > 0:
        raise InvalidArgument("p must be positive")
    if p > n:
        raise InvalidArgument(f"p must not exceed n = {n}")
    lam = check_lambda(n, default_lambda(n) if lambda_choice is None else lambda_choice)
    w = omega(n)
    k = 1.0 / (n - 1)
    return BoundConstants(int(n), lam, float(K), float(p), 2.0 * lam * lam,
                          (w / K) ** k, (w / (2.0 * K)) ** k, 1.0 - (p - 1.0) / (n - 1.0),
                          w, ball_volume(n))


def _unit_dist(dist):
    if not (0.0 < dist < 1.0):
        raise InvalidArgument(f"dist must lie in (0, 1), got {dist}")


def lemma6_bound(c: BoundConstants, delta: float, I_val: float) -> float:
    """``(alpha/delta) exp(-beta I^gamma)``; ``delta`` bounds the chordal
    diameter of the omitted set from below."""
    if not (0.0 < delta <= 1.0):
        raise InvalidArgument(f"delta must lie in (0, 1], got {delta}")
    if I_val < 0:
        raise InvalidArgument("I must be nonnegative")
    return c.alpha_n / delta * math.exp(-c.beta_n * I_val ** c.gamma_np)


def lemma1_bound(c: BoundConstants, I_val: float) -> float:
    """``alpha exp(-beta~ I^gamma)``, the form with the halved constant."""
    if I_val < 0:
        raise InvalidArgument("I must be nonnegative")
    return c.alpha_n * math.exp(-c.beta_n_tilde * I_val ** c.gamma_np)


def theorem3_bound(C_n: float, p: float, dist: float) -> float:
    """Logarithmic modulus of continuity ``C_n (1/log(1/dist))^p``."""
    _unit_dist(dist)
    if not (C_n > 0 and p > 0):
        raise InvalidArgument("C_n and p must be positive")
    return C_n * (1.0 / math.log(1.0 / dist)) ** p


def log_bound_constants(c: BoundConstants, eps0: float, delta: float = 1.0):
    """``(C_n, p)`` such that the exponential bound with the weight
    ``1/(t log(1/t))`` equals ``C_n (1/log(1/dist))^p`` exactly.

    For that weight ``I = log(log(1/dist)/log(1/eps0))``; with ``gamma = 1``
    the exponential bound becomes ``(alpha/delta) L0^beta / log(1/dist)^beta``,
    ``L0 = log(1/eps0)``.
    """
    if abs(c.gamma_np - 1.0) > 1e-12:
        raise InvalidArgument("the exact logarithmic form needs gamma = 1 (p = 1)")
    if not (0.0 < eps0 < 1.0):
        raise InvalidArgument("eps0 must lie in (0, 1)")
    L0 = math.log(1.0 / eps0)
    return c.alpha_n / delta * L0 ** c.beta_n, c.beta_n


def theorem4_bound(Q: QProfile, eps0: float, dist: float, alpha_n: float,
                   rule: QuadratureRule = None) -> float:
    """``alpha exp(-int_dist^eps0 dt/(t q(t)^{1/(n-1)}))``."""
    if not (0.0 < dist <= eps0):
        raise InvalidArgument(f"need 0 < dist <= eps0, got dist={dist}, eps0={eps0}")
    if dist == eps0:
        return float(alpha_n)
    return alpha_n * math.exp(-inverse_mean_integral(Q, dist, eps0, _rule(rule, Q.n)))


def cor1_bound(M: float, C: float, n: int, dist: float) -> float:
    """``M / log(1/dist)^{(1/C)^{1/(n-1)}}`` for ``q <= C log^{n-1}(1/t)``."""
    _unit_dist(dist)
    if not C > 0:
        raise InvalidArgument("C must be positive")
    return M / math.log(1.0 / dist) ** ((1.0 / C) ** (1.0 / (n - 1)))


def cor1_exponent(C: float, n: int) -> float:
    return (1.0 / C) ** (1.0 / (n - 1))


def fit_log_decay(dists, values):
    """Least-squares fit ``log v = log A - s log log(1/dist)``; returns ``(A, s)``."""
    d = np.asarray(dists, dtype=float)
    v = np.asarray(values, dtype=float)
    keep = (v > 0) & (d > 0) & (d < 1)
    if keep.sum() < 2:
        raise InvalidArgument("need at least two positive samples to fit")
    x = np.log(np.log(1.0 / d[keep]))
    slope, icept = np.polyfit(x, np.log(v[keep]), 1)
    return float(math.exp(icept)), float(-slope)


def decay_exponent_of_theorem4(Q: QProfile, eps0: float, dists, alpha_n: float = 1.0,
                               rule: QuadratureRule = None) -> float:
    """Regression exponent ``s`` of the integral bound against ``log(1/dist)``."""
    vals = [theorem4_bound(Q, eps0, d, alpha_n, rule) for d in dists]
    return fit_log_decay(dists, vals)[1]


@dataclass
class BoundRow:
    member: int
    radius: float
    measured: float
    bound: float

    @property
    def slack(self) -> float:
        return self.bound - self.measured


@dataclass
class BoundReport:
    label: str
    rows: List[BoundRow] = field(repr=False)
    violations: int
    sup_by_radius: np.ndarray = field(repr=False)
    fit: tuple
    bound_decays: bool

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["member", "radius", "measured", "bound", "slack"])
            for r in self.rows:
                w.writerow([r.member, repr(r.radius), repr(r.measured), repr(r.bound),
                            repr(r.slack)])


def check_bound_on_family(fam: MapFamily, bound: Callable[[float], float],
                          radii: Sequence[float], label: str = "bound") -> BoundReport:
    """Compare ``h(f(x), f(x0))`` at ``|x - x0| = r`` with ``bound(r)``.

    Violations are counted, not raised. ``fit`` is the logarithmic-decay
    fit ``(A, s)`` of the family supremum; ``bound_decays`` reports whether
    the bound at the smallest radius is below one tenth of its value at the
    largest.
    """
    radii = np.asarray(sorted(radii, reverse=True), dtype=float)
    e1 = np.zeros(fam.n)
    e1[0] = 1.0
    bvals = np.array([bound(float(r)) for r in radii])
    rows = []
    sup = np.zeros(len(radii))
    for m, f in zip(fam.ms, fam.members):
        y = radial_map_eval(f, fam.center + radii[:, None] * e1)
        h = chordal(y, f.value_at_center[None, :])
        sup = np.maximum(sup, h)
        rows.extend(BoundRow(m, float(r), float(hv), float(b))
                    for r, hv, b in zip(radii, h, bvals))
    viol = sum(1 for r in rows if r.measured > r.bound * (1 + 1e-12))
    try:
        fit = fit_log_decay(radii, sup)
    except InvalidArgument:
        fit = (math.nan, math.nan)
    return BoundReport(label, rows, viol, sup, fit, bool(bvals[-1] < 0.1 * bvals[0]))
