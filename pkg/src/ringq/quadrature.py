"""Deterministic quadrature on spheres, radial intervals and annuli.

Radial integrals are done in the logarithmic variable ``t = exp(s)`` with
composite Gauss-Legendre panels, which keeps integrands such as
``1/(t log(1/t))`` smooth down to very small radii. Sphere rules are
symmetric under every coordinate reflection, so integrands that are odd in
one coordinate cancel to rounding error, and their weights sum exactly to
the sphere area.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import EvaluationError, InvalidArgument


def omega(n: int) -> float:
    """Area of the unit sphere in ``R^n``: ``2 pi^{n/2} / Gamma(n/2)``."""
    if int(n) != n or n < 2:
        raise InvalidArgument(f"dimension must be an integer >= 2, got {n}")
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def ball_volume(n: int) -> float:
    """Volume of the unit ball in ``R^n``."""
    if int(n) != n or n < 2:
        raise InvalidArgument(f"dimension must be an integer >= 2, got {n}")
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


@dataclass(frozen=True)
class QuadratureRule:
    """Node counts for nested radial x spherical quadrature.

    ``radial_points`` is the number of Gauss-Legendre nodes per panel and
    ``panel_width`` the maximal panel length in ``log t``.
    """

    n: int = 2
    radial_points: int = 16
    sphere_samples: int = 256
    panel_width: float = 1.0
    seed: int = 20240607

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise InvalidArgument(f"dimension must be an integer >= 2, got {self.n}")
        if self.radial_points < 8:
            raise InvalidArgument("radial_points must be >= 8")
        if self.sphere_samples < 64:
            raise InvalidArgument("sphere_samples must be >= 64")
        if not self.panel_width > 0:
            raise InvalidArgument("panel_width must be positive")


def default_rule(n: int) -> QuadratureRule:
    return QuadratureRule(n=n)


@lru_cache(maxsize=64)
def _gauss_legendre(k: int):
    x, w = np.polynomial.legendre.leggauss(k)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def radial_nodes(a: float, b: float, rule: QuadratureRule, breaks=()):
    """Nodes ``t`` and weights for ``int_a^b g(t) dt`` with ``0 < a < b``.

    The weights already contain the Jacobian ``t`` of ``t = exp(s)``.
    Panels are split at any of ``breaks`` inside ``(a, b)``.
    """
    if not (0.0 < a < b):
        raise InvalidArgument(f"need 0 < a < b, got a={a}, b={b}")
    inner = sorted(c for c in breaks if a * (1 + 1e-12) < c < b * (1 - 1e-12))
    if inner:
        cuts = [a, *inner, b]
        parts = [radial_nodes(lo, hi, rule) for lo, hi in zip(cuts[:-1], cuts[1:])]
        return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])
    la, lb = math.log(a), math.log(b)
    panels = max(1, math.ceil((lb - la) / rule.panel_width)) if math.isfinite(rule.panel_width) else 1
    x, w = _gauss_legendre(rule.radial_points)
    edges = np.linspace(la, lb, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    s = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    ws = (half[:, None] * w[None, :]).ravel()
    t = np.exp(s)
    return t, ws * t


def _evaluate(f: Callable, pts: np.ndarray) -> np.ndarray:
    try:
        vals = np.asarray(f(pts), dtype=float)
    except Exception as exc:  # user callables may raise anything
        raise EvaluationError(f"field evaluation failed: {exc}") from exc
    if vals.shape != pts.shape[:-1]:
        try:
            vals = np.broadcast_to(vals, pts.shape[:-1])
        except ValueError as exc:
            raise EvaluationError(
                f"field returned shape {vals.shape}, expected {pts.shape[:-1]}") from exc
    if np.any(np.isnan(vals)):
        raise EvaluationError("field returned NaN")
    return vals


def radial_integral(g: Callable, a: float, b: float, rule: QuadratureRule,
                    breaks=()) -> float:
    """``int_a^b g(t) dt`` for a vectorized scalar function ``g``."""
    t, w = radial_nodes(a, b, rule, breaks)
    try:
        vals = np.asarray(g(t), dtype=float)
    except Exception as exc:
        raise EvaluationError(f"radial function evaluation failed: {exc}") from exc
    if np.any(np.isnan(vals)):
        raise EvaluationError("radial function returned NaN")
    vals = np.broadcast_to(vals, t.shape)
    # 0 * inf at nodes where a weight is zero does not occur: weights are > 0
    return float(np.sum(w * vals))


def _fibonacci_sphere(k: int) -> np.ndarray:
    i = np.arange(k) + 0.5
    z = 1.0 - 2.0 * i / k
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    rho = np.sqrt(1.0 - z * z)
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=1)


@lru_cache(maxsize=32)
def sphere_nodes(n: int, samples: int, seed: int = 20240607):
    """Unit directions and equal weights summing to ``omega(n)``.

    n = 2: uniform angles offset by half a step (reflection symmetric).
    n = 3: Fibonacci spiral, symmetrized over all coordinate reflections.
    n >= 4: normalized Gaussian directions from a fixed seed, symmetrized.
    """
    if n == 2:
        k = max(4, 4 * math.ceil(samples / 4))
        ang = (np.arange(k) + 0.5) * 2.0 * math.pi / k
        dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    else:
        base = max(1, math.ceil(samples / 2 ** n))
        if n == 3:
            core = _fibonacci_sphere(base)
        else:
            rng = np.random.default_rng(seed)
            core = rng.standard_normal((base, n))
            core /= np.linalg.norm(core, axis=1, keepdims=True)
        signs = np.array(np.meshgrid(*([[1.0, -1.0]] * n), indexing="ij")).reshape(n, -1).T
        dirs = (signs[:, None, :] * core[None, :, :]).reshape(-1, n)
    w = np.full(len(dirs), omega(n) / len(dirs))
    dirs.setflags(write=False)
    w.setflags(write=False)
    return dirs, w


def _center(x0, n: int) -> np.ndarray:
    x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).ravel()
    if x0.shape != (n,):
        raise InvalidArgument(f"center must have {n} coordinates")
    return x0


def sphere_integral(f: Callable, x0, r: float, rule: QuadratureRule) -> float:
    """Surface integral of ``f`` over the sphere ``|x - x0| = r``."""
    if not r > 0:
        raise InvalidArgument(f"radius must be positive, got {r}")
    x0 = _center(x0, rule.n)
    dirs, w = sphere_nodes(rule.n, rule.sphere_samples, rule.seed)
    vals = _evaluate(f, x0 + r * dirs)
    return float(r ** (rule.n - 1) * np.sum(w * vals))


def annulus_integral(F: Callable, x0, eps: float, eps0: float, rule: QuadratureRule,
                     breaks=()) -> float:
    """Volume integral of ``F`` over ``eps < |x - x0| < eps0``.

    ``breaks`` lists radii where ``F`` is not smooth.
    """
    if not (0.0 < eps < eps0):
        raise InvalidArgument(f"need 0 < eps < eps0, got eps={eps}, eps0={eps0}")
    x0 = _center(x0, rule.n)
    t, wt = radial_nodes(eps, eps0, rule, breaks)
    dirs, ws = sphere_nodes(rule.n, rule.sphere_samples, rule.seed)
    pts = x0 + t[:, None, None] * dirs[None, :, :]
    vals = _evaluate(F, pts)
    shell = vals @ ws
    with np.errstate(invalid="ignore"):
        contrib = wt * t ** (rule.n - 1) * shell
    return float(np.sum(contrib))


def radial_annulus_integral(g: Callable, eps: float, eps0: float, n: int,
                            rule: QuadratureRule, breaks=()) -> float:
    """Annulus integral of a radial field ``g(|x - x0|)``: ``omega * int g t^{n-1}``."""
    return omega(n) * radial_integral(lambda t: g(t) * t ** (n - 1), eps, eps0, rule, breaks)


def ball_integral(F: Callable, x0, eps: float, rule: QuadratureRule,
                  floor: float = 1e-12, breaks=()) -> float:
    """Integral over ``B(x0, eps)`` truncated at radius ``floor * eps``."""
    return annulus_integral(F, x0, floor * eps, eps, rule, breaks)
