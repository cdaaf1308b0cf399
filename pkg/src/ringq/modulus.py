"""Moduli of ring families, condenser capacities on grids, and capacity bounds.

The capacity of a condenser ``(A, C)`` is the infimum of the n-Dirichlet
energy over functions that equal 1 on ``C`` and vanish outside ``A``. On a
uniform node grid the infimum is taken over nodal functions with the same
boundary data, which gives an upper estimate of the discrete problem's
value at every iterate.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from scipy import ndimage

from ._energy import EnergyProblem, SolveResult, minimize
from .errors import ConvergenceError, InvalidArgument
from .quadrature import omega
from .regions import Ball, Box, Grid, NodeMask, cover_mask, interior_mask

INFINITE_CAPACITY = 1e12


def ring_modulus_exact(r1: float, r2: float, n: int) -> float:
    """Modulus of the curves joining ``|x| = r1`` to ``|x| = r2`` in the ring.

    ``omega_{n-1} (log(r2/r1))^{1-n}``; this is also the capacity of the
    spherical condenser ``(B(r2), closed B(r1))``.
    """
    if not (0.0 < r1 < r2):
        raise InvalidArgument(f"need 0 < r1 < r2, got r1={r1}, r2={r2}")
    L = math.log(r2 / r1)
    if L <= 0.0:
        return math.inf
    return omega(n) * L ** (1 - n)


def _touch_structure(n):
    # nodes sharing a grid cell are within one step in every coordinate
    return np.ones((3,) * n, dtype=bool)


def _cells_of(mask):
    """Cells whose ``2^n`` corners all lie in ``mask``."""
    n = mask.ndim
    out = np.ones(tuple(s - 1 for s in mask.shape), dtype=bool)
    for s in np.ndindex(*(2,) * n):
        out &= mask[tuple(slice(s[a], s[a] + mask.shape[a] - 1) for a in range(n))]
    return out


@dataclass
class Condenser:
    """A condenser ``(A, C)`` discretized on a uniform grid.

    Parameters
    ----------
    A : Ball, Box or NodeMask
        Bounded open set. ``u`` vanishes at every node outside ``A``.
    C : region
        Compact plate inside ``A``; ``u = 1`` on its cover nodes.
    resolution : int
        Cells per axis across the bounding box of ``A`` (ignored when a
        ``grid`` is given).
    grid : Grid, optional
        Explicit grid, e.g. to compare nested condensers on the same nodes.
    """

    A: object
    C: object
    n: Optional[int] = None
    resolution: int = 64
    grid: Optional[Grid] = None
    inside: np.ndarray = field(init=False, repr=False)
    plate: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.grid is None:
            if isinstance(self.A, NodeMask):
                raise InvalidArgument("a node-mask domain needs an explicit grid")
            if self.resolution < 2:
                raise InvalidArgument("resolution must be at least 2 cells")
            lo, hi = self.A.bounds()
            side = float(np.max(hi - lo))
            # one extra cell on each side so the whole boundary of A is resolved
            h = side / self.resolution
            self.grid = Grid.covering(lo - h, hi + h, h)
        else:
            self.resolution = max(self.grid.shape) - 1
        g = self.grid
        if self.n is None:
            self.n = g.n
        if self.n != g.n:
            raise InvalidArgument("condenser dimension does not match the grid")
        pts = g.points()
        self.inside = interior_mask(self.A, g, pts)
        self.plate = cover_mask(self.C, g, pts=pts)
        if not self.plate.any():
            raise InvalidArgument("the plate C is empty on this grid")
        outside = ~self.inside
        if np.any(self.plate & outside):
            raise InvalidArgument("the plate C is not contained in A")
        near = ndimage.binary_dilation(outside, _touch_structure(self.n))
        if np.any(self.plate & near):
            raise InvalidArgument(
                "the plate C touches the boundary of A at this resolution")

    @property
    def h(self) -> float:
        return self.grid.h


@dataclass
class CapacityResult:
    value: float
    iterations: int
    residual: float
    resolution: int
    u: Optional[np.ndarray] = field(default=None, repr=False)
    grid: Optional[Grid] = field(default=None, repr=False)
    history: List[float] = field(default_factory=list, repr=False)


def _result(sol: SolveResult, grid: Grid, resolution: int) -> CapacityResult:
    return CapacityResult(sol.energy, sol.iterations, sol.residual, resolution,
                          sol.u, grid, list(sol.history))


def capacity_numeric(E: Condenser, tol: float = 1e-8, p: Optional[float] = None,
                     max_iter: int = 100) -> CapacityResult:
    """Minimize the discrete ``p``-energy of ``E`` (``p = n`` by default).

    Raises
    ------
    ConvergenceError
        If the relative energy decrement is still above ``tol`` after
        ``max_iter`` iterations; ``exc.result`` holds the last iterate as
        a :class:`CapacityResult`.
    """
    if not tol > 0:
        raise InvalidArgument("tol must be positive")
    p = E.n if p is None else p
    fixed = ~E.inside | E.plate
    prob = EnergyProblem(fixed, E.plate.astype(float), E.h, p)
    try:
        sol = minimize(prob, tol=tol, max_iter=max_iter)
    except ConvergenceError as exc:
        raise ConvergenceError(str(exc), _result(exc.result, E.grid, E.resolution)) from None
    return _result(sol, E.grid, E.resolution)


def _domain_grid(domain, resolution):
    lo, hi = domain.bounds()
    h = float(np.max(hi - lo)) / resolution
    return Grid.covering(lo - h, hi + h, h)


def modulus_connecting(Eset, Fset, domain, tol: float = 1e-8, resolution: int = 64,
                       grid: Optional[Grid] = None, p: Optional[float] = None,
                       cap: float = INFINITE_CAPACITY, max_iter: int = 100) -> float:
    """Modulus of the curves joining ``Eset`` to ``Fset`` inside ``domain``.

    Computed as the minimal energy with ``u = 1`` on ``Eset`` and ``u = 0``
    on ``Fset``; the boundary of ``domain`` carries no condition, so the
    value is symmetric in the two sets. Sets that share or neighbour a grid
    cell give ``inf`` (the discrete value would exceed ``cap``).

    Raises
    ------
    InvalidArgument
        If the two sets overlap in a grid neighbourhood (a node of one set
        whose whole cell star lies in both).
    """
    if grid is None:
        if isinstance(domain, NodeMask):
            raise InvalidArgument("a node-mask domain needs an explicit grid")
        grid = _domain_grid(domain, resolution)
    pts = grid.points()
    n = grid.n
    p = n if p is None else p
    inside = interior_mask(domain, grid, pts)
    mE = cover_mask(Eset, grid, pts=pts)
    mF = cover_mask(Fset, grid, pts=pts)
    if not mE.any() or not mF.any():
        raise InvalidArgument("both sets must be nonempty on the grid")
    both = mE & mF
    star = _touch_structure(n)
    if np.any(ndimage.binary_erosion(both, star)):
        raise InvalidArgument("the two sets overlap")
    if both.any() or np.any(ndimage.binary_dilation(mE, star) & mF):
        return math.inf
    cells = _cells_of(inside | mE | mF)
    prob = EnergyProblem(mE | mF, mE.astype(float), grid.h, p, cell_mask=cells)
    sol = minimize(prob, tol=tol, max_iter=max_iter)
    return math.inf if sol.energy > cap else sol.energy


def lemma4_capacity_bound(F_val: float, I_val: float, n: int) -> float:
    """Upper bound ``F / I^n`` for the capacity of an image condenser.

    ``F_val`` is the weighted integral of ``Q psi^n`` over the annulus and
    ``I_val`` the admissibility integral of ``psi``.
    """
    if not I_val > 0:
        raise InvalidArgument("I must be positive")
    if F_val < 0:
        raise InvalidArgument("the weighted integral must be nonnegative")
    return F_val / I_val ** n


def lambda_range(n: int):
    """Admissible interval ``[4, 2 e^{n-1})`` for the constant lambda_n."""
    return 4.0, 2.0 * math.exp(n - 1)


def default_lambda(n: int) -> float:
    if n == 2:
        return 4.0
    lo, hi = lambda_range(n)
    return 0.5 * (lo + hi)


def check_lambda(n: int, lam: float) -> float:
    lo, hi = lambda_range(n)
    if not (lo <= lam < hi):
        raise InvalidArgument(f"lambda_n must lie in [{lo}, {hi:.6g}), got {lam}")
    return float(lam)


def capacity_lower_bound_eq17(h_image: float, h_complement: float, n: int,
                              lambda_n: Optional[float] = None) -> float:
    """Lower capacity bound from the chordal diameters of a plate and of
    the complement of the condenser's domain:
    ``omega_{n-1} / log(2 lambda_n^2 / (h_image h_complement))^{n-1}``.
    """
    for name, v in (("h_image", h_image), ("h_complement", h_complement)):
        if not (0.0 < v <= 1.0):
            raise InvalidArgument(f"{name} must lie in (0, 1], got {v}")
    lam = check_lambda(n, default_lambda(n) if lambda_n is None else lambda_n)
    return omega(n) / math.log(2.0 * lam * lam / (h_image * h_complement)) ** (n - 1)


# field export: CSV with a dimension header, or a small binary container

_MAGIC = b"RQFD"


def write_field(path, u: np.ndarray, grid: Optional[Grid] = None, fmt: str = "csv") -> None:
    """Write a grid field in row-major order.

    CSV layout: ``# shape s0 s1 ...`` and ``# lo l0 l1 ... h`` header lines,
    then one value per line. Binary layout: ``RQFD``, int32 ndim, int32
    shape, float64 lo and h, then float64 values (little endian).
    """
    u = np.ascontiguousarray(u, dtype=float)
    lo = np.zeros(u.ndim) if grid is None else grid.lo
    h = 1.0 if grid is None else grid.h
    if fmt == "csv":
        with open(path, "w") as fh:
            fh.write("# shape " + " ".join(str(s) for s in u.shape) + "\n")
            fh.write("# lo " + " ".join(repr(float(v)) for v in lo) + f" h {h!r}\n")
            np.savetxt(fh, u.ravel(), fmt="%.17g")
    elif fmt == "bin":
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<i", u.ndim))
            fh.write(struct.pack(f"<{u.ndim}i", *u.shape))
            fh.write(struct.pack(f"<{u.ndim + 1}d", *lo, h))
            fh.write(u.astype("<f8").tobytes())
    else:
        raise InvalidArgument(f"unknown field format {fmt!r}")


def read_field(path):
    """Inverse of :func:`write_field`; returns ``(u, grid)``."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == _MAGIC:
        with open(path, "rb") as fh:
            fh.read(4)
            (nd,) = struct.unpack("<i", fh.read(4))
            shape = struct.unpack(f"<{nd}i", fh.read(4 * nd))
            vals = struct.unpack(f"<{nd + 1}d", fh.read(8 * (nd + 1)))
            u = np.frombuffer(fh.read(), dtype="<f8").reshape(shape).copy()
        return u, Grid(np.array(vals[:nd]), vals[nd], shape)
    with open(path) as fh:
        shape = tuple(int(s) for s in fh.readline().split()[2:])
        parts = fh.readline().split()[2:]
        lo = np.array([float(v) for v in parts[:-2]])
        h = float(parts[-1])
        u = np.loadtxt(fh).reshape(shape)
    return u, Grid(lo, h, shape)
