"""Command-line front end.

Every subcommand writes one table (CSV with a header row, or JSON with one
object per row) to ``--output`` or standard output. Exit codes: 0 on
success, 1 on invalid arguments, 2 when a solver does not converge.

Table schemas
-------------
capacity   n, grid, plate, exact, numeric, rel_error, iterations, residual
modulus    n, profile, r1, r2, ring_modulus, image_modulus
qmean      profile, r, q
fmo        profile, k, eps, oscillation
dini       profile, eps0, diverges, value, reason
bounds     dist, lemma6, lemma1, theorem3, theorem4, cor1
family     m, r, h_value
setfn      set_id, x, m, c
verify-eq2 eta, lhs, rhs, slack, violation
report-all criterion, name, passed, measured
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import List, Optional

import numpy as np
from threadpoolctl import threadpool_limits

from . import acceptance, bounds, maps, modulus, qprofile, setfn
from .errors import ConvergenceError, InvalidArgument, RingQError
from .quadrature import QuadratureRule
from .regions import Ball, Cells


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: error: {message}")


def _plain(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        if math.isnan(v) or math.isinf(v):
            return repr(v)
        return v
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_plain(x) for x in v]
    return v


def _cell(v):
    v = _plain(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    return str(v)


def _emit(rows: List[dict], columns: List[str], args) -> None:
    if args.format == "json":
        text = json.dumps([{c: _plain(r[c]) for c in columns} for r in rows], indent=1,
                          sort_keys=False) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r[c]) for c in columns])
        text = buf.getvalue()
    if args.output and args.output != "-":
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _rule(args):
    return QuadratureRule(n=args.n, radial_points=args.quad_points)


def _check_common(args):
    if args.n < 2:
        raise InvalidArgument("--n must be >= 2")
    if args.grid < 16:
        raise InvalidArgument("--grid must be >= 16")
    if not args.tol > 0:
        raise InvalidArgument("--tol must be positive")
    if args.quad_points < 8:
        raise InvalidArgument("--quad-points must be >= 8")


def cmd_capacity(args):
    n, g = args.n, args.grid
    if args.cell:
        h = 2.0 / g
        mid = g // 2
        plate = Cells([[mid] * n], np.full(n, -1.0), h)
        E = modulus.Condenser(Ball(np.zeros(n), 1.0), plate, resolution=g)
        exact, label = math.nan, "cell"
    else:
        r1, r2 = args.ring
        if not (0.0 < r1 < r2):
            raise InvalidArgument("--ring needs 0 < r1 < r2")
        E = modulus.Condenser(Ball(np.zeros(n), r2), Ball(np.zeros(n), r1), resolution=g)
        exact, label = modulus.ring_modulus_exact(r1, r2, n), f"ball:{r1!r}"
    res = modulus.capacity_numeric(E, tol=args.tol)
    if args.export_field:
        modulus.write_field(args.export_field, res.u, res.grid, args.field_format)
    err = abs(res.value / exact - 1.0) if math.isfinite(exact) else math.nan
    _emit([dict(n=n, grid=g, plate=label, exact=exact, numeric=res.value, rel_error=err,
                iterations=res.iterations, residual=res.residual)],
          ["n", "grid", "plate", "exact", "numeric", "rel_error", "iterations", "residual"],
          args)


def cmd_modulus(args):
    Q = qprofile.named_profile(args.profile, args.n)
    r1, r2 = args.r1, args.r2
    exact = modulus.ring_modulus_exact(r1, r2, args.n)
    image = maps.pushforward_ring_modulus(Q, r1, r2, args.n, _rule(args))
    _emit([dict(n=args.n, profile=args.profile, r1=r1, r2=r2, ring_modulus=exact,
                image_modulus=image)],
          ["n", "profile", "r1", "r2", "ring_modulus", "image_modulus"], args)


def cmd_qmean(args):
    Q = qprofile.named_profile(args.profile, args.n)
    radii = args.radii or list(np.geomspace(1e-3, 0.5, 10))
    rule = _rule(args)
    rows = [dict(profile=args.profile, r=float(r), q=qprofile.q_mean(Q, float(r), rule))
            for r in radii]
    _emit(rows, ["profile", "r", "q"], args)


def cmd_fmo(args):
    Q = qprofile.named_profile(args.profile, args.n)
    rule = _rule(args)
    rows = []
    for k in range(args.k_min, args.k_max + 1):
        eps = 2.0 ** -k
        rows.append(dict(profile=args.profile, k=k, eps=eps,
                         oscillation=qprofile.fmo_oscillation(Q.evaluate, Q.center, eps, rule)))
    _emit(rows, ["profile", "k", "eps", "oscillation"], args)


def cmd_dini(args):
    Q = qprofile.named_profile(args.profile, args.n)
    if not (0.0 < args.eps0 < Q.radius):
        raise InvalidArgument("--eps0 must lie in (0, 1)")
    res = qprofile.dini_integral(Q, args.eps0, _rule(args))
    _emit([dict(profile=args.profile, eps0=args.eps0,
                diverges="diverges" if res.diverges else "converges",
                value=res.value, reason=res.reason)],
          ["profile", "eps0", "diverges", "value", "reason"], args)


def cmd_bounds(args):
    c = bounds.make_constants(args.n, args.K, args.p, args.lam)
    Q = qprofile.named_profile(args.profile, args.n)
    dists = args.dist or list(args.eps0 * np.geomspace(1e-8, 0.5, 9))
    rule = _rule(args)
    if abs(c.gamma_np - 1.0) < 1e-12:
        Cn, pn = bounds.log_bound_constants(c, args.eps0, args.delta)
    else:
        Cn, pn = math.nan, math.nan
    rows = []
    for d in dists:
        if not (0.0 < d <= args.eps0 < 1.0):
            raise InvalidArgument("need 0 < dist <= eps0 < 1")
        I = qprofile.psi_integral(qprofile.CANONICAL_PSI, d, args.eps0) if d < args.eps0 else 0.0
        rows.append(dict(dist=d, lemma6=bounds.lemma6_bound(c, args.delta, I),
                         lemma1=bounds.lemma1_bound(c, I),
                         theorem3=bounds.theorem3_bound(Cn, pn, d) if math.isfinite(Cn) else math.nan,
                         theorem4=bounds.theorem4_bound(Q, args.eps0, d, c.alpha_n, rule),
                         cor1=bounds.cor1_bound(c.alpha_n, args.C, args.n, d)))
    _emit(rows, ["dist", "lemma6", "lemma1", "theorem3", "theorem4", "cor1"], args)


def cmd_family(args):
    Q = qprofile.named_profile(args.profile, args.n)
    if args.m_max < 1:
        raise InvalidArgument("--m-max must be >= 1")
    radii = args.radii or list(2.0 ** -np.arange(3, 13))
    fam = maps.truncation_family(Q, range(1, args.m_max + 1), _rule(args))
    rep = maps.equicontinuity_experiment(fam, radii, _rule(args))
    rows = [dict(m=m, r=r, h_value=h) for m, r, h in rep.rows()]
    # one extra row per member at its own radius 1/m
    for m, v in zip(rep.ms, rep.own_radius_values):
        rows.append(dict(m=m, r=1.0 / m, h_value=float(v / math.sqrt(1.0 + v * v))))
    _emit(rows, ["m", "r", "h_value"], args)
    sys.stderr.write(f"sigma={rep.sigma!r} C={rep.C!r} "
                     f"min|f_m(x_m)|={float(rep.own_radius_values.min())!r} "
                     f"below_sigma={rep.below_sigma}\n")


def cmd_setfn(args):
    if args.set_file:
        E = setfn.load_set(args.set_file, args.n)
    elif args.point:
        E = setfn.point_set([args.point])
    else:
        raise InvalidArgument("give --set FILE or --point X1 .. Xn")
    res = setfn.c_set(E, tol=args.tol, resolution=args.grid)
    rows = [dict(set_id=args.set_id, x=x, m=m, c=c)
            for x, m, c in zip(res.search, res.m_values, res.c_values)]
    for r in rows:
        x = r["x"]
        r["x"] = "inf" if x.is_infinity else " ".join(repr(v) for v in x.coords)
    _emit(rows, ["set_id", "x", "m", "c"], args)
    sys.stderr.write(f"c={res.c_value!r} at {res.argmin_x}\n")


def cmd_verify(args):
    Q = qprofile.named_profile(args.profile, args.n)
    if args.m:
        f = maps.rho_m_build(Q, args.m, rule=_rule(args))
        Qc = Q.truncated(args.m)
    else:
        f = maps.rho_m_build(qprofile.constant_profile(1.0, args.n), 1)
        Qc = Q
    rep = maps.verify_ring_q_inequality(f, Qc, args.r1, args.r2, args.samples, args.seed,
                                        _rule(args))
    rows = [dict(eta=i, lhs=rep.lhs, rhs=v, slack=s, violation=bool(v < rep.lhs * (1 - 1e-9)))
            for i, (v, s) in enumerate(zip(rep.rhs, rep.slack))]
    rows.append(dict(eta="extremal", lhs=rep.lhs, rhs=rep.extremal_rhs, slack=rep.extremal_slack,
                     violation=rep.extremal_violation))
    _emit(rows, ["eta", "lhs", "rhs", "slack", "violation"], args)


def cmd_report(args):
    results = acceptance.run_all(seed=args.seed)
    rows = [dict(criterion=c.number, name=c.name, passed=c.passed, measured=c.measured)
            for c in results]
    _emit(rows, ["criterion", "name", "passed", "measured"], args)
    for c in results:
        sys.stderr.write(c.line() + "\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--n", type=int, default=2, help="dimension (default 2)")
    common.add_argument("--grid", type=int, default=64, help="cells per axis (>= 16)")
    common.add_argument("--quad-points", type=int, default=16,
                        help="Gauss-Legendre nodes per radial panel")
    common.add_argument("--tol", type=float, default=1e-8, help="solver tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-o", "--output", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = _Parser(prog="ringq", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("capacity", parents=[common], help="grid capacity of a ring condenser")
    s.add_argument("--ring", type=float, nargs=2, default=(0.5, 1.0), metavar=("R1", "R2"))
    s.add_argument("--cell", action="store_true", help="plate is a single central grid cell")
    s.add_argument("--export-field", default=None, help="write the minimizer to this path")
    s.add_argument("--field-format", choices=("csv", "bin"), default="csv")
    s.set_defaults(func=cmd_capacity)

    s = sub.add_parser("modulus", parents=[common], help="ring modulus and its radial image")
    s.add_argument("--profile", default="const:1")
    s.add_argument("--r1", type=float, default=0.5)
    s.add_argument("--r2", type=float, default=0.9)
    s.set_defaults(func=cmd_modulus)

    s = sub.add_parser("qmean", parents=[common], help="spherical means of a profile")
    s.add_argument("--profile", default="log")
    s.add_argument("--radii", type=float, nargs="*")
    s.set_defaults(func=cmd_qmean)

    s = sub.add_parser("fmo", parents=[common], help="mean oscillation sweep")
    s.add_argument("--profile", default="log")
    s.add_argument("--k-min", type=int, default=4)
    s.add_argument("--k-max", type=int, default=20)
    s.set_defaults(func=cmd_fmo)

    s = sub.add_parser("dini", parents=[common], help="divergence probe of int dt/(t q^{1/(n-1)})")
    s.add_argument("--profile", default="const:1")
    s.add_argument("--eps0", type=float, default=0.3)
    s.set_defaults(func=cmd_dini)

    s = sub.add_parser("bounds", parents=[common], help="distortion bounds on a distance grid")
    s.add_argument("--K", type=float, default=2 * math.pi)
    s.add_argument("--p", type=float, default=1.0)
    s.add_argument("--lam", type=float, default=None)
    s.add_argument("--delta", type=float, default=1.0)
    s.add_argument("--C", type=float, default=1.0)
    s.add_argument("--eps0", type=float, default=math.exp(-1))
    s.add_argument("--profile", default="const:1")
    s.add_argument("--dist", type=float, nargs="*")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("family", parents=[common], help="truncated radial family table")
    s.add_argument("--profile", default="log2")
    s.add_argument("--m-max", type=int, default=64)
    s.add_argument("--radii", type=float, nargs="*")
    s.set_defaults(func=cmd_family)

    s = sub.add_parser("setfn", parents=[common], help="set function c(E) by search")
    s.add_argument("--set", dest="set_file", default=None, help="set description file")
    s.add_argument("--point", type=float, nargs="+")
    s.add_argument("--set-id", default="E")
    s.set_defaults(func=cmd_setfn)

    s = sub.add_parser("verify-eq2", parents=[common],
                       help="ring-Q inequality on random densities")
    s.add_argument("--profile", default="const:1")
    s.add_argument("--m", type=int, default=0, help="family index (0: identity map)")
    s.add_argument("--r1", type=float, default=0.1)
    s.add_argument("--r2", type=float, default=0.9)
    s.add_argument("--samples", type=int, default=100)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("report-all", parents=[common], help="run the verification suite")
    s.set_defaults(func=cmd_report)
    return p


def run(argv: Optional[List[str]] = None) -> int:
    # threaded BLAS reductions change the last bits between runs; one thread
    # by default keeps repeated runs byte-identical
    threads = int(os.environ.get("RINGQ_THREADS", "1") or 1)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _check_common(args)
        with threadpool_limits(limits=threads):
            args.func(args)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except _UsageError as exc:
        sys.stderr.write(parser.format_usage() + str(exc) + "\n")
        return 1
    except ConvergenceError as exc:
        sys.stderr.write(f"convergence error: {exc}\n")
        return 2
    except (InvalidArgument, RingQError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    return 0


def main() -> None:
    sys.exit(run())
