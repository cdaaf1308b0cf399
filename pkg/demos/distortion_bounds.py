"""Explicit distortion bounds on a distance sweep.

With p = 1 the exponential bound and the logarithmic one coincide for the
weight 1/(t log(1/t)); the integral bound for Q = C log^{n-1} decays like
log(1/d)^{-(1/C)^{1/(n-1)}}.
"""
import math

import numpy as np

from ringq import bounds, qprofile

c = bounds.make_constants(2, K=2 * math.pi, p=1.0)
print(f"alpha = {c.alpha_n}, beta = {c.beta_n:.6f}, beta~ = {c.beta_n_tilde:.6f},"
      f" gamma = {c.gamma_np}")
eps0 = 0.3
Cn, p = bounds.log_bound_constants(c, eps0)
for d in eps0 * np.geomspace(1e-12, 0.1, 5):
    I = qprofile.psi_integral(qprofile.CANONICAL_PSI, d, eps0)
    print(f"  d = {d:.2e}  exp form = {bounds.lemma6_bound(c, 1.0, I):.6e}"
          f"  log form = {bounds.theorem3_bound(Cn, p, d):.6e}")

dists = np.exp(-np.geomspace(3, 300, 25))
for C in (0.5, 1.0, 4.0):
    s = bounds.decay_exponent_of_theorem4(qprofile.powlog_profile(C, 2), math.exp(-1), dists)
    print(f"C = {C}: fitted exponent {s:.6f}, predicted {bounds.cor1_exponent(C, 2):.6f}")
