"""The weight psi = 1/(t q^{1/(n-1)}) makes the annulus integral of Q psi^n
equal to omega_{n-1} times the admissibility integral I.

Also shows the canonical weight 1/(t log(1/t)) and its closed form.
"""
import math

import numpy as np

from ringq import qprofile
from ringq.quadrature import annulus_integral, omega

eps, eps0 = 1e-5, 0.3
for n in (2, 3):
    for Q in (qprofile.constant_profile(1.0, n), qprofile.log_profile(n),
              qprofile.powlog_profile(1.0, n)):
        psi = qprofile.psi_from_q(Q, eps, eps0)
        I = qprofile.psi_integral(psi, eps, eps0)
        W = annulus_integral(lambda p: Q(p) * psi(np.linalg.norm(p, axis=-1)) ** n,
                             Q.center, eps, eps0, qprofile._rule(None, n), Q.breaks)
        print(f"n={n} Q={Q.label:9s} I={I:.10f}  W/(omega I) - 1 = {W / (omega(n) * I) - 1:+.1e}")

print("\ncanonical weight 1/(t log(1/t)):")
for k in (3, 5, 8):
    e = math.exp(-k)
    v = qprofile.psi_integral(qprofile.CANONICAL_PSI, e, math.exp(-1))
    print(f"  eps = e^-{k}: I = {v:.12f}, log(log(1/eps)) = {math.log(k):.12f}")
