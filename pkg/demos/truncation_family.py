"""Radial maps built from Q = max(1, log^2(1/|x|)) truncated near the origin.

Here the integral of dt/(t q) over (0, 1) converges to C = 2, so every
f_m moves the sphere |x| = 1/m at least exp(-C) away from f_m(0): the family
is not equicontinuous at 0. With Q = max(1, log(1/|x|)) the integral diverges
and the family supremum keeps shrinking with the radius.
"""
import numpy as np

from ringq import maps, qprofile

radii = 2.0 ** -np.arange(3, 13)
for name in ("log2", "logmax"):
    fam = maps.truncation_family(qprofile.named_profile(name, 2), [1, 2, 4, 8, 16, 32, 64])
    rep = maps.equicontinuity_experiment(fam, radii)
    print(f"Q = {name}: C = {rep.C:.6f}  sigma = {rep.sigma:.6f}")
    print("   |f_m(x_m)|:", " ".join(f"{v:.4f}" for v in rep.own_radius_values))
    print("   sup_m h(r):", " ".join(f"{v:.4f}" for v in rep.sup_by_radius))

f = maps.rho_m_build(qprofile.log2_profile(2), 8)
print("\ninner dilatation of f_8 vs truncated mean:")
Q8 = qprofile.log2_profile(2).truncated(8)
for r in (0.05, 0.2, 0.5, 0.9):
    print(f"  r = {r:4.2f}  K_I = {maps.inner_dilatation_radial(f, r):.9f}"
          f"  q = {qprofile.q_mean(Q8, r):.9f}")
