"""Ring-Q inequality on random admissible densities.

For the identity map and Q = 1 the extremal density gives equality; a
profile Q = 1/2 is too small and the check reports a violation.
"""
from ringq import maps, qprofile

one = qprofile.constant_profile(1.0, 2)
ident = maps.rho_m_build(one, 1)
for label, Q, f in (("identity, Q=1", one, ident),
                    ("identity, Q=1/2", qprofile.constant_profile(0.5, 2), ident)):
    rep = maps.verify_ring_q_inequality(f, Q, 0.1, 0.9, eta_samples=100, seed=0)
    print(f"{label:18s} M = {rep.lhs:.6f}  extremal slack = {rep.extremal_slack:+.2e}"
          f"  worst slack = {rep.worst_slack:+.2e}  violations = {rep.total_violations}")

Q = qprofile.log2_profile(2)
for m in (2, 8, 64):
    rep = maps.verify_ring_q_inequality(maps.rho_m_build(Q, m), Q.truncated(m), 0.005, 0.9)
    print(f"f_{m:<3d} with Q_m        worst slack = {rep.worst_slack:+.2e}"
          f"  violations = {rep.total_violations}")
