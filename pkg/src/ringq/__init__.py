"""Numerical toolkit for ring Q-mappings.

Chordal geometry, spherical means of dilatation profiles, grid capacities
of condensers, explicit distortion bounds, radial map families and a
modulus-based set function, each checkable against closed forms.
"""
from .errors import (ConvergenceError, DegenerateProfile, EvaluationError, InvalidArgument,
                     OutOfDomain, RingQError)
from .geom import (ExtPoint, ChordalChart, antipodal, chordal_diameter, chordal_distance)
from .quadrature import (QuadratureRule, annulus_integral, ball_volume, omega,
                         sphere_integral)
from .qprofile import (PsiFunction, QProfile, check_condition_eq26, check_theorem1_conditions,
                       dini_integral, fmo_oscillation, named_profile, psi_canonical,
                       psi_from_q, psi_integral, q_mean)
from .modulus import (CapacityResult, Condenser, capacity_lower_bound_eq17, capacity_numeric,
                      lemma4_capacity_bound, modulus_connecting, ring_modulus_exact)
from .maps import (MapFamily, RadialMap, equicontinuity_experiment, inner_dilatation_radial,
                   pushforward_ring_modulus, radial_map_eval, rho_m_build, truncation_family,
                   verify_ring_q_inequality)
from .bounds import (BoundConstants, check_bound_on_family, cor1_bound, lemma1_bound,
                     lemma6_bound, make_constants, theorem3_bound, theorem4_bound)
from .setfn import (CompactSet, c_set, lemma9_equicontinuity_estimate, lemma9_lower_bound,
                    m_standard, m_t_modulus)

I_integral = psi_integral

__version__ = "0.1.0"
