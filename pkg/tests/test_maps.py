import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ringq.errors import InvalidArgument, OutOfDomain
from ringq.maps import (MapFamily, RadialMap, equicontinuity_experiment,
                        inner_dilatation_radial, map_ring_modulus, pushforward_ring_modulus,
                        radial_map_eval, random_densities, rho_m_build, truncation_family,
                        verify_ring_q_inequality, write_family_csv)
from ringq.modulus import ring_modulus_exact
from ringq.qprofile import constant_profile, log2_profile, log_profile

TWO_PI_OVER_LOG2 = 9.06472028365438762


def rho_log2_closed(r, m):
    """rho_m for Q = max(1, log^2(1/|x|)), n = 2, m >= 3."""
    def above(t):
        L = math.log(1 / t)
        return t if L <= 1 else math.exp(-2 + 1 / L)
    if r >= 1 / m:
        return above(r)
    return m * r * above(1 / m)


def test_identity_for_unit_profile():
    one = constant_profile(1.0, 2)
    for m in (1, 4, 16):
        f = rho_m_build(one, m)
        r = np.geomspace(1e-4, 0.99, 40)
        assert np.allclose(f.rho(r), r, rtol=1e-10)


@pytest.mark.parametrize("m", [3, 8, 32])
def test_rho_matches_closed_form(m):
    f = rho_m_build(log2_profile(2), m)
    for r in np.geomspace(1e-3 / m, 0.999, 60):
        assert float(f.rho(np.array([r]))[0]) == pytest.approx(rho_log2_closed(r, m), rel=1e-9)


def test_rho_normalization_and_linear_core():
    f = rho_m_build(log2_profile(2), 16)
    assert float(f.rho(np.array([1.0]))[0]) == pytest.approx(1.0, rel=1e-12)
    r = np.array([0.01, 0.02, 0.04])
    v = f.rho(r)
    assert v[1] / v[0] == pytest.approx(2.0, rel=1e-12)
    assert v[2] / v[1] == pytest.approx(2.0, rel=1e-12)


@given(m=st.integers(2, 200), a=st.floats(1e-6, 0.98), b=st.floats(1e-6, 0.98))
def test_rho_increasing(m, a, b):
    if a == b:
        return
    f = rho_m_build(log2_profile(2), m, nodes=512)
    lo, hi = sorted((a, b))
    v = f.rho(np.array([lo, hi]))
    assert v[0] < v[1]


def test_rho_requires_q_at_least_one():
    with pytest.raises(InvalidArgument):
        rho_m_build(constant_profile(0.5, 2), 4)
    with pytest.raises(InvalidArgument):
        rho_m_build(log2_profile(2), 0)


def test_radial_map_eval():
    f = rho_m_build(constant_profile(1.0, 2), 1)
    assert np.allclose(radial_map_eval(f, [0.0, 0.0]), [0.0, 0.0])
    assert np.allclose(f(np.array([[0.3, 0.4]])), [[0.3, 0.4]])
    with pytest.raises(OutOfDomain):
        radial_map_eval(f, [1.0, 0.0])
    with pytest.raises(InvalidArgument):
        RadialMap(np.zeros(2), lambda r: -r, 2)


def test_inner_dilatation_power_map():
    # rho = r^a, a < 1: K_I = a^{1-n}
    for n, a in ((2, 0.5), (3, 0.25)):
        f = RadialMap(np.zeros(n), lambda r, a=a: np.asarray(r) ** a, n)
        for r in (0.01, 0.3, 0.8):
            assert inner_dilatation_radial(f, r) == pytest.approx(a ** (1 - n), rel=1e-7)
    ident = RadialMap(np.zeros(2), lambda r: np.asarray(r, dtype=float), 2)
    assert inner_dilatation_radial(ident, 0.5) == pytest.approx(1.0, abs=1e-8)
    with pytest.raises(OutOfDomain):
        inner_dilatation_radial(ident, 1.0)


def test_inner_dilatation_near_kink():
    Q = log2_profile(2)
    f = rho_m_build(Q, 8)
    for r in (1 / 8 * (1 + 1e-6), 1 / 8 * (1 - 1e-6), math.exp(-1) * (1 + 2e-6)):
        k = inner_dilatation_radial(f, r)
        q = max(1.0, math.log(1 / r) ** 2) if r >= 1 / 8 else 1.0
        assert k == pytest.approx(q, rel=1e-5)


def test_ring_modulus_routes_agree():
    one = constant_profile(1.0, 2)
    assert pushforward_ring_modulus(one, 0.5, 0.99) == pytest.approx(
        ring_modulus_exact(0.5, 0.99, 2), rel=1e-12)
    Q = log2_profile(2)
    f = rho_m_build(Q, 8)
    for r1, r2 in ((0.2, 0.9), (0.13, 0.3), (0.01, 0.5)):
        a = map_ring_modulus(f, r1, r2)
        b = pushforward_ring_modulus(Q.truncated(8), r1, r2)
        assert a == pytest.approx(b, rel=1e-8)
    with pytest.raises(InvalidArgument):
        pushforward_ring_modulus(Q, 0.5, 0.2)


@given(r1=st.floats(0.01, 0.5), span=st.floats(0.05, 0.45), seed=st.integers(0, 10 ** 6),
       panels=st.integers(1, 40))
def test_random_densities_admissible(r1, span, seed, panels):
    r2 = r1 + span
    edges, eta = random_densities(r1, r2, 5, seed, panels)
    integral = eta @ np.diff(edges)
    assert np.allclose(integral, 1.0, rtol=1e-12)
    assert np.all(eta >= 0)


def test_ring_q_inequality():
    one = constant_profile(1.0, 2)
    ident = rho_m_build(one, 1)
    rep = verify_ring_q_inequality(ident, one, 0.1, 0.9, 50, seed=3)
    assert rep.total_violations == 0
    assert abs(rep.extremal_slack) < 1e-9
    assert rep.lhs == pytest.approx(ring_modulus_exact(0.1, 0.9, 2), rel=1e-14)
    bad = verify_ring_q_inequality(ident, constant_profile(0.5, 2), 0.1, 0.9, 50, seed=3)
    assert bad.extremal_violation
    Q = log2_profile(2)
    rep = verify_ring_q_inequality(rho_m_build(Q, 16), Q.truncated(16), 0.01, 0.9, 30)
    assert rep.total_violations == 0


def test_ring_q_inequality_seeded():
    one = constant_profile(1.0, 2)
    f = rho_m_build(one, 1)
    a = verify_ring_q_inequality(f, one, 0.2, 0.7, 20, seed=7)
    b = verify_ring_q_inequality(f, one, 0.2, 0.7, 20, seed=7)
    assert np.array_equal(a.rhs, b.rhs)


def test_equicontinuity_experiment(tmp_path):
    fam = truncation_family(log2_profile(2), [1, 2, 4, 8, 16])
    rep = equicontinuity_experiment(fam, [0.5, 0.1, 0.01])
    assert rep.C == pytest.approx(2.0, rel=1e-8)
    assert rep.sigma == pytest.approx(math.exp(-2.0), rel=1e-8)
    assert rep.below_sigma == 0
    assert len(rep.rows()) == 15
    assert np.all(rep.table <= 1.0)
    write_family_csv(rep, tmp_path / "fam.csv")
    assert (tmp_path / "fam.csv").read_text().count("\n") == 16


def test_equicontinuity_divergent_profile():
    from ringq.qprofile import named_profile
    fam = truncation_family(named_profile("logmax", 2), [1, 4, 16, 64])
    rep = equicontinuity_experiment(fam, [0.1, 0.01, 0.001])
    assert rep.sigma == 0.0
    assert rep.sup_decreasing


def test_family_validation():
    f2 = rho_m_build(constant_profile(1.0, 2), 1)
    f3 = rho_m_build(constant_profile(1.0, 3), 1)
    with pytest.raises(InvalidArgument):
        MapFamily([f2, f3], [1, 1], constant_profile(1.0, 2))
    with pytest.raises(InvalidArgument):
        truncation_family(log_profile(2), [2])
