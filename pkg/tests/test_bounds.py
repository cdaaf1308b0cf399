import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ringq.bounds import (check_bound_on_family, cor1_bound, cor1_exponent,
                          decay_exponent_of_theorem4, fit_log_decay, lemma1_bound,
                          lemma6_bound, log_bound_constants, make_constants, theorem3_bound,
                          theorem4_bound)
from ringq.errors import InvalidArgument
from ringq.maps import truncation_family
from ringq.qprofile import CANONICAL_PSI, constant_profile, powlog_profile, psi_integral


def test_constants_examples():
    c = make_constants(2, 1.0, 1.0)
    assert c.lambda_n == 4.0 and c.alpha_n == 32.0
    assert c.beta_n == pytest.approx(2 * math.pi)
    assert c.beta_n_tilde == pytest.approx(math.pi)
    assert c.gamma_np == 1.0
    c3 = make_constants(3, 2.0, 2.0)
    assert c3.beta_n == pytest.approx(math.sqrt(2 * math.pi))
    assert c3.gamma_np == 0.5
    assert c3.ball_volume == pytest.approx(4 * math.pi / 3)
    for bad in ((1, 1.0, 1.0), (2, 0.0, 1.0), (2, 1.0, 3.0), (2, 1.0, 0.0)):
        with pytest.raises(InvalidArgument):
            make_constants(*bad)
    with pytest.raises(InvalidArgument):
        make_constants(2, 1.0, 1.0, lambda_choice=10.0)


def test_exponential_bounds():
    c = make_constants(2, 1.0, 1.0)
    assert lemma6_bound(c, 1.0, 0.0) == 32.0
    assert lemma6_bound(c, 0.5, 1.0) == pytest.approx(64 * math.exp(-2 * math.pi))
    assert lemma1_bound(c, 1.0) == pytest.approx(32 * math.exp(-math.pi))
    assert lemma1_bound(c, 2.0) > lemma6_bound(c, 1.0, 2.0)
    with pytest.raises(InvalidArgument):
        lemma6_bound(c, 0.0, 1.0)
    with pytest.raises(InvalidArgument):
        lemma1_bound(c, -1.0)


def test_logarithmic_bound_examples():
    assert theorem3_bound(2.0, 1.0, math.exp(-2)) == pytest.approx(1.0)
    assert theorem3_bound(1.0, 2.0, math.exp(-4)) == pytest.approx(1 / 16)
    with pytest.raises(InvalidArgument):
        theorem3_bound(1.0, 1.0, 1.0)


@pytest.mark.parametrize("n", [2, 3, 4])
@given(K=st.floats(0.5, 20), eps0=st.floats(0.01, 0.9), frac=st.floats(1e-12, 0.99))
def test_log_form_matches_exponential_form(n, K, eps0, frac):
    c = make_constants(n, K, 1.0)
    d = eps0 * frac
    I = psi_integral(CANONICAL_PSI, d, eps0) if eps0 < math.exp(-1) else \
        math.log(math.log(1 / d) / math.log(1 / eps0))
    Cn, p = log_bound_constants(c, eps0)
    assert theorem3_bound(Cn, p, d) == pytest.approx(lemma6_bound(c, 1.0, I), rel=1e-9)


def test_log_form_needs_p_one():
    with pytest.raises(InvalidArgument):
        log_bound_constants(make_constants(3, 1.0, 2.0), 0.5)


@pytest.mark.parametrize("n", [2, 3])
def test_integral_bound_unit_profile(n):
    one = constant_profile(1.0, n)
    for d in (0.3, 0.01, 1e-6):
        assert theorem4_bound(one, 0.5, d, 32.0) == pytest.approx(64.0 * d, rel=1e-10)
    assert theorem4_bound(one, 0.5, 0.5, 7.0) == 7.0
    with pytest.raises(InvalidArgument):
        theorem4_bound(one, 0.5, 0.6, 1.0)


@pytest.mark.parametrize("n", [2, 3])
@given(C=st.floats(0.2, 8), k=st.floats(1.5, 200))
def test_integral_bound_equals_power_log_form(n, C, k):
    Q = powlog_profile(C, n)
    d = math.exp(-k)
    assert theorem4_bound(Q, math.exp(-1), d, 5.0) == pytest.approx(cor1_bound(5.0, C, n, d),
                                                                      rel=1e-9)


def test_power_log_bound_examples():
    assert cor1_exponent(4.0, 3) == 0.5
    assert cor1_bound(1.0, 1.0, 2, math.exp(-10)) == pytest.approx(0.1)


@given(A=st.floats(0.1, 100), s=st.floats(0.05, 5))
def test_fit_log_decay_recovers(A, s):
    d = np.exp(-np.geomspace(2, 500, 12))
    v = A * np.log(1 / d) ** -s
    A2, s2 = fit_log_decay(d, v)
    assert A2 == pytest.approx(A, rel=1e-8) and s2 == pytest.approx(s, rel=1e-8)


def test_decay_exponent():
    d = np.exp(-np.geomspace(3, 300, 10))
    s = decay_exponent_of_theorem4(powlog_profile(2.0, 2), math.exp(-1), d)
    assert s == pytest.approx(0.5, rel=1e-9)
    with pytest.raises(InvalidArgument):
        fit_log_decay([0.5], [1.0])


def test_check_bound_on_family(tmp_path):
    fam = truncation_family(constant_profile(1.0, 2), [1, 2])
    radii = [0.5, 0.1, 0.01]
    ok = check_bound_on_family(fam, lambda r: r, radii)
    assert ok.violations == 0 and ok.bound_decays
    bad = check_bound_on_family(fam, lambda r: 0.5 * r, radii)
    assert bad.violations == 6
    ok.write_csv(tmp_path / "b.csv")
    lines = (tmp_path / "b.csv").read_text().splitlines()
    assert lines[0] == "member,radius,measured,bound,slack" and len(lines) == 7
