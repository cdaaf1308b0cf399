import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ringq.errors import InvalidArgument
from ringq.geom import ExtPoint, antipodal, chordal
from ringq.setfn import (R_INNER, T_OUTER, c_at_point, c_set, cap_bound, chordal_cap,
                         fit_diameter_constant, lemma9_equicontinuity_estimate,
                         lemma9_lower_bound, load_set, m_standard, m_t_modulus, point_set,
                         segment_set, sphere_design, write_probe_csv, ball_set)

CAP2 = 11.4384034695205091
CAP3 = 41.6467341117683272


def test_cap_bound_values():
    assert cap_bound(2) == pytest.approx(CAP2, rel=1e-15)
    assert cap_bound(3) == pytest.approx(CAP3, rel=1e-15)


@given(x=st.lists(st.floats(-3, 3), min_size=2, max_size=2), r=st.floats(0.05, 0.6),
       ang=st.floats(0, 2 * math.pi))
def test_chordal_cap_boundary(x, r, ang):
    p = ExtPoint.finite(x)
    s2 = sum(v * v for v in x)
    if r * r * (1 + s2) >= 0.95:
        with pytest.raises(InvalidArgument):
            chordal_cap(p, r) if r * r * (1 + s2) >= 1 else (_ for _ in ()).throw(
                InvalidArgument("skip"))
        return
    ball = chordal_cap(p, r).region
    y = ball.center + ball.radius * np.array([math.cos(ang), math.sin(ang)])
    assert float(chordal(np.array(x), y)) == pytest.approx(r, rel=1e-9)


def test_m_on_full_cap():
    E = chordal_cap(ExtPoint.finite([0.2, 0.1]), R_INNER)
    m = m_standard(E, ExtPoint.finite([0.2, 0.1]), resolution=64)
    assert m == pytest.approx(CAP2, rel=0.03)


def test_m_vanishes_away_from_set():
    E = point_set([[5.0, 0.0]])
    assert m_standard(E, [0.0, 0.0], resolution=32) == 0.0
    with pytest.raises(InvalidArgument):
        m_t_modulus(E, 0.9, [0.0, 0.0], 0.5)


def test_m_monotone_in_set():
    x = [0.0, 0.0]
    small = m_standard(segment_set([0, 0], [0.2, 0]), x, resolution=48)
    big = m_standard(segment_set([-0.3, 0], [0.4, 0]), x, resolution=48)
    assert 0 < small <= big


def test_m_at_infinity():
    E = point_set([[math.inf, math.inf]])
    assert m_standard(E, ExtPoint.infinity(2), resolution=48) > 0
    assert m_standard(E, [0.0, 0.0], resolution=48) == 0.0


def test_c_antipodal_symmetry():
    E = segment_set([0.0, 0.0], [0.5, 0.0])
    x = ExtPoint.finite([0.3, 0.4])
    assert c_at_point(E, x, resolution=32) == pytest.approx(
        c_at_point(E, antipodal(x), resolution=32), rel=1e-12)


def test_sphere_design():
    S = sphere_design(2)
    assert S.shape == (26, 3)
    assert np.allclose(np.linalg.norm(S, axis=1), 1.0)
    keys = {tuple(np.round(s, 12)) for s in S}
    assert all(tuple(np.round(-s, 12)) in keys for s in S)
    assert sphere_design(3).shape == (80, 4)


def test_c_set_small_cases():
    E = point_set([[0.0, 0.0]])
    res = c_set(E, resolution=32, refine=0)
    assert len(res.search) == 26
    # a point has zero capacity; coarse grids may miss it entirely
    assert 0 <= res.c_value < CAP2
    assert res.c_value == pytest.approx(res.c_values.min())
    given_pts = c_set(E, x_grid=[[0.0, 0.0], ExtPoint.infinity(2)], resolution=32)
    assert len(given_pts.search) == 2
    assert given_pts.c_value >= res.c_value - 1e-12
    with pytest.raises(InvalidArgument):
        c_set(E, x_grid=[])


def test_c_set_below_cap_for_large_ball():
    res = c_set(ball_set([0, 0], 10.0), resolution=32, refine=1)
    assert res.c_value <= CAP2 * 1.05


def test_load_set(tmp_path):
    E = load_set("# probe\npoint 0 0\npoint inf\nsegment 0 0 1 1\nball 2 2 0.5\n")
    assert E.n == 2 and len(E.region.parts) == 3
    f = tmp_path / "s.txt"
    f.write_text("point 1 2 3\n")
    assert load_set(str(f)).n == 3
    for bad in ("", "cube 0 0 1\n", "point 0 0\npoint 1 2 3\n", "segment 0 0 1\n",
                "point a b\n"):
        with pytest.raises(InvalidArgument):
            load_set(bad + "\n")


def test_set_function_lower_bound():
    lb = lemma9_lower_bound(2.0, 3.0)
    assert lb.c_n == pytest.approx(1 / CAP2)
    assert lb.branch == "beta_vu*a_vu/cap"
    assert lb.value == pytest.approx(3.0 / CAP2)
    assert lb.raw_min_form == 2.0
    lb2 = lemma9_lower_bound(0.5, 3.0, beta_vu=2.0, a_vu=20.0, h_fC=0.25)
    assert lb2.c_n == 2.0 and lb2.branch == "beta_vu"
    assert lb2.value == pytest.approx(1.5)
    with pytest.raises(InvalidArgument):
        lemma9_lower_bound(1.0, 1.0, h_fC=2.0)


def test_diameter_estimate_and_fit(tmp_path):
    assert lemma9_equicontinuity_estimate(0.2, 0.5, 0.4) == pytest.approx(1.0)
    with pytest.raises(InvalidArgument):
        lemma9_equicontinuity_estimate(0.2, 0.5, 0.0)
    assert fit_diameter_constant([2.0, 3.0, 1.0], [1.0, 0.5, 0.0]) == 2.0
    with pytest.raises(InvalidArgument):
        fit_diameter_constant([1.0], [0.0])
    write_probe_csv([("p", ExtPoint.infinity(2), 0.5, 1.0),
                     ("q", ExtPoint.finite([0.5, 0.0]), 0.25, 1.0)], tmp_path / "p.csv")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "set_id,x,m,c" and lines[1].startswith("p,inf,")


def test_radii_constants():
    assert T_OUTER == pytest.approx(math.sqrt(3) / 2)
    assert R_INNER == pytest.approx(math.sqrt(2) / 2)
