import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ringq.errors import ConvergenceError, InvalidArgument
from ringq.modulus import (Condenser, capacity_lower_bound_eq17, capacity_numeric,
                           check_lambda, default_lambda, lambda_range, lemma4_capacity_bound,
                           modulus_connecting, read_field, ring_modulus_exact, write_field)
from ringq.qprofile import constant_profile, psi_from_q, psi_integral, weighted_annulus_integral
from ringq.regions import Ball, Box, Cells, Grid, Sphere

# 30-digit references
TWO_PI_OVER_LOG2 = 9.06472028365438762
FOUR_PI_OVER_LOG2_SQ = 26.1552540005475654
TWO_PI_OVER_LOG32 = 1.81294405673087752


def test_ring_modulus_exact_examples():
    assert ring_modulus_exact(0.5, 1.0, 2) == pytest.approx(TWO_PI_OVER_LOG2, rel=1e-15)
    assert ring_modulus_exact(0.5, 1.0, 3) == pytest.approx(FOUR_PI_OVER_LOG2_SQ, rel=1e-15)
    assert ring_modulus_exact(1.0, 2.0, 2) == ring_modulus_exact(3.0, 6.0, 2)
    for bad in ((1.0, 1.0), (0.0, 1.0), (2.0, 1.0)):
        with pytest.raises(InvalidArgument):
            ring_modulus_exact(*bad, 2)


def test_ring_capacity_2d():
    E = Condenser(Ball([0, 0], 1.0), Ball([0, 0], 0.5), resolution=128)
    res = capacity_numeric(E)
    assert res.value == pytest.approx(TWO_PI_OVER_LOG2, rel=0.01)
    assert res.u.min() >= -1e-12 and res.u.max() <= 1 + 1e-12
    assert res.resolution == 128


def test_ring_capacity_3d_coarse():
    E = Condenser(Ball([0, 0, 0], 1.0), Ball([0, 0, 0], 0.5), resolution=32)
    assert capacity_numeric(E).value == pytest.approx(FOUR_PI_OVER_LOG2_SQ, rel=0.02)


@given(r_small=st.floats(0.15, 0.35), gap=st.floats(0.05, 0.3))
def test_capacity_monotone_in_plate(r_small, gap):
    g = Grid.covering(np.array([-1.1, -1.1]), np.array([1.1, 1.1]), 2.2 / 40)
    A = Ball([0, 0], 1.0)
    c1 = capacity_numeric(Condenser(A, Ball([0, 0], r_small), grid=g)).value
    c2 = capacity_numeric(Condenser(A, Ball([0, 0], r_small + gap), grid=g)).value
    assert c2 >= c1 * (1 - 1e-7)


def test_capacity_monotone_in_domain():
    g = Grid.covering(np.array([-1.6, -1.6]), np.array([1.6, 1.6]), 3.2 / 64)
    C = Ball([0.1, 0], 0.3)
    small = capacity_numeric(Condenser(Ball([0, 0], 1.0), C, grid=g)).value
    big = capacity_numeric(Condenser(Ball([0, 0], 1.5), C, grid=g)).value
    assert big < small


def test_box_condenser():
    E = Condenser(Box([-1, -1], [1, 1]), Ball([0, 0], 0.3), resolution=64)
    inner = ring_modulus_exact(0.3, math.sqrt(2), 2)
    outer = ring_modulus_exact(0.3, 1.0, 2)
    assert inner * 0.98 < capacity_numeric(E).value < outer * 1.02


def test_condenser_errors():
    with pytest.raises(InvalidArgument):
        Condenser(Ball([0, 0], 1.0), Ball([2, 0], 0.5))
    with pytest.raises(InvalidArgument):
        Condenser(Ball([0, 0], 1.0), Ball([0, 0], 0.99), resolution=32)
    with pytest.raises(InvalidArgument):
        Condenser(Ball([0, 0], 1.0), Ball([0, 0], 0.5), resolution=1)


def test_convergence_error_carries_iterate():
    E = Condenser(Ball([0, 0], 1.0), Ball([0, 0], 0.5), resolution=48)
    with pytest.raises(ConvergenceError) as info:
        capacity_numeric(E, tol=1e-300, max_iter=2)
    assert info.value.result is not None and info.value.result.value > 0


def test_modulus_connecting():
    dom = Ball([0, 0], 1.0)
    a, b = Ball([-0.5, 0], 0.2), Ball([0.5, 0], 0.2)
    m1 = modulus_connecting(a, b, dom, resolution=64)
    m2 = modulus_connecting(b, a, dom, resolution=64)
    assert m1 > 0 and m1 == pytest.approx(m2, rel=1e-9)
    # larger domain: more curves, larger modulus
    assert modulus_connecting(a, b, Ball([0, 0], 1.5), resolution=96) > m1 * 0.98
    with pytest.raises(InvalidArgument):
        modulus_connecting(Ball([0, 0], 0.4), Ball([0.05, 0], 0.4), dom)


def test_modulus_connecting_spheres_matches_ring():
    dom = Ball([0, 0], 1.0)
    m = modulus_connecting(Sphere([0, 0], 0.5), Sphere([0, 0], 1.0), dom, resolution=128)
    assert m == pytest.approx(TWO_PI_OVER_LOG2, rel=0.03)


def test_modulus_connecting_touching_cells_is_infinite():
    lo = np.array([0.0, 0.0])
    g = Grid.covering(lo, np.array([1.0, 1.0]), 0.1)
    a = Cells([[2, 2]], lo, 0.1)
    b = Cells([[3, 2]], lo, 0.1)
    assert modulus_connecting(a, b, Box([0, 0], [1, 1]), grid=g) == math.inf


def test_weighted_capacity_bound_is_sharp_for_rings():
    one = constant_profile(1.0, 2)
    psi = psi_from_q(one, 0.5, 1.0)
    F = weighted_annulus_integral(one, psi, 0.5, 1.0)
    I = psi_integral(psi, 0.5, 1.0)
    assert lemma4_capacity_bound(F, I, 2) == pytest.approx(TWO_PI_OVER_LOG2, rel=1e-9)
    with pytest.raises(InvalidArgument):
        lemma4_capacity_bound(1.0, 0.0, 2)


def test_lambda_helpers():
    assert lambda_range(2) == (4.0, 2 * math.e)
    assert default_lambda(2) == 4.0
    lo, hi = lambda_range(3)
    assert lo < default_lambda(3) < hi
    with pytest.raises(InvalidArgument):
        check_lambda(2, 3.9)
    with pytest.raises(InvalidArgument):
        check_lambda(2, 2 * math.e)


def test_capacity_lower_bound_examples():
    assert capacity_lower_bound_eq17(1.0, 1.0, 2) == pytest.approx(TWO_PI_OVER_LOG32, rel=1e-15)
    assert capacity_lower_bound_eq17(0.5, 0.5, 2) < capacity_lower_bound_eq17(1.0, 0.5, 2)
    with pytest.raises(InvalidArgument):
        capacity_lower_bound_eq17(0.0, 1.0, 2)


@given(shape=st.lists(st.integers(1, 6), min_size=1, max_size=3),
       fmt=st.sampled_from(["csv", "bin"]), seed=st.integers(0, 1000))
def test_field_roundtrip(tmp_path_factory, shape, fmt, seed):
    u = np.random.default_rng(seed).normal(size=shape)
    g = Grid(np.linspace(-1, 0, len(shape)), 0.125, tuple(shape))
    path = tmp_path_factory.mktemp("f") / f"u.{fmt}"
    write_field(path, u, g, fmt)
    v, g2 = read_field(path)
    assert np.array_equal(u, v)
    assert np.array_equal(g2.lo, g.lo) and g2.h == g.h and tuple(g2.shape) == tuple(shape)
