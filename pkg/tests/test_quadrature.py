import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ringq.errors import EvaluationError, InvalidArgument
from ringq.quadrature import (QuadratureRule, annulus_integral, ball_volume, omega,
                              radial_integral, sphere_integral, sphere_nodes)


def test_omega_values():
    assert omega(2) == pytest.approx(2 * math.pi, rel=1e-15)
    assert omega(3) == pytest.approx(4 * math.pi, rel=1e-15)
    # 2 pi^2, frozen from a 30-digit evaluation
    assert omega(4) == pytest.approx(19.7392088021787172, rel=1e-15)
    with pytest.raises(InvalidArgument):
        omega(1)


def test_omega4_monte_carlo_crosscheck():
    # surface area = d/dr of the ball volume at r = 1: omega = n * volume,
    # and the volume of the 4-ball is estimated by sampling the cube
    rng = np.random.default_rng(3)
    pts = rng.uniform(-1, 1, size=(400_000, 4))
    vol = 16.0 * np.mean(np.sum(pts ** 2, axis=1) < 1.0)
    assert 4 * vol == pytest.approx(omega(4), rel=0.02)


def test_ball_volume():
    assert ball_volume(2) == pytest.approx(math.pi)
    assert ball_volume(3) == pytest.approx(4 * math.pi / 3)
    for n in range(2, 7):
        assert omega(n) / ball_volume(n) == pytest.approx(n, rel=1e-14)


def test_rule_validation():
    with pytest.raises(InvalidArgument):
        QuadratureRule(radial_points=4)
    with pytest.raises(InvalidArgument):
        QuadratureRule(sphere_samples=10)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_sphere_weights_sum_to_area(n):
    dirs, w = sphere_nodes(n, 256)
    assert np.allclose(np.linalg.norm(dirs, axis=1), 1.0)
    assert w.sum() == pytest.approx(omega(n), rel=1e-13)


def test_sphere_integral_examples():
    r2 = QuadratureRule(n=2)
    r3 = QuadratureRule(n=3)
    assert sphere_integral(lambda p: np.ones(p.shape[:-1]), None, 2.0, r2) == pytest.approx(4 * math.pi)
    assert abs(sphere_integral(lambda p: p[..., 0], None, 1.3, r2)) < 1e-12
    assert sphere_integral(lambda p: np.sum(p * p, -1), None, 1.0, r3) == pytest.approx(4 * math.pi)


def test_sphere_integral_dense_monte_carlo():
    # x1^2 integrates to omega/n on the unit sphere; MC oracle on 10^6 directions
    rng = np.random.default_rng(5)
    d = rng.normal(size=(1_000_000, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    mc = 4 * math.pi * np.mean(d[:, 0] ** 2)
    v = sphere_integral(lambda p: p[..., 0] ** 2, None, 1.0, QuadratureRule(n=3, sphere_samples=4096))
    assert v == pytest.approx(mc, rel=5e-3)


@pytest.mark.parametrize("n", [2, 3, 4])
@given(c=st.floats(-3, 3), r=st.floats(0.1, 5), k=st.integers(0, 3))
def test_odd_fields_cancel(n, c, r, k):
    rule = QuadratureRule(n=n)
    j = k % n
    v = sphere_integral(lambda p: p[..., j] * (1 + c * p[..., j] ** 2), None, r, rule)
    assert abs(v) < 1e-8


def test_annulus_examples():
    r2 = QuadratureRule(n=2)
    one = lambda p: np.ones(p.shape[:-1])
    assert annulus_integral(one, None, 1.0, 2.0, r2) == pytest.approx(3 * math.pi, rel=1e-13)
    inv2 = lambda p: 1.0 / np.sum(p * p, -1)
    assert annulus_integral(inv2, None, 1.0, math.e, r2) == pytest.approx(2 * math.pi, rel=1e-13)
    with pytest.raises(InvalidArgument):
        annulus_integral(one, None, 2.0, 1.0, r2)


@given(a=st.floats(1e-6, 0.5), ratio=st.floats(1.5, 1e4), split=st.floats(0.05, 0.95))
def test_annulus_additivity(a, ratio, split):
    rule = QuadratureRule(n=3)
    b = a * ratio
    mid = a * ratio ** split
    F = lambda p: np.log(1 + np.sum(p * p, -1)) + p[..., 2] ** 2
    whole = annulus_integral(F, None, a, b, rule)
    parts = annulus_integral(F, None, a, mid, rule) + annulus_integral(F, None, mid, b, rule)
    assert parts == pytest.approx(whole, rel=1e-10)


def test_spectral_convergence_on_cubic():
    exact = (2.0 ** 4 - 0.5 ** 4) / 4
    errs = []
    for k in (8, 16):
        rule = QuadratureRule(radial_points=k, panel_width=math.inf)
        errs.append(abs(radial_integral(lambda t: t ** 3, 0.5, 2.0, rule) - exact))
    assert errs[1] <= errs[0] / 10 or errs[1] < 1e-14


def test_evaluation_errors_propagate():
    rule = QuadratureRule(n=2)
    with pytest.raises(EvaluationError):
        sphere_integral(lambda p: np.full(p.shape[:-1], np.nan), None, 1.0, rule)

    def boom(p):
        raise RuntimeError("no")
    with pytest.raises(EvaluationError):
        annulus_integral(boom, None, 0.1, 1.0, rule)
