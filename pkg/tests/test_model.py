import math

import pytest
from scipy.optimize import brentq

from cayley_tisgm.model import (
    ANTIFERRO, BOUNDARY, FERRO, ModelParams, big_theta, critical_temperature, derive, tau, tau_c,
    theta_c0, theta_cm_k2, theta_from_tau, theta_from_temperature,
)
from cayley_tisgm.tisgm import sym_w1_discriminant


@pytest.mark.parametrize("k,q,theta", [(1, 5, 2.0), (2, 1, 2.0), (2, 5, 0.0), (2, 5, -1.0), (2.5, 5, 2.0),
                                       (2, 5, float("inf"))])
def test_params_validation(k, q, theta):
    with pytest.raises(ValueError):
        ModelParams(k, q, theta)


def test_coupling_sign():
    assert ModelParams(2, 5, 2.0).coupling_sign == FERRO
    assert ModelParams(2, 5, 0.5).coupling_sign == ANTIFERRO
    assert ModelParams(2, 5, 1.0).coupling_sign == BOUNDARY


def test_derive_at_symmetry_point():
    d = derive(ModelParams(2, 5, 1.0))
    assert d.big_theta == 1.0 and d.tau == 1.0 and d.tau_c == 6.0
    assert d.theta_cr == pytest.approx(6 + math.sqrt(35), abs=1e-12)


def test_tau_at_theta_cr():
    assert tau(6 + math.sqrt(35)) == pytest.approx(tau_c(2, 5), abs=1e-12)


def test_big_theta_value():
    assert big_theta(2.0, 5) == pytest.approx(4 / 3, abs=1e-14)


@pytest.mark.parametrize("k,q,expected", [(2, 5, 4 + math.sqrt(19)), (2, 2, 3.0), (3, 5, 2 + math.sqrt(6))])
def test_theta_c0_against_bisection(k, q, expected):
    root = brentq(lambda t: big_theta(t, q) - (k + 1) / (k - 1), 1.0 + 1e-12, 100.0, xtol=1e-14)
    assert theta_c0(k, q) == pytest.approx(expected, abs=1e-12)
    assert theta_c0(k, q) == pytest.approx(root, abs=1e-10)


@pytest.mark.parametrize("m,q,approx", [(1, 5, 9.8989), (2, 5, 11.7125)])
def test_theta_cm_matches_discriminant_root(m, q, approx):
    th = theta_cm_k2(m, q)
    root = brentq(lambda t: sym_w1_discriminant(m, t, q), approx - 0.1, approx + 0.1, xtol=1e-14)
    assert th == pytest.approx(root, abs=1e-9)
    assert th == pytest.approx(approx, abs=1e-4)


def test_theta_cm_q2_is_simple_discriminant_root():
    th = theta_cm_k2(1, 2)
    assert th == pytest.approx(3 + 2 * math.sqrt(2), abs=1e-12)
    assert abs(sym_w1_discriminant(1, th, 2)) < 1e-9
    assert sym_w1_discriminant(1, th - 1e-3, 2) < 0 < sym_w1_discriminant(1, th + 1e-3, 2)
    # 3 + 2 sqrt(3) is not a root
    assert sym_w1_discriminant(1, 3 + 2 * math.sqrt(3), 2) > 100


def test_theta_cm_antiferro_is_reciprocal():
    assert theta_cm_k2(1, 5, ANTIFERRO) == pytest.approx(1 / theta_cm_k2(1, 5), rel=1e-14)
    with pytest.raises(ValueError):
        theta_cm_k2(3, 5)
    with pytest.raises(ValueError):
        theta_cm_k2(1, 5, "sideways")


def test_theta_from_tau_inverse():
    for t in (1.0, 1.5, 6.0, 40.0):
        assert tau(theta_from_tau(t)) == pytest.approx(t, rel=1e-14)
        assert tau(theta_from_tau(t, ferro=False)) == pytest.approx(t, rel=1e-12)
    with pytest.raises(ValueError):
        theta_from_tau(0.5)


def test_critical_temperature():
    assert critical_temperature(1.0, math.e) == pytest.approx(1.0)
    assert critical_temperature(2.0, math.e ** 2) == pytest.approx(1.0)
    assert critical_temperature(1.0, 4 + math.sqrt(19)) == pytest.approx(0.4709, abs=1e-4)
    with pytest.raises(ValueError):
        critical_temperature(1.0, 1.0)
    assert theta_from_temperature(1.0, critical_temperature(1.0, 7.0)) == pytest.approx(7.0)
