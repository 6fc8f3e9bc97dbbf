import math

import numpy as np
import pytest

from stefan_front import Kind, build, catalog
from stefan_front.errors import DomainError, KindError, ValidationError
from stefan_front.nonlinearity import (omega0, primitive, sup_slope, sup_val,
                                       theta_bar)


def cubic_theta_bar(theta):
    # positive root of 3 x^2 - 4 (1+theta) x + 6 theta = 0 below 1
    a, b, c = 3.0, -4.0 * (1.0 + theta), 6.0 * theta
    return (-b - math.sqrt(b * b - 4.0 * a * c)) / (2.0 * a)


def test_logistic_constants(logistic):
    assert logistic.kind is Kind.MONOSTABLE
    assert logistic.fp0 == pytest.approx(1.0, abs=1e-12)
    assert logistic.fp1 == pytest.approx(-1.0, abs=1e-12)
    assert logistic.sup_slope == pytest.approx(1.0, abs=1e-9)
    assert logistic.sup_val == pytest.approx(0.25, abs=1e-9)


def test_bistable_accepted_and_integral(bistable):
    # closed form: int_0^1 u(u-theta)(1-u) du = (1 - 2 theta)/12
    assert primitive(bistable, 0.0, 1.0) == pytest.approx((1 - 0.5) / 12,
                                                          abs=1e-10)


def test_bistable_unbalanced_rejected():
    with pytest.raises(ValidationError, match="int_0\\^1 f"):
        catalog("cubic_bistable", theta=0.6)


def test_theta_domain_error():
    with pytest.raises(DomainError):
        catalog("cubic_bistable", theta=1.5)


def test_primitive_values(logistic, combustion):
    assert primitive(logistic, 0.0, 1.0) == pytest.approx(1.0 / 6.0, abs=1e-10)
    assert primitive(logistic, 0.3, 0.3) == 0.0
    assert primitive(combustion, 0.0, 1.0) == pytest.approx(0.75 ** 3 / 6.0,
                                                            abs=1e-10)


def test_primitive_additivity(logistic, bistable, combustion):
    rng = np.random.default_rng(0)
    for nl in (logistic, bistable, combustion):
        for _ in range(5):
            a, b, c = np.sort(rng.uniform(0.0, nl.u_cap, 3))
            whole = primitive(nl, a, c)
            split = primitive(nl, a, b) + primitive(nl, b, c)
            assert abs(whole - split) <= 2e-10


def test_theta_bar_closed_form(bistable):
    tb = theta_bar(bistable)
    assert tb == pytest.approx(cubic_theta_bar(0.25), abs=1e-9)
    assert bistable.theta < tb < 1.0
    assert abs(primitive(bistable, 0.0, tb)) <= 1e-9


def test_theta_bar_monotone_in_theta():
    values = [theta_bar(catalog("cubic_bistable", theta=th))
              for th in (0.1, 0.2, 0.3)]
    closed = [cubic_theta_bar(th) for th in (0.1, 0.2, 0.3)]
    assert values == pytest.approx(closed, abs=1e-8)
    assert values[0] < values[1] < values[2]


def test_theta_bar_kind_error(logistic):
    with pytest.raises(KindError):
        theta_bar(logistic)


def test_omega0_values(logistic, bistable, combustion):
    assert omega0(bistable) == pytest.approx(math.sqrt(1.0 / 12.0), abs=1e-9)
    assert omega0(combustion) == pytest.approx(0.75 ** 1.5 / math.sqrt(3.0),
                                               abs=1e-9)
    assert omega0(combustion) == pytest.approx(0.375, abs=1e-9)
    for nl in (logistic, bistable, combustion):
        assert omega0(nl) ** 2 == pytest.approx(2 * primitive(nl, 0, 1),
                                                abs=1e-9)


def test_combustion_sup_slope(combustion):
    # max of (u-theta)(1-u)/u sits at u = sqrt(theta)
    assert sup_slope(combustion) == pytest.approx(0.25, abs=1e-8)
    assert sup_val(combustion) == pytest.approx(0.375 ** 2, abs=1e-8)


def test_revalidation_on_denser_grid():
    # the invariants survive a 10x denser build and fresh random probes
    for name, kw in (("logistic", {}), ("cubic_bistable", {"theta": 0.25}),
                     ("combustion", {"theta": 0.25})):
        nl = catalog(name, grid_n=5130, **kw)
        rng = np.random.default_rng(1)
        u = rng.uniform(1e-6, nl.u_cap, 4000)
        fu = np.asarray(nl.f(u))
        assert np.all(fu <= nl.sup_slope * u + 1e-9)
        if nl.kind is Kind.MONOSTABLE:
            mask = np.abs(u - 1.0) > 1e-6
            assert np.all((1 - u[mask]) * fu[mask] > 0)
        elif nl.kind is Kind.BISTABLE:
            th = nl.theta
            assert np.all(fu[(u > 1e-3) & (u < th - 1e-3)] < 0)
            assert np.all(fu[(u > th + 1e-3) & (u < 1 - 1e-3)] > 0)
            assert np.all(fu[u > 1 + 1e-3] < 0)
        else:
            th = nl.theta
            assert np.all(fu[u <= th] == 0.0)
            assert np.all(fu[(u > th + 1e-3) & (u < 1 - 1e-3)] > 0)
            assert np.all(fu[u > 1 + 1e-3] < 0)


def test_fast_antiderivative_matches_adaptive(logistic, bistable, combustion):
    rng = np.random.default_rng(2)
    for nl in (logistic, bistable, combustion):
        for x in rng.uniform(0.0, nl.u_cap, 8):
            assert abs(float(nl.integral_from_zero(x))
                       - primitive(nl, 0.0, float(x))) <= 5e-10


def test_custom_checks_only_zero_at_origin():
    nl = catalog("custom", coeffs=[0.0, -1.0, 5.0, -3.0])
    assert nl.kind is Kind.CUSTOM
    assert nl.theta is None and nl.theta_bar is None
    with pytest.raises(ValidationError, match="f\\(0\\)"):
        catalog("custom", coeffs=[0.5, 1.0])


def test_grid_n_floor():
    with pytest.raises(DomainError):
        catalog("logistic", grid_n=32)


def test_build_custom_callable():
    nl = build(Kind.CUSTOM, lambda u: math.sin(u) * 0.1,
               lambda u: math.cos(u) * 0.1, u_cap=2.0)
    assert nl.sup_slope == pytest.approx(0.1, rel=1e-6)
