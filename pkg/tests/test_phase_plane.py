import math

import numpy as np
import pytest

from stefan_front import (critical_length, finite_wave, p0, phase_trajectory,
                          q_top, stationary_profile, time_map)
from stefan_front.errors import DomainError, NoSolution, NoTermination
from stefan_front.phase_plane import Termination

import oracles


def profile_residual(nl, x, v):
    h = x[1] - x[0]
    d2 = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / h ** 2
    return np.abs(d2 + np.asarray(nl.f(v[1:-1])))


def test_p0_at_zero_is_omega(logistic, bistable):
    for nl in (logistic, bistable):
        assert p0(nl, 0.2, 0.0) == pytest.approx(0.2, abs=1e-12)


def test_p0_logistic_value(logistic):
    # sqrt(0.01 - 2*(0.1^2/2 - 0.1^3/3))
    expect = math.sqrt(0.01 - 2 * (0.005 - 0.001 / 3))
    assert p0(logistic, 0.1, 0.1) == pytest.approx(expect, abs=1e-10)


def test_p0_vanishes_at_peak(logistic):
    top = q_top(logistic, 0.3)
    assert p0(logistic, 0.3, top) <= 1e-8


def test_p0_domain_error(logistic):
    with pytest.raises(DomainError):
        p0(logistic, 0.1, 0.9)


def test_q_top_limits(logistic, bistable, combustion):
    w0 = logistic.omega0
    assert q_top(logistic, w0 * (1 - 1e-10)) > 0.999
    assert q_top(bistable, 1e-7) == pytest.approx(bistable.theta_bar, abs=1e-4)
    assert q_top(combustion, 1e-7) == pytest.approx(0.25, abs=1e-4)


def test_q_top_strictly_increasing(logistic, bistable, combustion):
    for nl in (logistic, bistable, combustion):
        ladder = [q_top(nl, f * nl.omega0) for f in np.arange(0.1, 1.0, 0.1)]
        assert all(a < b for a, b in zip(ladder, ladder[1:]))


def test_time_map_logistic_small_peak(logistic):
    assert time_map(logistic, 1e-3) == pytest.approx(math.pi / 2, abs=2e-3)


def test_time_map_diverges_at_one(logistic, bistable, combustion):
    for nl in (logistic, bistable, combustion):
        assert time_map(nl, 0.999) > time_map(nl, 0.99) > time_map(nl, 0.9)


def test_time_map_diverges_at_theta_bar(bistable):
    tb = bistable.theta_bar
    zs = [time_map(bistable, tb + d) for d in (1e-2, 1e-4, 1e-6)]
    assert zs[0] < zs[1] < zs[2]
    assert zs[2] > 15.0


def test_time_map_domain(logistic, bistable):
    with pytest.raises(DomainError):
        time_map(logistic, 1.0)
    with pytest.raises(DomainError):
        time_map(bistable, bistable.theta_bar - 1e-3)


def test_time_map_against_trapezoid_oracle(logistic, bistable, combustion):
    rng = np.random.default_rng(3)
    for nl in (logistic, bistable, combustion):
        grid = oracles.antiderivative_table(nl.f)
        lo = {"monostable": 0.05, "bistable": nl.theta_bar or 0.0,
              "combustion": nl.theta or 0.0}[nl.kind.value]
        for q in rng.uniform(lo + 0.05, 0.95, 5):
            expect = oracles.time_map_trapezoid(nl.f, float(nl.f(q)), grid,
                                                float(q))
            assert time_map(nl, float(q)) == pytest.approx(expect, abs=1e-6)


def test_critical_length_logistic(logistic):
    z_prime, z_m = critical_length(logistic)
    assert z_m == pytest.approx(math.pi / 2, abs=1e-12)
    assert z_prime <= z_m + 1e-9
    assert z_prime > 0


def test_critical_length_bistable_against_scan(bistable):
    z_b, second = critical_length(bistable)
    assert second is None
    assert z_b > 0
    grid = oracles.antiderivative_table(bistable.f)
    pad = 1e-3
    qs, zs = oracles.time_map_scan(bistable.f, grid,
                                   bistable.theta_bar + pad, 1.0 - pad,
                                   n_scan=10_000, n_s=20_001)
    scan_min = float(zs.min())
    assert z_b <= scan_min + 1e-6
    assert scan_min - z_b <= 1e-4


def test_critical_length_combustion_positive(combustion):
    z_c, second = critical_length(combustion)
    assert second is None
    assert z_c > 0


def test_stationary_profile_logistic(logistic):
    sp = stationary_profile(logistic, math.pi / 2 + 0.2)
    assert 0.0 < sp.q_top < 1.0
    assert sp.v[0] == 0.0 and sp.v[-1] == 0.0
    assert np.allclose(sp.v, sp.v[::-1])
    assert profile_residual(logistic, sp.x, sp.v).max() <= 1e-6
    assert sp.boundary_slope > 0


def test_stationary_profile_residual_bound(bistable):
    z_b, _ = critical_length(bistable)
    sp = stationary_profile(bistable, z_b + 0.5)
    assert bistable.theta_bar < sp.q_top < 1.0
    bound = 1e-4 * (1.0 + bistable.sup_val)
    assert profile_residual(bistable, sp.x, sp.v).max() <= bound


def test_stationary_profile_below_critical(bistable, logistic):
    z_b, _ = critical_length(bistable)
    with pytest.raises(NoSolution):
        stationary_profile(bistable, z_b - 0.05)
    with pytest.raises(NoSolution):
        stationary_profile(logistic, math.pi / 2 - 0.1)


def test_finite_wave_zero_speed_closed_form(logistic):
    for omega in (0.1, 0.3, 0.5):
        fw = finite_wave(logistic, 0.0, omega)
        assert fw.q_end == pytest.approx(q_top(logistic, omega), abs=1e-6)
        assert fw.z_end == pytest.approx(time_map(logistic, fw.q_end), abs=1e-6)
        assert np.all(np.diff(fw.q) > -1e-12)


def test_finite_wave_profile_matches_quadrature(logistic):
    omega = 0.3
    fw = finite_wave(logistic, 0.0, omega)
    keep = fw.q <= 0.9 * fw.q_end
    zq = oracles.wave_coordinate_quadrature(logistic.f, omega, fw.q[keep])
    assert np.max(np.abs(zq - fw.z[keep])) <= 1e-6


def test_finite_wave_small_speed_perturbation(logistic):
    omega = 0.3
    base = finite_wave(logistic, 0.0, omega)
    eps = 0.05
    fw = finite_wave(logistic, 0.01, omega)
    assert base.q_end < fw.q_end < base.q_end + eps
    assert abs(fw.z_end - base.z_end) < eps


def test_finite_wave_near_omega0(logistic):
    fw = finite_wave(logistic, 0.0, 0.999 * logistic.omega0)
    assert fw.q_end > 0.97


def test_finite_wave_no_termination(logistic):
    with pytest.raises(NoTermination):
        finite_wave(logistic, 3.0, 0.3)


def test_trajectory_residual_and_termination(logistic):
    traj = phase_trajectory(logistic, 0.05, 0.3)
    assert traj.terminated_by is Termination.P_HIT_ZERO
    assert traj.ode_residual(logistic) <= 1e-3 * (1.0 + traj.c)
    q0, p0v = traj.start
    assert q0 == 0.0 and p0v == pytest.approx(0.3)
    interior = (traj.q > 1e-6) & (traj.q < traj.q[-1] - 1e-6)
    assert np.all(traj.p[interior] > 0)
