import math

import numpy as np
import pytest

from stefan_front import (Certificate, Certifier, InitialData, Outcome,
                          SolverConfig, Termination, c_star, certify,
                          classify_run, run, sigma_star, speed_estimate)
from stefan_front.errors import BudgetExhausted, NotSpreading
from stefan_front.solver import Snapshot


def snapshot(U, g, h, t=0.0):
    U = np.asarray(U, dtype=float)
    return Snapshot(t=t, g=g, h=h, U=U, y=np.linspace(-1, 1, len(U)))


def cos_profile(amp, n=201):
    return amp * np.cos(0.5 * np.pi * np.linspace(-1, 1, n))


def test_theta_cap_fires(bistable):
    snap = snapshot(cos_profile(0.24), -1.0, 1.0)
    v = certify(snap, bistable, 1.0)
    assert v is not None
    assert v.outcome is Outcome.VANISHING
    assert v.certificate is Certificate.THETA_CAP


def test_width_mono_fires(logistic):
    snap = snapshot(cos_profile(0.5), -1.6, 1.6)
    v = certify(snap, logistic, 1.0)
    assert v.outcome is Outcome.SPREADING
    assert v.certificate is Certificate.WIDTH_MONO
    assert v.evidence["span"] > math.pi


def test_small_amp_mono_fires(logistic):
    snap = snapshot(cos_profile(1e-4), -0.5, 0.5)
    v = certify(snap, logistic, 1.0)
    assert v.outcome is Outcome.VANISHING
    assert v.certificate is Certificate.SMALL_AMP_MONO


def test_mass_cap_fires(bistable):
    # above theta pointwise but with tiny integral: a thin spike
    y = np.linspace(-1, 1, 401)
    U = 0.4 * np.exp(-(y / 0.02) ** 2) * (1 - y * y)
    snap = snapshot(U, -1.0, 1.0)
    v = certify(snap, bistable, 1.0)
    assert v.certificate is Certificate.MASS_CAP


def test_no_rule_fires(bistable):
    # above theta, too much mass for the cap, but below the stationary hump
    kit = Certifier(bistable, 1.0)
    snap = snapshot(cos_profile(0.35, 401), -3.0, 3.0)
    assert snap.integral_u() > kit.mass_bound
    assert certify(snap, bistable, 1.0, kit=kit) is None


def test_dominates_vz_fires(bistable):
    kit = Certifier(bistable, 1.0)
    span = 2.0 * kit.v_z.Z + 2.0
    snap = snapshot(cos_profile(0.98, 801), -span / 2, span / 2)
    v = certify(snap, bistable, 1.0, kit=kit)
    assert v is not None
    assert v.certificate is Certificate.DOMINATES_VZ
    assert v.outcome is Outcome.SPREADING


def test_classify_passthrough(bistable):
    cfg = SolverConfig(nl=bistable, mu=1.0, h0=1.0,
                       u0=InitialData("cosine", 0.2), t_max=30.0, N=101)
    r = run(cfg)
    assert r.termination is Termination.VANISH_CERTIFIED
    v = classify_run(r)
    assert v.outcome is Outcome.VANISHING
    assert v.certificate is Certificate.THETA_CAP


def test_classify_vanishing_heuristic(logistic):
    cfg = SolverConfig(nl=logistic, mu=1.0, h0=1.0,
                       u0=InitialData("cosine", 0.05), t_max=40.0, N=101,
                       snapshot_every=2.0, certify=False)
    r = run(cfg)
    v = classify_run(r)
    assert v.outcome is Outcome.VANISHING


def test_classify_spreading_heuristic(logistic):
    cfg = SolverConfig(nl=logistic, mu=2.0, h0=2.0,
                       u0=InitialData("cosine", 1.0), t_max=40.0, N=201,
                       snapshot_every=1.0, certify=False)
    r = run(cfg)
    v = classify_run(r)
    assert v.outcome is Outcome.SPREADING
    assert v.certificate is Certificate.HEURISTIC


def test_speed_estimate(logistic):
    cfg = SolverConfig(nl=logistic, mu=2.0, h0=2.0,
                       u0=InitialData("cosine", 1.0), t_max=60.0, N=201,
                       snapshot_every=1.0, certify=False)
    r = run(cfg)
    c_hat, diag = speed_estimate(r)
    assert diag["slope_rel_diff"] <= 1e-6
    assert diag["core_log_dev_slope"] < 0.0
    assert c_hat == pytest.approx(c_star(logistic, 2.0).c_star, rel=0.05)


def test_speed_estimate_not_spreading(bistable):
    cfg = SolverConfig(nl=bistable, mu=1.0, h0=1.0,
                       u0=InitialData("cosine", 0.2), t_max=20.0, N=101)
    r = run(cfg)
    with pytest.raises(NotSpreading):
        speed_estimate(r)


def test_speed_decreases_with_mu(logistic):
    speeds = []
    for mu in (0.5, 1.0, 2.0, 5.0):
        cfg = SolverConfig(nl=logistic, mu=mu, h0=2.0,
                           u0=InitialData("cosine", 1.0), t_max=80.0, N=201,
                           snapshot_every=1.0, certify=False)
        speeds.append(speed_estimate(run(cfg))[0])
    assert all(a < b for a, b in zip(speeds, speeds[1:]))


def test_sigma_star_supercritical_monostable(logistic):
    res = sigma_star(logistic, 1.0, 2.0, InitialData("cosine", 1.0),
                     tol=0.01, budget=10, t_max=30.0, N=101)
    assert res.sigma_lo == 0.0
    assert res.sigma_hi > 0.0
    assert not res.budget_hit
    assert all(v.outcome is Outcome.SPREADING for _, v in res.evals)


def test_sigma_star_budget_floor(logistic):
    with pytest.raises(BudgetExhausted):
        sigma_star(logistic, 1.0, 1.0, InitialData("cosine", 1.0),
                   tol=0.01, budget=5)


def test_sigma_star_monostable_narrow(logistic):
    res = sigma_star(logistic, 1.0, 1.0, InitialData("cosine", 1.0),
                     tol=0.05, budget=25, t_max=80.0, N=101)
    assert res.width <= 0.05
    assert not res.budget_hit
    # the bracket straddles the verdict flip seen in the evals
    vans = [s for s, v in res.evals if v.outcome is Outcome.VANISHING]
    sprd = [s for s, v in res.evals if v.outcome is Outcome.SPREADING]
    assert max(vans) < min(sprd)
    assert max(vans) == pytest.approx(res.sigma_lo)
    assert min(sprd) == pytest.approx(res.sigma_hi)


def test_certificate_soundness_extension(bistable):
    # a run that certifies vanishing really does die out when extended 5x
    cfg = SolverConfig(nl=bistable, mu=1.0, h0=1.0,
                       u0=InitialData("cosine", 0.24), t_max=10.0, N=101)
    r = run(cfg)
    assert r.termination is Termination.VANISH_CERTIFIED
    t_fire = max(5.0 * max(r.certificate.t, 1.0), 10.0)
    cfg2 = SolverConfig(nl=bistable, mu=1.0, h0=1.0,
                        u0=InitialData("cosine", 0.24), t_max=t_fire, N=101,
                        snapshot_every=1.0, certify=False)
    r2 = run(cfg2)
    assert r2.final.max_u() <= 1e-4
