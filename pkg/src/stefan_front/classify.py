"""Long-time fate classification and the sharp amplitude threshold.

Certificates are sufficient conditions checked at every snapshot (they
apply from any time slice treated as fresh initial data): amplitude cap
at the unstable zero, integral cap against the heat kernel, the
small-amplitude bound on narrow monostable intervals, interval width
past the monostable critical length, and pointwise domination of a
stationary profile.  Runs that never certify are classified
heuristically from the final snapshot.  The threshold sigma* between
vanishing and spreading in the family u0 = sigma*phi is bracketed by
bisection over full runs; only a bracket is ever reported, never the
point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (BudgetExhausted, DomainError, MonotoneViolation,
                     NotSpreading)
from .nonlinearity import Kind, Nonlinearity
from . import phase_plane
from . import semiwave
from . import solver as solver_mod
from .solver import InitialData, Run, Snapshot, SolverConfig, Termination

__all__ = [
    "Outcome",
    "Certificate",
    "Verdict",
    "ThresholdResult",
    "Certifier",
    "certify",
    "classify_run",
    "sigma_star",
    "speed_estimate",
]


class Outcome(enum.Enum):
    SPREADING = "Spreading"
    VANISHING = "Vanishing"
    TRANSITION_BISTABLE = "TransitionBistable"
    TRANSITION_COMBUSTION = "TransitionCombustion"
    UNDECIDED = "Undecided"


class Certificate(enum.Enum):
    THETA_CAP = "ThetaCap"
    MASS_CAP = "MassCap"
    SMALL_AMP_MONO = "SmallAmpMono"
    WIDTH_MONO = "WidthMono"
    DOMINATES_VZ = "DominatesVZ"
    HEURISTIC = "Heuristic"


@dataclass
class Verdict:
    outcome: Outcome
    certificate: Certificate
    evidence: dict
    t: float

    def descriptor(self) -> dict:
        return {"outcome": self.outcome.value,
                "certificate": self.certificate.value,
                "t": self.t,
                "evidence": {k: (None if isinstance(v, float) and not math.isfinite(v)
                                 else v)
                             for k, v in self.evidence.items()}}


@dataclass
class ThresholdResult:
    sigma_lo: float                 # certified-vanishing amplitude
    sigma_hi: float                 # certified-spreading amplitude (inf if never)
    evals: list[tuple[float, Verdict]]
    budget_hit: bool = False

    @property
    def width(self) -> float:
        return self.sigma_hi - self.sigma_lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.sigma_lo + self.sigma_hi)

    def descriptor(self) -> dict:
        return {"sigma_lo": self.sigma_lo,
                "sigma_hi": None if math.isinf(self.sigma_hi) else self.sigma_hi,
                "width": None if math.isinf(self.sigma_hi) else self.width,
                "budget_hit": self.budget_hit,
                "evals": [{"sigma": s, **v.descriptor()} for s, v in self.evals]}


# ----------------------------------------------------------------------
# certificates

def _small_amp_threshold(nl: Nonlinearity, mu: float, half_span: float) -> float:
    """Amplitude below which a narrow monostable state must vanish.

    Valid when half_span < pi/(2 sqrt(f'(0))): pick the largest delta with
    pi^2/(4 (1+delta)^2 h^2) - f'(0) >= 2 delta, then the largest s with
    pi*mu*s <= delta^2 h^2 and f(u) <= (f'(0)+delta) u on [0, s]; the cap
    is s*cos(pi/(2+delta)).
    """
    h = half_span
    gap = math.pi ** 2 / (4.0 * h * h) - nl.fp0
    if gap <= 0.0:
        return 0.0
    lo, hi = 0.0, 0.5 * gap
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if math.pi ** 2 / (4.0 * (1.0 + mid) ** 2 * h * h) - nl.fp0 >= 2.0 * mid:
            lo = mid
        else:
            hi = mid
    delta = lo
    if delta <= 0.0:
        return 0.0
    s = delta * delta * h * h / (math.pi * mu)
    us = np.linspace(1e-9, min(s, nl.u_cap), 257)
    fu = np.asarray(nl.f(us))
    bad = fu > (nl.fp0 + delta) * us
    if bad.any():
        first = int(np.argmax(bad))
        if first == 0:
            return 0.0
        s = float(us[first - 1])
    return s * math.cos(math.pi / (2.0 + delta))


class Certifier:
    """Precomputed certificate kit for one (nonlinearity, mu) pair."""

    def __init__(self, nl: Nonlinearity, mu: float, z_margin: float = 0.25):
        self.nl = nl
        self.mu = mu
        self.width_bound = (math.pi / math.sqrt(nl.fp0)
                            if nl.kind is Kind.MONOSTABLE else math.inf)
        if nl.kind in (Kind.BISTABLE, Kind.COMBUSTION):
            K = nl.sup_slope
            self.mass_bound = nl.theta * math.sqrt(2.0 * math.pi / (math.e * K))
            crit, _ = phase_plane.critical_length(nl)
            self.v_z = phase_plane.stationary_profile(nl, crit + z_margin)
        else:
            self.mass_bound = 0.0
            self.v_z = None

    def _dominates_vz(self, snap: Snapshot) -> bool:
        vz = self.v_z
        dx = snap.span / (len(snap.U) - 1)
        m = int(math.ceil(vz.Z / dx))
        if 2 * m + 1 > len(snap.U):
            return False
        vrow = vz.interp(np.arange(-m, m + 1) * dx)
        windows = np.lib.stride_tricks.sliding_window_view(snap.U, 2 * m + 1)
        return bool(np.any(np.all(windows >= vrow[None, :], axis=1)))

    def __call__(self, snap: Snapshot) -> Verdict | None:
        nl, mu = self.nl, self.mu
        max_u = snap.max_u()
        if nl.kind in (Kind.BISTABLE, Kind.COMBUSTION):
            if max_u <= nl.theta:
                return Verdict(Outcome.VANISHING, Certificate.THETA_CAP,
                               {"max_u": max_u, "theta": nl.theta}, snap.t)
            integral = snap.integral_u()
            if integral <= self.mass_bound:
                return Verdict(Outcome.VANISHING, Certificate.MASS_CAP,
                               {"integral_u": integral,
                                "mass_bound": self.mass_bound}, snap.t)
        if nl.kind is Kind.MONOSTABLE:
            if snap.span < self.width_bound:
                cap = _small_amp_threshold(nl, mu, 0.5 * snap.span)
                if 0.0 < max_u <= cap:
                    return Verdict(Outcome.VANISHING, Certificate.SMALL_AMP_MONO,
                                   {"max_u": max_u, "amp_bound": cap,
                                    "span": snap.span}, snap.t)
            if snap.span > self.width_bound:
                return Verdict(Outcome.SPREADING, Certificate.WIDTH_MONO,
                               {"span": snap.span,
                                "width_bound": self.width_bound}, snap.t)
        if self.v_z is not None and snap.span >= 2.0 * self.v_z.Z:
            if self._dominates_vz(snap):
                return Verdict(Outcome.SPREADING, Certificate.DOMINATES_VZ,
                               {"span": snap.span, "Z": self.v_z.Z,
                                "v_z_peak": self.v_z.q_top}, snap.t)
        return None


def certify(snap: Snapshot, nl: Nonlinearity, mu: float,
            kit: Certifier | None = None) -> Verdict | None:
    """First applicable certificate for this snapshot, or None."""
    return (kit or Certifier(nl, mu))(snap)


# ----------------------------------------------------------------------
# whole-run classification

def _fronts_not_decelerating(run: Run, slack: float = 0.1) -> bool:
    fr = run.fronts
    if len(fr) < 10:
        return False
    t = fr[:, 0]
    t_end = t[-1]
    late = fr[t >= 0.9 * t_end, 4]
    mid = fr[(t >= 0.45 * t_end) & (t <= 0.55 * t_end), 4]
    if not len(late) or not len(mid):
        return False
    return float(np.median(late)) >= (1.0 - slack) * float(np.median(mid))


def _recentred_peak(snap: Snapshot) -> tuple[float, float]:
    """Sub-grid peak location and value by a parabola through the top nodes."""
    j = int(np.argmax(snap.U))
    x = snap.x
    if j == 0 or j == len(x) - 1:
        return float(x[j]), float(snap.U[j])
    um, u0, up = snap.U[j - 1], snap.U[j], snap.U[j + 1]
    denom = um - 2.0 * u0 + up
    shift = 0.5 * (um - up) / denom if denom != 0.0 else 0.0
    dx = x[j + 1] - x[j]
    return float(x[j] + shift * dx), float(u0 - 0.25 * (um - up) * shift)


def classify_run(run: Run, nl: Nonlinearity | None = None,
                 mu: float | None = None, spread_tol: float = 1e-2,
                 vanish_tol: float = 1e-4, trans_tol: float = 5e-2) -> Verdict:
    """Certificate passthrough if one fired, otherwise final-state heuristics."""
    nl = nl if nl is not None else run.config.nl
    mu = mu if mu is not None else run.config.mu
    if run.certificate is not None:
        return run.certificate
    snap = run.final
    max_u = snap.max_u()

    core = np.abs(snap.x) <= 0.5 * snap.h
    if core.any() and float(snap.U[core].min()) >= 1.0 - spread_tol \
            and _fronts_not_decelerating(run):
        return Verdict(Outcome.SPREADING, Certificate.HEURISTIC,
                       {"min_core_u": float(snap.U[core].min()),
                        "max_u": max_u}, snap.t)
    if max_u <= vanish_tol:
        return Verdict(Outcome.VANISHING, Certificate.HEURISTIC,
                       {"max_u": max_u}, snap.t)
    if nl.kind is Kind.COMBUSTION and abs(max_u - nl.theta) <= trans_tol:
        window = np.abs(snap.x) <= 0.25 * snap.h
        if window.any():
            dev = float(np.abs(snap.U[window] - nl.theta).max())
            if dev <= trans_tol:
                return Verdict(Outcome.TRANSITION_COMBUSTION,
                               Certificate.HEURISTIC,
                               {"max_dev_from_theta": dev, "max_u": max_u},
                               snap.t)
    if nl.kind is Kind.BISTABLE:
        x_peak, _ = _recentred_peak(snap)
        v_inf = semiwave.ground_state(nl)
        sel = v_inf.v > 0.01
        xv = v_inf.x[sel]
        u_here = np.interp(x_peak + xv, snap.x, snap.U, left=0.0, right=0.0)
        dev = float(np.abs(u_here - v_inf.v[sel]).max())
        if dev <= trans_tol:
            return Verdict(Outcome.TRANSITION_BISTABLE, Certificate.HEURISTIC,
                           {"sup_dev_from_ground_state": dev,
                            "gamma_hat": -x_peak, "max_u": max_u}, snap.t)
    return Verdict(Outcome.UNDECIDED, Certificate.HEURISTIC,
                   {"max_u": max_u, "span": snap.span}, snap.t)


# ----------------------------------------------------------------------
# sharp threshold

@dataclass
class _ThresholdRunner:
    nl: Nonlinearity
    mu: float
    h0: float
    phi: InitialData
    t_max: float
    N: int
    snapshot_every: float
    dt_safety: float
    kit: Certifier = None
    evals: list = field(default_factory=list)
    runs_used: int = 0

    def __post_init__(self):
        self.kit = Certifier(self.nl, self.mu)

    def classify_sigma(self, sigma: float, t_max: float | None = None) -> Verdict:
        from dataclasses import replace as dc_replace
        u0 = dc_replace(self.phi, sigma=self.phi.sigma * sigma)
        cfg = SolverConfig(nl=self.nl, mu=self.mu, h0=self.h0, u0=u0,
                           t_max=t_max or self.t_max, N=self.N,
                           dt_safety=self.dt_safety,
                           snapshot_every=self.snapshot_every)
        run = solver_mod.run(cfg, certifier=self.kit)
        verdict = classify_run(run, self.nl, self.mu)
        self.runs_used += 1
        return verdict

    def record(self, sigma: float, verdict: Verdict):
        self.evals.append((sigma, verdict))
        vans = [s for s, v in self.evals if v.outcome is Outcome.VANISHING]
        sprd = [s for s, v in self.evals if v.outcome is Outcome.SPREADING]
        if vans and sprd and max(vans) >= min(sprd):
            raise MonotoneViolation(
                f"vanishing at sigma={max(vans):.6g} above spreading at "
                f"sigma={min(sprd):.6g}; numerics too coarse")


def sigma_star(nl: Nonlinearity, mu: float, h0: float, phi: InitialData,
               tol: float, budget: int, *, t_max: float = 150.0, N: int = 201,
               snapshot_every: float = 1.0, dt_safety: float = 0.4) -> ThresholdResult:
    """Bracket the sharp threshold amplitude by bisection over full runs.

    The lower end starts from the certificate-guaranteed vanishing
    amplitude, the upper end doubles until a run certifies spreading, and
    bisection shrinks the bracket to ``tol`` (absolute) within ``budget``
    runs.  Monotonicity of verdicts in sigma is assumed; a recorded
    violation aborts.  On a wide monostable interval every amplitude
    spreads and the bracket collapses at the lower end.
    """
    if budget < 10:
        raise BudgetExhausted(f"budget must allow at least 10 runs, got {budget}")
    runner = _ThresholdRunner(nl, mu, h0, phi, t_max, N, snapshot_every,
                              dt_safety)
    phi_max = float(phi.build(h0, N).max())

    if nl.kind is Kind.MONOSTABLE and h0 >= math.pi / (2.0 * math.sqrt(nl.fp0)):
        sigma = 1.0
        for _ in range(3):
            v = runner.classify_sigma(sigma)
            runner.record(sigma, v)
            if v.outcome is not Outcome.SPREADING:
                raise MonotoneViolation(
                    f"sigma={sigma:.6g} did not spread on a supercritical interval")
            sigma *= 0.5
        return ThresholdResult(sigma_lo=0.0, sigma_hi=2.0 * sigma,
                               evals=runner.evals, budget_hit=False)

    if nl.kind in (Kind.BISTABLE, Kind.COMBUSTION):
        lo = 0.999 * nl.theta / phi_max
    else:
        lo = max(_small_amp_threshold(nl, mu, h0) / phi_max, 1e-6)
    v = runner.classify_sigma(lo)
    runner.record(lo, v)
    if v.outcome is not Outcome.VANISHING:
        raise MonotoneViolation(
            f"certificate-level amplitude sigma={lo:.6g} did not vanish")

    hi = 2.0 * lo
    while runner.runs_used < budget:
        v = runner.classify_sigma(hi)
        runner.record(hi, v)
        if v.outcome is Outcome.SPREADING:
            break
        if v.outcome is Outcome.VANISHING:
            lo = hi
            hi *= 2.0
            continue
        return ThresholdResult(sigma_lo=lo, sigma_hi=math.inf,
                               evals=runner.evals, budget_hit=True)
    else:
        return ThresholdResult(sigma_lo=lo, sigma_hi=math.inf,
                               evals=runner.evals, budget_hit=True)

    budget_hit = False
    while hi - lo > tol:
        if runner.runs_used >= budget:
            budget_hit = True
            break
        mid = 0.5 * (lo + hi)
        v = runner.classify_sigma(mid)
        if v.outcome not in (Outcome.VANISHING, Outcome.SPREADING):
            v = runner.classify_sigma(mid, t_max=2.0 * runner.t_max)
        runner.record(mid, v)
        if v.outcome is Outcome.VANISHING:
            lo = mid
        elif v.outcome is Outcome.SPREADING:
            hi = mid
        else:
            budget_hit = True
            break
    return ThresholdResult(sigma_lo=lo, sigma_hi=hi, evals=runner.evals,
                           budget_hit=budget_hit)


# ----------------------------------------------------------------------
# spreading speed from a run

def speed_estimate(run: Run) -> tuple[float, dict]:
    """Least-squares front speed over the second half of a spreading run.

    Returns the mean of the h and -g slopes plus diagnostics: their
    relative difference and the slope of log|u(t,0) - 1| (negative when
    the core approaches 1 exponentially).
    """
    verdict = classify_run(run)
    if verdict.outcome is not Outcome.SPREADING:
        raise NotSpreading(f"run classified {verdict.outcome.value}")
    fr = run.fronts
    if len(fr) < 16:
        raise DomainError(
            "run terminated before enough front history accumulated to fit")
    t_end = fr[-1, 0]
    late = fr[:, 0] >= 0.5 * t_end
    t = fr[late, 0]
    A = np.vstack([t, np.ones_like(t)]).T
    slope_h = float(np.linalg.lstsq(A, fr[late, 2], rcond=None)[0][0])
    slope_g = float(np.linalg.lstsq(A, -fr[late, 1], rcond=None)[0][0])
    c_hat = 0.5 * (slope_h + slope_g)

    ts, devs = [], []
    for s in run.snapshots:
        if s.t >= 0.5 * t_end and s.t > 0.0:
            y0 = -(s.g + s.h) / (s.h - s.g)
            u0 = float(np.interp(y0, s.y, s.U))
            dev = abs(u0 - 1.0)
            if dev > 0.0:
                ts.append(s.t)
                devs.append(math.log(dev))
    decay_slope = 0.0
    decay_resid = math.nan
    if len(ts) >= 3:
        At = np.vstack([ts, np.ones(len(ts))]).T
        coef, res, *_ = np.linalg.lstsq(At, devs, rcond=None)
        decay_slope = float(coef[0])
        decay_resid = float(res[0]) if len(res) else 0.0
    diagnostics = {
        "slope_h": slope_h,
        "slope_neg_g": slope_g,
        "slope_rel_diff": abs(slope_h - slope_g) / max(abs(c_hat), 1e-300),
        "core_log_dev_slope": decay_slope,
        "core_log_dev_resid": decay_resid,
    }
    return c_hat, diagnostics
