"""Semi-waves and their speeds.

The trajectory that enters the saddle (1, 0) of q' = p, p' = c p - f(q)
with negative slope defines P_c(q).  Its value at q = 0 decreases in c;
the classical speed c0 is where it first vanishes, and the semi-wave
speed for a Stefan coefficient mu is the unique c* in (0, c0) with
P_{c*}(0) = c*/mu.  Integration runs backward in z from a linearized
start at q = 1 - eps, which rides the expanding direction of the
reversed flow and is therefore numerically stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DegenerateError, DomainError, KindError, NoTermination
from .nonlinearity import Kind, Nonlinearity
from .phase_plane import FiniteWave, PhaseTrajectory, Termination

__all__ = [
    "SaddleTrajectory",
    "SemiWaveResult",
    "GroundState",
    "saddle_trajectory",
    "c0",
    "c_star",
    "perturbed_finite_wave",
    "ground_state",
]

P_ZERO_TOL = 1e-9     # decides "P_c(0) > 0" in the c0 bisection
_BISECT_WIDTH = 1e-8
_ORIGIN_TOL = 1e-12
_Q_START_RICHARDSON = np.linspace(0.1, 0.9, 17)


@dataclass
class SaddleTrajectory:
    """The trajectory p = P_c(q) entering the saddle (1, 0) with negative slope.

    ``q_c`` is the first q where P hits zero (0 when P stays positive down
    to q = 0), ``P_at_0`` the crossing value at q = 0 (0 when the curve
    dies at q_c > 0 or flows into the origin).
    """

    c: float
    q: np.ndarray
    p: np.ndarray
    q_c: float
    P_at_0: float
    slope_at_1: float
    z_span: float

    def interp(self, qv):
        """P at arbitrary q by linear interpolation of the samples."""
        return np.interp(qv, self.q, self.p)


@dataclass
class SemiWaveResult:
    """Speeds and profile of the semi-wave for a given Stefan coefficient."""

    c0: float
    c_star: float
    mu: float
    omega_star: float
    z: np.ndarray
    q: np.ndarray
    xi_trace: list[tuple[float, float]]

    def summary(self) -> dict:
        return {"c0": self.c0, "c_star": self.c_star, "mu": self.mu,
                "omega_star": self.omega_star}


@dataclass
class GroundState:
    """Evenly decreasing stationary solution on the line (bistable transition limit)."""

    x: np.ndarray
    v: np.ndarray
    peak: float
    tail_tol: float

    def interp(self, xq):
        return np.interp(xq, self.x, self.v, left=0.0, right=0.0)


# ----------------------------------------------------------------------

@dataclass
class _SaddleRun:
    """Raw backward integration plus the analytic continuation below theta.

    For combustion kinds f vanishes on [0, theta], so dP/dq = c exactly
    there and the segment p = 0 consists of degenerate equilibria; the
    integration stops at q = theta and the linear formula takes over.
    ``z_extra`` is the z-length of that analytic piece (inf if the curve
    dies at q_c > 0, where the wave creeps off a rest point).
    """

    sol: object
    tau_end: float
    q_c: float
    p_at_0: float
    slope: float
    c: float
    theta_cut: float | None = None   # q where the analytic piece starts
    p_theta: float = 0.0
    z_extra: float = 0.0

    @property
    def z_span(self) -> float:
        return self.tau_end + self.z_extra

    def samples(self, n: int):
        """(q ascending, p) samples including the analytic piece."""
        taus = np.linspace(0.0, self.tau_end, n)
        y = self.sol.sol(taus)
        q = y[0][::-1].copy()
        p = np.maximum(y[1][::-1], 0.0)
        if self.theta_cut is not None:
            q_lin = np.linspace(self.q_c, self.theta_cut, 200, endpoint=False)
            p_lin = self.p_at_0 + self.c * q_lin if self.p_at_0 > 0.0 \
                else self.c * (q_lin - self.q_c)
            q = np.concatenate([q_lin, q])
            p = np.concatenate([np.maximum(p_lin, 0.0), p])
        return q, p

    def profile(self, z: np.ndarray) -> np.ndarray:
        """q as a function of the wave coordinate z in [0, z_span]."""
        out = np.empty_like(z)
        analytic = z < self.z_extra
        if self.theta_cut is not None and analytic.any():
            za = z[analytic]
            if self.c > 0.0:
                out[analytic] = self.p_at_0 / self.c * (np.exp(self.c * za) - 1.0)
            else:
                out[analytic] = self.p_at_0 * za
        tau = np.clip(self.z_span - z[~analytic], 0.0, self.tau_end)
        out[~analytic] = self.sol.sol(tau)[0]
        return out


def _integrate_saddle(nl: Nonlinearity, c: float, eps_start: float) -> _SaddleRun:
    """Backward-z integration from the linearized saddle start at q = 1 - eps."""
    slope = 0.5 * (c - math.sqrt(c * c - 4.0 * nl.fp1))
    q_start = 1.0 - eps_start
    p_start = -slope * eps_start
    theta_cut = nl.theta if nl.kind is Kind.COMBUSTION else None

    def rhs(tau, y):
        q, p = y
        return [-p, float(nl.f(q)) - c * p]

    hit_q0 = lambda tau, y: y[0] - (theta_cut if theta_cut else 0.0)
    hit_q0.terminal = True
    hit_q0.direction = -1
    hit_p0 = lambda tau, y: y[1]
    hit_p0.terminal = True
    hit_p0.direction = -1
    near_origin = lambda tau, y: max(y[0], y[1]) - _ORIGIN_TOL
    near_origin.terminal = True
    near_origin.direction = -1

    sol = solve_ivp(rhs, (0.0, 1e4), [q_start, p_start],
                    events=(hit_q0, hit_p0, near_origin),
                    dense_output=True, rtol=1e-10, atol=1e-14)

    if theta_cut is not None:
        if sol.t_events[0].size:
            # stopped at q = theta: finish with P(q) = p_theta + c (q - theta)
            tau_end = float(sol.t_events[0][0])
            p_theta = max(float(sol.y_events[0][0][1]), 0.0)
            run = _SaddleRun(sol=sol, tau_end=tau_end, q_c=0.0, p_at_0=0.0,
                             slope=slope, c=c, theta_cut=theta_cut,
                             p_theta=p_theta)
            tail = p_theta - c * theta_cut
            if tail > 0.0:
                run.p_at_0 = tail
                run.z_extra = (math.log(p_theta / tail) / c if c > 0.0
                               else theta_cut / p_theta)
            else:
                run.q_c = theta_cut - p_theta / c if c > 0.0 else 0.0
                run.z_extra = math.inf
            return run
        if sol.t_events[1].size:
            tau_end = float(sol.t_events[1][0])
            return _SaddleRun(sol=sol, tau_end=tau_end,
                              q_c=max(float(sol.y_events[1][0][0]), 0.0),
                              p_at_0=0.0, slope=slope, c=c)
        raise NoTermination(
            f"saddle trajectory stalled at (q={sol.y[0][-1]:.3g}, "
            f"p={sol.y[1][-1]:.3g})")

    if sol.t_events[0].size:
        tau_end = float(sol.t_events[0][0])
        q_c, p_at_0 = 0.0, float(sol.y_events[0][0][1])
    elif sol.t_events[1].size:
        tau_end = float(sol.t_events[1][0])
        q_c, p_at_0 = float(sol.y_events[1][0][0]), 0.0
    elif sol.t_events[2].size:
        tau_end = float(sol.t_events[2][0])
        q_c, p_at_0 = 0.0, 0.0
    else:
        q_f, p_f = sol.y[0][-1], sol.y[1][-1]
        if q_f < 1e-6 and p_f < 1e-6:  # crawling into the origin node
            tau_end, q_c, p_at_0 = float(sol.t[-1]), 0.0, 0.0
        else:
            raise NoTermination(
                f"saddle trajectory stalled at (q={q_f:.3g}, p={p_f:.3g})")
    return _SaddleRun(sol=sol, tau_end=tau_end, q_c=max(q_c, 0.0),
                      p_at_0=max(p_at_0, 0.0), slope=slope, c=c)


def saddle_trajectory(nl: Nonlinearity, c: float, eps_start: float = 1e-4,
                      check_start: bool = True) -> SaddleTrajectory:
    """Compute P_c by backward integration from q = 1 - eps_start.

    The start uses the linear term of the saddle expansion only; with
    ``check_start`` the integration is repeated at eps_start/2 and the two
    must agree to 1e-7 on q in [0.1, 0.9].
    """
    if c < 0.0:
        raise DomainError(f"speed must be nonnegative, got {c}")
    if not 0.0 < eps_start <= 1e-3:
        raise DomainError(f"eps_start must lie in (0, 1e-3], got {eps_start}")
    if nl.fp1 >= 0.0:
        raise DegenerateError(f"u = 1 must be a saddle: f'(1) = {nl.fp1:.6g} >= 0")

    run = _integrate_saddle(nl, c, eps_start)
    q, p = run.samples(4000)
    if check_start:
        # interpolation noise must sit well below the 1e-7 gate, hence the
        # dense sampling of both runs
        run2 = _integrate_saddle(nl, c, 0.5 * eps_start)
        qd, pd = run.samples(20000)
        q2, p2 = run2.samples(20000)
        probe = _Q_START_RICHARDSON
        ok = (probe > run.q_c + 0.02) & (probe > q2[0] + 0.02)
        if ok.any():
            diff = np.abs(np.interp(probe[ok], qd, pd)
                          - np.interp(probe[ok], q2, p2))
            if diff.max() > 1e-7:
                raise NoTermination(
                    f"saddle start not converged: halving eps_start moved "
                    f"P by {diff.max():.3g}")
    q = np.append(q, 1.0)
    p = np.append(p, 0.0)
    return SaddleTrajectory(c=c, q=q, p=p, q_c=run.q_c, P_at_0=run.p_at_0,
                            slope_at_1=run.slope, z_span=run.z_span)


def _p_at_zero(nl: Nonlinearity, c: float, eps_start: float) -> float:
    return _integrate_saddle(nl, c, eps_start).p_at_0


def c0(nl: Nonlinearity, eps_start: float = 1e-4) -> float:
    """The classical wave speed: where P_c(0) first vanishes.

    Bisection of the predicate P_c(0) > tol on [0, 2*sqrt(K)]; the upper
    end is excluded by the linear comparison P_c <= (c + sqrt(c^2-4K))/2 * q
    there.  For monostable kinds any c below 2*sqrt(f'(0)) makes the origin
    a focus, which forces a positive crossing, so those evaluations are
    short-circuited (this also sidesteps the exponentially small crossing
    values near the linearized-speed limit).
    """
    if nl.kind is Kind.CUSTOM:
        raise KindError("c0 is defined for the named kinds")
    hi = 2.0 * math.sqrt(nl.sup_slope)
    lo = 0.0
    spiral = 2.0 * math.sqrt(nl.fp0) if nl.kind is Kind.MONOSTABLE else -1.0

    def positive_crossing(c):
        if c < spiral * (1.0 - 1e-12):
            return True
        return _p_at_zero(nl, c, eps_start) > P_ZERO_TOL

    while hi - lo > _BISECT_WIDTH:
        mid = 0.5 * (lo + hi)
        if positive_crossing(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def c_star(nl: Nonlinearity, mu: float, eps_start: float = 1e-4,
           profile_tail_tol: float = 1e-6, n_profile: int = 1201,
           c0_value: float | None = None) -> SemiWaveResult:
    """Semi-wave speed and profile for Stefan coefficient mu.

    Bisects the strictly decreasing defect xi(c) = P_c(0) - c/mu on
    [0, c0] and reconstructs the profile q*(z) from the saddle trajectory
    at the root, truncated where q* passes 1 - profile_tail_tol.
    """
    if mu <= 0.0:
        raise DomainError(f"mu must be positive, got {mu}")
    c0_val = c0(nl, eps_start) if c0_value is None else c0_value
    trace: list[tuple[float, float]] = []

    def xi(c):
        val = _p_at_zero(nl, c, eps_start) - c / mu
        trace.append((c, val))
        return val

    lo, hi = 0.0, c0_val
    xi_lo, xi_hi = xi(lo), xi(hi)
    if xi_lo <= 0.0 or xi_hi >= 0.0:
        raise DomainError(
            f"defect not bracketed: xi(0)={xi_lo:.3g}, xi(c0)={xi_hi:.3g}")
    while hi - lo > _BISECT_WIDTH:
        mid = 0.5 * (lo + hi)
        if xi(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    cs = 0.5 * (lo + hi)

    # profile: re-run the saddle trajectory starting inside the tail band,
    # then evaluate the dense solution on a uniform z grid (z = z_span - tau)
    run = _integrate_saddle(nl, cs, min(eps_start, profile_tail_tol))
    z = np.linspace(0.0, run.z_span, n_profile)
    prof_q = run.profile(z)
    prof_q[0] = 0.0
    return SemiWaveResult(c0=c0_val, c_star=cs, mu=mu, omega_star=cs / mu,
                          z=z, q=prof_q, xi_trace=trace)


def perturbed_finite_wave(nl: Nonlinearity, mu: float, c: float,
                          semiwave: SemiWaveResult | None = None) -> FiniteWave:
    """Finite wave launched from the semi-wave slope: P(0) = omega*, speed c < c*.

    Forward shooting from (0, omega*) stays below the semi-wave curve and
    hits p = 0 at some Q^c < 1; the resulting q^c(z) is the sub-solution
    block used ahead of a spreading front.
    """
    sw = semiwave if semiwave is not None else c_star(nl, mu)
    if not 0.0 < c < sw.c_star:
        raise DomainError(f"need 0 < c < c* = {sw.c_star:.8g}, got {c}")
    omega = sw.omega_star

    def rhs(z, y):
        return [y[1], c * y[1] - float(nl.f(y[0]))]

    hit_p0 = lambda z, y: y[1]
    hit_p0.terminal = True
    hit_p0.direction = -1
    hit_q1 = lambda z, y: y[0] - (1.0 - 1e-9)
    hit_q1.terminal = True
    hit_q1.direction = 1
    sol = solve_ivp(rhs, (0.0, 1e4), [0.0, omega], events=(hit_p0, hit_q1),
                    dense_output=True, rtol=1e-10, atol=1e-14)
    if not sol.t_events[0].size:
        raise NoTermination(
            f"perturbed wave at c={c} failed to close before q = 1")
    z_end = float(sol.t_events[0][0])
    z = np.linspace(0.0, z_end, 1201)
    y = sol.sol(z)
    traj = PhaseTrajectory(c=c, q=y[0], p=np.maximum(y[1], 0.0),
                           terminated_by=Termination.P_HIT_ZERO)
    traj.z = z
    return FiniteWave(c=c, omega=omega, q_end=float(y[0][-1]), z_end=z_end,
                      z=z, q=y[0], trajectory=traj)


def ground_state(nl: Nonlinearity, tail_tol: float = 1e-6,
                 n: int = 1201) -> GroundState:
    """The evenly decreasing positive stationary solution with peak theta_bar.

    Built from the first integral v'^2 = -2*int_0^v f, descending from the
    peak; the exponential tails are truncated where v < tail_tol.
    """
    if nl.kind is not Kind.BISTABLE:
        raise KindError(f"ground state requires a bistable term, got {nl.kind.value}")
    peak = nl.theta_bar
    f_pk = float(nl.f(peak))
    dfpk = float(nl.df(peak))
    F = nl.integral_from_zero
    x0 = 1e-2
    v0 = peak - 0.5 * f_pk * x0 ** 2 + dfpk * f_pk * x0 ** 4 / 24.0

    def rhs(x, v):
        vv = min(max(v[0], 0.0), peak)
        rad = -2.0 * F(vv)
        return [-math.sqrt(max(rad, 0.0))]

    hit = lambda x, v: v[0] - tail_tol
    hit.terminal = True
    hit.direction = -1
    sol = solve_ivp(rhs, (x0, 1e4), [v0], events=hit, dense_output=True,
                    rtol=1e-11, atol=1e-13, max_step=1.0)
    if not sol.t_events[0].size:
        raise NoTermination("ground state tail never reached the cutoff")
    x_end = float(sol.t_events[0][0])
    x_half = np.linspace(0.0, x_end, n)
    v_half = np.empty_like(x_half)
    series = x_half <= x0
    xs = x_half[series]
    v_half[series] = peak - 0.5 * f_pk * xs ** 2 + dfpk * f_pk * xs ** 4 / 24.0
    v_half[~series] = sol.sol(x_half[~series])[0]
    x = np.concatenate([-x_half[:0:-1], x_half])
    v = np.concatenate([v_half[:0:-1], v_half])
    return GroundState(x=x, v=np.clip(v, 0.0, peak), peak=peak,
                       tail_tol=tail_tol)
