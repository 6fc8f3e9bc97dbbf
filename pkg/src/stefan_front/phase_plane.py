"""Phase-plane machinery for q'' - c q' + f(q) = 0.

In the (q, p) plane with p = q', the equation becomes q' = p,
p' = c p - f(q), or dp/dq = c - f(q)/p while p > 0.  This module
computes the zero-speed first integral p0, the peak map q_top, the
time map Z(q) (half-length of the symmetric stationary profile with
peak q), critical lengths, stationary profiles, and waves of finite
length obtained by shooting from (0, omega).
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, solve_ivp

from .errors import DomainError, KindError, NoSolution, NoTermination, QuadError
from .nonlinearity import Kind, Nonlinearity

__all__ = [
    "PhaseTrajectory",
    "FiniteWave",
    "StationaryProfile",
    "p0",
    "q_top",
    "time_map",
    "critical_length",
    "stationary_profile",
    "phase_trajectory",
    "finite_wave",
]

_RTOL = 1e-9
_ATOL = 1e-12


class Termination(enum.Enum):
    P_HIT_ZERO = "PHitZero"
    Q_REACHED_TARGET = "QReachedTarget"
    STEP_LIMIT = "StepLimit"


@dataclass
class PhaseTrajectory:
    """A sampled solution curve p = P(q) of dp/dq = c - f(q)/p."""

    c: float
    q: np.ndarray
    p: np.ndarray
    terminated_by: Termination

    @property
    def start(self):
        return float(self.q[0]), float(self.p[0])

    @property
    def end(self):
        return float(self.q[-1]), float(self.p[-1])

    def ode_residual(self, nl: Nonlinearity) -> float:
        """Worst midpoint residual |dp/dq - (c - f/p)| over consecutive samples.

        dp/dq is singular where p vanishes, so pairs with midpoint p below
        a tenth of the trajectory maximum are excluded.
        """
        qm = 0.5 * (self.q[:-1] + self.q[1:])
        pm = 0.5 * (self.p[:-1] + self.p[1:])
        keep = pm > max(0.1 * float(self.p.max()), 1e-8)
        slope = np.diff(self.p)[keep] / np.diff(self.q)[keep]
        rhs = self.c - np.asarray(nl.f(qm[keep])) / pm[keep]
        return float(np.max(np.abs(slope - rhs))) if keep.any() else 0.0


@dataclass
class FiniteWave:
    """A wave of finite length: q(0) = 0, q'(z_end) = 0, increasing on [0, z_end]."""

    c: float
    omega: float
    q_end: float
    z_end: float
    z: np.ndarray
    q: np.ndarray
    trajectory: PhaseTrajectory


@dataclass
class StationaryProfile:
    """Symmetric solution of v'' + f(v) = 0 on [-Z, Z] with v(+-Z) = 0."""

    Z: float
    q_top: float
    x: np.ndarray
    v: np.ndarray
    boundary_slope: float

    def interp(self, xq):
        return np.interp(xq, self.x, self.v, left=0.0, right=0.0)


# ----------------------------------------------------------------------
# zero-speed first integral

def _lower_peak(nl: Nonlinearity) -> float:
    if nl.kind is Kind.MONOSTABLE:
        return 0.0
    if nl.kind is Kind.BISTABLE:
        return nl.theta_bar
    if nl.kind is Kind.COMBUSTION:
        return nl.theta
    raise KindError("phase-plane ranges are defined for the named kinds only")


def p0(nl: Nonlinearity, omega: float, q, tol: float = 1e-9):
    """Zero-speed momentum sqrt(omega^2 - 2*int_0^q f); zero at q = q_top(omega)."""
    rad = omega * omega - 2.0 * nl.integral_from_zero(q)
    rad = np.asarray(rad, dtype=float)
    if np.any(rad < -tol * (1.0 + omega * omega)):
        raise DomainError("p0 radicand negative: q exceeds the wave peak")
    out = np.sqrt(np.maximum(rad, 0.0))
    return out if out.ndim else float(out)


def q_top(nl: Nonlinearity, omega: float, tol: float = 1e-10) -> float:
    """Peak value of the zero-speed wave with initial slope omega.

    The unique root of omega^2 = 2*int_0^q f above the kind-dependent
    lower limit (0, theta_bar, or theta).  Strictly increasing in omega.
    """
    if not 0.0 < omega < nl.omega0:
        raise DomainError(f"need 0 < omega < omega0={nl.omega0:.6g}, got {omega}")
    lo, hi = _lower_peak(nl), 1.0
    target = 0.5 * omega * omega
    F = nl.integral_from_zero
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if F(mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ----------------------------------------------------------------------
# time map

def _timemap_integrand(nl: Nonlinearity, qv: float):
    Fq = float(nl.integral_from_zero(qv))
    fq = float(nl.f(qv))

    def integrand(s):
        d = Fq - float(nl.integral_from_zero(qv - s * s))
        if d <= 0.0:  # rounding at the s -> 0 endpoint; exact limit
            return math.sqrt(2.0 / fq)
        return 2.0 * s / math.sqrt(2.0 * d)

    return integrand


def time_map(nl: Nonlinearity, qv: float, tol: float = 1e-10) -> float:
    """Half-length Z(q) = int_0^q dr / sqrt(2*int_r^q f) of the peak-q profile.

    The inverse square-root endpoint at r = q is removed by the
    substitution r = q - s^2, leaving a bounded integrand.
    """
    lower = _lower_peak(nl)
    if not lower < qv < 1.0:
        raise DomainError(
            f"time map admits q in ({lower:.6g}, 1) for {nl.kind.value}, got {qv}")
    s_max = math.sqrt(qv)
    pts = []
    if nl.theta is not None and 0.0 < qv - nl.theta:
        pts.append(math.sqrt(qv - nl.theta))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # the explicit error check below governs
        val, err = quad(_timemap_integrand(nl, qv), 0.0, s_max,
                        epsabs=tol, epsrel=1e-9, limit=500,
                        points=pts or None)
    if err > 1e-7 * (1.0 + abs(val)):
        raise QuadError(f"time map quadrature error {err:.3g} at q={qv}")
    return float(val)


def _golden_min(fun, lo, hi, xtol=1e-7):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while b - a > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    x = 0.5 * (a + b)
    return x, fun(x)


def _scan_grid(nl: Nonlinearity, n: int = 33):
    lower = _lower_peak(nl)
    pad = 1e-4 * (1.0 - lower)
    return np.linspace(lower + pad, 1.0 - pad, n)


def critical_length(nl: Nonlinearity) -> tuple[float, float | None]:
    """Infimum of the time map over the admissible peak range.

    Coarse 33-point scan followed by golden-section refinement around the
    best point.  For monostable kinds also returns the linearized length
    Z_M = pi / (2*sqrt(f'(0))) and checks the returned infimum does not
    exceed it beyond tolerance; otherwise the second element is None.
    """
    qs = _scan_grid(nl)
    zs = np.array([time_map(nl, q) for q in qs])
    i = int(np.argmin(zs))
    descents = np.sum(np.diff(np.sign(np.diff(zs))) != 0)
    if descents > 1:
        warnings.warn("time map scan shows multiple local minima; "
                      "reporting the global minimum over scan + refinement")
    lo = qs[max(i - 1, 0)]
    hi = qs[min(i + 1, len(qs) - 1)]
    _, zmin = _golden_min(lambda q: time_map(nl, q), lo, hi)
    zinf = min(float(zs[i]), float(zmin))
    if nl.kind is Kind.MONOSTABLE:
        # the infimum may live at q -> 0 where it equals Z_M; the scan sees
        # Z_M + O(pad), so the check carries a matching slack
        z_m = math.pi / (2.0 * math.sqrt(nl.fp0))
        if zinf > z_m + 1e-3:
            raise QuadError(
                f"monostable critical length {zinf:.8g} exceeds Z_M={z_m:.8g}")
        return min(zinf, z_m), z_m
    return zinf, None


# ----------------------------------------------------------------------
# stationary profiles

def _half_profile(nl: Nonlinearity, peak: float, n: int):
    """Descend v'' = -f(v) from a peak using the first integral.

    Returns (x, v) on the right half, v decreasing from ``peak`` to 0,
    built from dv/dx = -sqrt(2*(F(peak) - F(v))) with a series start.
    The samples satisfy the second-order equation to integrator accuracy.
    """
    f_pk = float(nl.f(peak))
    dfpk = float(nl.df(peak))
    F = nl.integral_from_zero
    Fpk = float(F(peak))
    x0 = 1e-2 / math.sqrt(max(f_pk / max(peak, 1e-3), 1.0))
    v0 = peak - 0.5 * f_pk * x0 ** 2 + dfpk * f_pk * x0 ** 4 / 24.0

    def rhs(x, v):
        vv = min(max(v[0], 0.0), peak)  # RK trial stages may overshoot
        rad = 2.0 * (Fpk - F(vv))
        return [-math.sqrt(max(rad, 0.0))]

    hit = lambda x, v: v[0]
    hit.terminal = True
    hit.direction = -1
    sol = solve_ivp(rhs, (x0, x0 + 1e4), [v0], events=hit, dense_output=True,
                    rtol=1e-11, atol=1e-13, max_step=1.0)
    if not sol.t_events[0].size:
        raise NoSolution(f"profile from peak {peak} never reached zero")
    x_land = float(sol.t_events[0][0])
    x = np.linspace(0.0, x_land, n)
    v = np.empty_like(x)
    series = x <= x0
    xs = x[series]
    v[series] = peak - 0.5 * f_pk * xs ** 2 + dfpk * f_pk * xs ** 4 / 24.0
    v[~series] = sol.sol(x[~series])[0]
    v[-1] = 0.0
    return x, np.clip(v, 0.0, peak)


def stationary_profile(nl: Nonlinearity, Z: float, n: int = 801) -> StationaryProfile:
    """Symmetric stationary profile on [-Z, Z] with zero boundary values.

    Solves Z(q_top) = Z for the peak and reconstructs v by integrating the
    first integral down from the peak.  When two peaks solve the equation
    the larger one (the maximal profile) is returned.
    """
    crit, _ = critical_length(nl)
    strict = nl.kind is Kind.MONOSTABLE
    if Z < crit - 1e-9 or (strict and Z <= crit):
        raise NoSolution(
            f"half-length {Z} is below the critical length {crit:.8g}")

    qs = _scan_grid(nl)
    zs = np.array([time_map(nl, q) for q in qs]) - Z
    roots = []
    for k in range(len(qs) - 1):
        if zs[k] == 0.0:
            roots.append(qs[k])
        elif zs[k] * zs[k + 1] < 0.0:
            lo, hi = qs[k], qs[k + 1]
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if (time_map(nl, mid) - Z) * zs[k] > 0.0:
                    lo = mid
                else:
                    hi = mid
            roots.append(0.5 * (lo + hi))
    if not roots:
        # near-critical: the target sits in the flat bottom of the scan
        q_star, z_star = _golden_min(lambda q: time_map(nl, q),
                                     qs[max(np.argmin(zs) - 1, 0)],
                                     qs[min(np.argmin(zs) + 1, len(qs) - 1)])
        if z_star > Z + 1e-9:
            raise NoSolution(
                f"half-length {Z} is below the critical length {z_star:.8g}")
        roots.append(q_star)
    peak = max(roots)

    x_half, v_half = _half_profile(nl, peak, (n + 1) // 2)
    scale = Z / x_half[-1]  # land exactly on +-Z (relative tweak ~1e-9)
    x_half = x_half * scale
    x = np.concatenate([-x_half[:0:-1], x_half])
    v = np.concatenate([v_half[:0:-1], v_half])
    slope = math.sqrt(max(2.0 * float(nl.integral_from_zero(peak)), 0.0))
    return StationaryProfile(Z=Z, q_top=peak, x=x, v=v, boundary_slope=slope)


# ----------------------------------------------------------------------
# finite waves by shooting

def phase_trajectory(nl: Nonlinearity, c: float, omega: float,
                     q_stop: float = 1.0 - 1e-9, z_cap: float = 1e4,
                     n: int = 2001) -> PhaseTrajectory:
    """Shoot q' = p, p' = c p - f(q) from (0, omega) until p = 0 or q = q_stop."""
    if c < 0.0:
        raise DomainError(f"wave speed must be nonnegative, got {c}")
    if omega <= 0.0:
        raise DomainError(f"initial slope must be positive, got {omega}")

    def rhs(z, y):
        return [y[1], c * y[1] - float(nl.f(y[0]))]

    p_zero = lambda z, y: y[1]
    p_zero.terminal = True
    p_zero.direction = -1
    q_hit = lambda z, y: y[0] - q_stop
    q_hit.terminal = True
    q_hit.direction = 1
    sol = solve_ivp(rhs, (0.0, z_cap), [0.0, omega], events=(p_zero, q_hit),
                    dense_output=True, rtol=_RTOL, atol=_ATOL)
    if sol.t_events[0].size:
        z_end, status = float(sol.t_events[0][0]), Termination.P_HIT_ZERO
    elif sol.t_events[1].size:
        z_end, status = float(sol.t_events[1][0]), Termination.Q_REACHED_TARGET
    else:
        z_end, status = float(sol.t[-1]), Termination.STEP_LIMIT
    z = np.linspace(0.0, z_end, n)
    y = sol.sol(z)
    traj = PhaseTrajectory(c=c, q=y[0], p=np.maximum(y[1], 0.0),
                           terminated_by=status)
    traj.z = z
    if status is Termination.P_HIT_ZERO:
        traj.p[-1] = 0.0
    return traj


def finite_wave(nl: Nonlinearity, c: float, omega: float) -> FiniteWave:
    """Wave of finite length: integrate from (0, omega) until the slope vanishes.

    Raises NoTermination when q reaches 1 with p bounded away from zero
    (the speed c is too large for a finite wave at this omega).
    """
    if not 0.0 < omega < nl.omega0:
        raise DomainError(f"need 0 < omega < omega0={nl.omega0:.6g}, got {omega}")
    traj = phase_trajectory(nl, c, omega)
    if traj.terminated_by is not Termination.P_HIT_ZERO:
        raise NoTermination(
            f"no finite wave: trajectory ended by {traj.terminated_by.value} "
            f"at (q={traj.q[-1]:.6g}, p={traj.p[-1]:.6g})")
    return FiniteWave(c=c, omega=omega, q_end=float(traj.q[-1]),
                      z_end=float(traj.z[-1]), z=traj.z, q=traj.q,
                      trajectory=traj)
