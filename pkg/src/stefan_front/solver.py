"""Free-boundary solver: u_t = u_xx + f(u) with Stefan front conditions.

The moving interval [g(t), h(t)] is mapped to the fixed reference
interval [-1, 1] by y = (2x - (g+h))/(h - g), turning front motion into
an advection term.  Each step advances the fronts explicitly (forward
Euler on the Stefan fluxes), then the interior implicitly in diffusion
(tridiagonal solve) with advection and reaction explicit.  The time step
obeys dt = dt_safety * min(dx^2, dx / max(|g'|, |h'|)) with dx the
physical node spacing, so the explicit pieces stay inside both the
diffusive margin and the front CFL limit as the domain grows.

One run is strictly sequential and deterministic; distinct runs share
only the immutable reaction term and may execute concurrently.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit
from scipy.integrate import solve_ivp

from .errors import BlowupError, DomainError, SignError, ValidationError
from .nonlinearity import Kind, Nonlinearity

__all__ = [
    "InitialData",
    "SolverTolerances",
    "SolverConfig",
    "State",
    "Snapshot",
    "Run",
    "Termination",
    "front_fix",
    "boundary_flux",
    "step",
    "run",
    "mass",
]


class Termination(enum.Enum):
    TMAX = "TMax"
    VANISH_TOL = "VanishTol"
    SPREAD_CERTIFIED = "SpreadCertified"
    VANISH_CERTIFIED = "VanishCertified"
    BLOWUP = "Blowup"


# ----------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class InitialData:
    """Initial condition u0 = sigma * phi on [-h0, h0].

    Families: "cosine" phi = cos(pi x / (2 h0)); "quad" phi = 1 - (x/h0)^2;
    "samples" takes phi values on the uniform node grid directly.  The data
    must vanish at the ends, be positive inside, and have nonzero one-sided
    slopes at the ends; sample data violating this is rejected, not fixed.
    """

    family: str = "cosine"
    sigma: float = 1.0
    values: tuple[float, ...] | None = None

    def build(self, h0: float, N: int) -> np.ndarray:
        y = np.linspace(-1.0, 1.0, N)
        if self.family == "cosine":
            u = self.sigma * np.cos(0.5 * math.pi * y)
        elif self.family == "quad":
            u = self.sigma * (1.0 - y * y)
        elif self.family == "samples":
            if self.values is None or len(self.values) != N:
                raise ValidationError(
                    f"samples family needs exactly N={N} values")
            u = self.sigma * np.asarray(self.values, dtype=float)
        else:
            raise ValidationError(f"unknown initial family {self.family!r}")
        if self.family == "samples":
            if abs(u[0]) > 1e-12 or abs(u[-1]) > 1e-12:
                raise ValidationError(
                    "sample data must vanish at the interval ends")
        u[0] = 0.0
        u[-1] = 0.0
        dy = y[1] - y[0]
        left = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dy)
        right = (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * dy)
        if np.any(u[1:-1] <= 0.0):
            j = int(np.argmin(u[1:-1])) + 1
            raise ValidationError(
                f"initial data not positive inside: u={u[j]:.3g} at node {j}")
        if left <= 0.0 or right >= 0.0:
            raise ValidationError(
                f"initial data needs nonzero edge slopes, got {left:.3g}, {right:.3g}")
        return u

    def descriptor(self) -> dict:
        d = {"family": self.family, "sigma": self.sigma}
        if self.values is not None:
            d["values_sha"] = hashlib.sha256(
                np.asarray(self.values).tobytes()).hexdigest()[:16]
        return d


@dataclass(frozen=True)
class SolverTolerances:
    blowup_factor: float = 10.0   # cap = factor * max(||u0||, 1)
    vanish_stop: float = 1e-10    # stop stepping once max u falls below
    sign_tol: float = 1e-9        # inward front motion beyond this aborts
    check_tol: float = 1e-6       # slack for the runtime bound checks
    overshoot_tol: float = 1e-8


@dataclass(frozen=True)
class SolverConfig:
    nl: Nonlinearity
    mu: float
    h0: float
    u0: InitialData
    t_max: float
    N: int = 401
    dt_safety: float = 0.4
    snapshot_every: float = 0.25
    tolerances: SolverTolerances = field(default_factory=SolverTolerances)
    certify: bool = True

    def __post_init__(self):
        if self.N % 2 == 0:
            raise DomainError(f"N must be odd (center node), got {self.N}")
        if self.N < 5:
            raise DomainError(f"N must be at least 5, got {self.N}")
        if not 0.0 < self.dt_safety <= 1.0:
            raise DomainError(f"dt_safety must lie in (0, 1], got {self.dt_safety}")
        if self.t_max <= 0.0 or self.h0 <= 0.0 or self.mu <= 0.0:
            raise DomainError("t_max, h0 and mu must all be positive")

    def descriptor(self) -> dict:
        return {
            "nl": self.nl.descriptor(),
            "mu": self.mu,
            "h0": self.h0,
            "u0": self.u0.descriptor(),
            "t_max": self.t_max,
            "N": self.N,
            "dt_safety": self.dt_safety,
            "snapshot_every": self.snapshot_every,
            "tolerances": vars(self.tolerances).copy(),
        }

    def digest(self) -> str:
        blob = json.dumps(self.descriptor(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


# ----------------------------------------------------------------------
# state containers

@dataclass
class State:
    t: float
    g: float
    h: float
    U: np.ndarray
    config: SolverConfig

    @property
    def y(self) -> np.ndarray:
        return np.linspace(-1.0, 1.0, self.config.N)

    @property
    def x(self) -> np.ndarray:
        return 0.5 * (self.g + self.h) + 0.5 * (self.h - self.g) * self.y


@dataclass
class Snapshot:
    t: float
    g: float
    h: float
    U: np.ndarray
    y: np.ndarray

    @property
    def x(self) -> np.ndarray:
        return 0.5 * (self.g + self.h) + 0.5 * (self.h - self.g) * self.y

    @property
    def span(self) -> float:
        return self.h - self.g

    def max_u(self) -> float:
        return float(self.U.max())

    def integral_u(self) -> float:
        # composite Simpson; N is odd so the node count fits exactly
        dy = self.y[1] - self.y[0]
        w = np.ones_like(self.U)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        return float((self.h - self.g) / 2.0 * dy / 3.0 * (w * self.U).sum())


@dataclass
class Run:
    config: SolverConfig
    config_hash: str
    snapshots: list[Snapshot]
    fronts: np.ndarray            # rows (t, g, h, g', h'), possibly strided
    termination: Termination
    warnings: list[str]
    checks: dict
    certificate: object | None = None   # classify.Verdict when one fired

    @property
    def t_final(self) -> float:
        return float(self.fronts[-1, 0]) if len(self.fronts) else 0.0

    @property
    def final(self) -> Snapshot:
        return self.snapshots[-1]


def mass(snap: Snapshot, mu: float) -> float:
    """The conserved combination int u dx + (h - g)/mu (exact when f = 0)."""
    return snap.integral_u() + (snap.h - snap.g) / mu


# ----------------------------------------------------------------------
# spatial operators (reference implementations; the kernel inlines these)

def boundary_flux(state: State) -> tuple[float, float]:
    """Front speeds (g', h') from the one-sided second-order flux stencils."""
    U, N = state.U, state.config.N
    if N < 5:
        raise DomainError("boundary flux needs N >= 5")
    dy = 2.0 / (N - 1)
    inv_span = 2.0 / (state.h - state.g)
    ux_h = (3.0 * U[-1] - 4.0 * U[-2] + U[-3]) / (2.0 * dy) * inv_span
    ux_g = (-3.0 * U[0] + 4.0 * U[1] - U[2]) / (2.0 * dy) * inv_span
    mu = state.config.mu
    return -mu * ux_g, -mu * ux_h


def front_fix(state: State) -> tuple[float, np.ndarray]:
    """Transformed coefficients on the reference interval.

    Returns the diffusion coefficient 4/(h-g)^2 and the advection
    coefficient a(y) = [g'(1-y) + h'(1+y)]/(h-g) multiplying U_y in
    U_t = diff * U_yy + a(y) U_y + f(U).
    """
    gp, hp = boundary_flux(state)
    span = state.h - state.g
    y = state.y
    a = (gp * (1.0 - y) + hp * (1.0 + y)) / span
    return 4.0 / span ** 2, a


# ----------------------------------------------------------------------
# the stepping kernel

_TSTOP, _NMAX, _HISTFULL, _BLOWUP, _VANISH, _SIGN = 0, 1, 2, 3, 4, 5


@njit(cache=True, fastmath=True)
def _advance(U, scal, y, dy, mu, safety, h0, t_stop, max_steps, dt_force,
             theta_cut, f0, inv0, f1, inv1, u_hi,
             blow_cap, vanish_stop, sign_tol, total_steps,
             hist, cc, mv, dL, dR, rhs):
    g = scal[0]
    h = scal[1]
    t = scal[2]
    viol_center = scal[3]
    N = U.shape[0]
    has_f = False
    for idx in range(f1.shape[0]):
        if f1[idx] != 0.0:
            has_f = True
            break
    if not has_f:
        for idx in range(f0.shape[0]):
            if f0[idx] != 0.0:
                has_f = True
                break
    nh = 0
    steps = 0
    gp = 0.0
    hp = 0.0
    status = _TSTOP
    while True:
        if t >= t_stop - 1e-13 * (1.0 + abs(t_stop)):
            status = _TSTOP
            break
        if steps >= max_steps:
            status = _NMAX
            break
        if nh >= hist.shape[0]:
            status = _HISTFULL
            break

        span = h - g
        inv_span = 2.0 / span
        hp = -mu * (3.0 * U[N - 1] - 4.0 * U[N - 2] + U[N - 3]) / (2.0 * dy) * inv_span
        gp = -mu * (-3.0 * U[0] + 4.0 * U[1] - U[2]) / (2.0 * dy) * inv_span
        if total_steps + steps > 0 and (hp < -sign_tol or gp > sign_tol):
            status = _SIGN
            break

        vmax = abs(gp)
        if abs(hp) > vmax:
            vmax = abs(hp)
        dx = 0.5 * dy * span
        dt = safety * dx * dx
        if vmax > 0.0 and safety * dx / vmax < dt:
            dt = safety * dx / vmax
        if dt_force > 0.0:
            dt = dt_force
        if t + dt > t_stop:
            dt = t_stop - t

        g1 = g + dt * gp
        h1 = h + dt * hp
        span1 = h1 - g1
        inv_span1 = 1.0 / span1
        lam = dt * 4.0 * inv_span1 * inv_span1 / (dy * dy)
        a0 = (gp + hp) * inv_span1
        a1 = (hp - gp) * inv_span1
        inv_2dy = 0.5 / dy

        if has_f:
            for j in range(1, N - 1):
                adv = (a0 + a1 * y[j]) * (U[j + 1] - U[j - 1]) * inv_2dy
                uu = U[j]
                if uu < 0.0:
                    uu = 0.0
                elif uu > u_hi:
                    uu = u_hi
                if uu < theta_cut:
                    xx = uu * inv0
                    i0 = int(xx)
                    if i0 > f0.shape[0] - 2:
                        i0 = f0.shape[0] - 2
                    w = xx - i0
                    fv = f0[i0] * (1.0 - w) + f0[i0 + 1] * w
                else:
                    xx = (uu - theta_cut) * inv1
                    i0 = int(xx)
                    if i0 > f1.shape[0] - 2:
                        i0 = f1.shape[0] - 2
                    w = xx - i0
                    fv = f1[i0] * (1.0 - w) + f1[i0 + 1] * w
                rhs[j] = U[j] + dt * (adv + fv)
        else:
            for j in range(1, N - 1):
                adv = (a0 + a1 * y[j]) * (U[j + 1] - U[j - 1]) * inv_2dy
                rhs[j] = U[j] + dt * adv

        # Twisted Thomas solve for the constant-coefficient system
        # (1+2*lam) u_j - lam (u_{j-1} + u_{j+1}) = rhs_j: eliminate from
        # both ends toward the middle so the two recurrence chains pipeline
        # independently.  Coefficients depend only on the distance from a
        # boundary and converge geometrically, so divisions stop after ~30
        # terms (lam is O(dt_safety) by the step-size rule).
        b = 1.0 + 2.0 * lam
        mid = (N - 1) // 2
        cc[1] = -lam / b
        mv[1] = 1.0 / b
        K = mid
        for k in range(2, mid + 1):
            m = b + lam * cc[k - 1]
            mv[k] = 1.0 / m
            cc[k] = -lam * mv[k]
            if abs(cc[k] - cc[k - 1]) <= 1e-16 * abs(cc[k]):
                K = k
                break
        for k in range(K + 1, mid + 1):
            cc[k] = cc[K]
            mv[k] = mv[K]

        dL[1] = rhs[1] * mv[1]
        dR[N - 2] = rhs[N - 2] * mv[1]
        for k in range(2, mid + 1):
            dL[k] = (rhs[k] + lam * dL[k - 1]) * mv[k]
            i = N - 1 - k
            if i > mid:
                dR[i] = (rhs[i] + lam * dR[i + 1]) * mv[k]
        ccl = cc[mid]
        ccr = cc[mid - 1] if mid >= 2 else cc[1]
        den = 1.0 - ccl * ccr
        um = (dL[mid] - ccl * dR[mid + 1]) / den
        up = dR[mid + 1] - ccr * um
        U[mid] = um
        U[mid + 1] = up
        umax = um if um > up else up
        for k in range(1, mid):
            j = mid - k
            uj = dL[j] - cc[j] * U[j + 1]
            U[j] = uj
            if uj > umax:
                umax = uj
            i = mid + 1 + k
            if i <= N - 2:
                ui = dR[i] - cc[N - 1 - i] * U[i - 1]
                U[i] = ui
                if ui > umax:
                    umax = ui
        U[0] = 0.0
        U[N - 1] = 0.0

        g = g1
        h = h1
        t = t + dt
        steps += 1
        dev = abs(g + h) - 2.0 * h0
        if dev > viol_center:
            viol_center = dev

        hist[nh, 0] = t
        hist[nh, 1] = g
        hist[nh, 2] = h
        hist[nh, 3] = gp
        hist[nh, 4] = hp
        nh += 1

        if umax > blow_cap:
            status = _BLOWUP
            break
        if umax < vanish_stop:
            status = _VANISH
            break

    scal[0] = g
    scal[1] = h
    scal[2] = t
    scal[3] = viol_center
    return status, steps, nh, gp, hp


def _reaction_table(nl: Nonlinearity, u_hi: float, n: int = 8192):
    """Piecewise-linear lookup of f with the ignition level as an exact node."""
    theta_cut = nl.theta if (nl.kind is Kind.COMBUSTION and nl.theta) else 0.0
    if theta_cut > 0.0:
        u0 = np.linspace(0.0, theta_cut, n // 4 + 1)
        f0 = np.asarray(nl.f(u0), dtype=float)
        inv0 = (len(u0) - 1) / theta_cut
    else:
        f0 = np.zeros(2)
        inv0 = 1.0
    u1 = np.linspace(theta_cut, u_hi, n + 1)
    f1 = np.asarray(nl.f(u1), dtype=float)
    inv1 = (len(u1) - 1) / (u_hi - theta_cut)
    return theta_cut, f0, inv0, f1, inv1


# ----------------------------------------------------------------------
# public stepping API

def _make_buffers(N: int, hist_rows: int):
    return (np.empty((hist_rows, 5)), np.empty(N), np.empty(N), np.empty(N),
            np.empty(N), np.empty(N))


def step(state: State, dt: float) -> State:
    """One IMEX step with a caller-chosen dt (must respect the diffusive cap)."""
    cfg = state.config
    N = cfg.N
    dy = 2.0 / (N - 1)
    dx = 0.5 * dy * (state.h - state.g)
    if dt <= 0.0:
        raise DomainError(f"dt must be positive, got {dt}")
    if dt > cfg.dt_safety * dx * dx * (1.0 + 1e-12):
        raise DomainError(
            f"dt={dt:.3g} exceeds the diffusive cap {cfg.dt_safety * dx * dx:.3g}")
    u_hi = max(cfg.nl.u_cap, 1.05 * float(state.U.max()), 1.5)
    table = _reaction_table(cfg.nl, u_hi)
    hist, cc, mv, dL, dR, rhs = _make_buffers(N, 4)
    scal = np.array([state.g, state.h, state.t, 0.0])
    U = state.U.copy()
    tol = cfg.tolerances
    # standalone steps have no run-level initial data to anchor the cap to
    blow_cap = tol.blowup_factor * max(cfg.nl.u_cap, 1.0)
    status, *_ = _advance(U, scal, state.y, dy, cfg.mu, cfg.dt_safety, cfg.h0,
                          state.t + 2.0 * dt, 1, dt, *table, u_hi,
                          blow_cap, 0.0, tol.sign_tol, 1, hist, cc, mv, dL,
                          dR, rhs)
    if status == _BLOWUP:
        raise BlowupError(f"solution exceeded the cap {blow_cap:.3g}")
    if status == _SIGN:
        raise SignError("front moved inward beyond tolerance")
    return State(t=float(scal[2]), g=float(scal[0]), h=float(scal[1]),
                 U=U, config=cfg)


def _heat_bound(K: float, t: float, mass0: float) -> float:
    if t <= 0.0:
        return math.inf
    return math.exp(K * t) / (2.0 * math.sqrt(math.pi * t)) * mass0


def run(config: SolverConfig, certifier=None) -> Run:
    """Integrate to t_max or early termination, with certified runtime checks.

    Snapshots are taken every ``snapshot_every`` time units (plus t = 0);
    at each one the certificate hook may fire and stop the run, and the
    bound checks (center bound, reaction-ODE dominance, heat kernel bound)
    are evaluated, recording violations beyond check_tol as warnings.
    """
    cfg = config
    nl = cfg.nl
    N = cfg.N
    tol = cfg.tolerances
    y = np.linspace(-1.0, 1.0, N)
    dy = y[1] - y[0]
    U = cfg.u0.build(cfg.h0, N)
    u0_max = float(U.max())
    u0_mass = float(np.trapezoid(U, dx=dy) * cfg.h0)  # dx = h0 * dy at t = 0
    blow_cap = tol.blowup_factor * max(u0_max, 1.0)
    u_hi = max(nl.u_cap, 1.05 * blow_cap)
    table = _reaction_table(nl, u_hi)

    if certifier is None and cfg.certify:
        from .classify import Certifier
        certifier = Certifier(nl, cfg.mu)

    # reaction-ODE dominance: u <= zeta(t), zeta' = f(zeta), zeta(0) = max u0
    zeta = solve_ivp(lambda t, v: [float(nl.f(min(v[0], u_hi)))],
                     (0.0, cfg.t_max), [u0_max], dense_output=True,
                     rtol=1e-9, atol=1e-12)

    hist_rows = 1 << 16
    hist, cc, mv, dL, dR, rhs_buf = _make_buffers(N, hist_rows)
    scal = np.array([-cfg.h0, cfg.h0, 0.0, -math.inf])
    chunks: list[np.ndarray] = []
    total_rows = 0
    total_steps = 0
    warnings_log: list[str] = []
    checks = {"center_bound_excess": -math.inf, "zeta_excess": -math.inf,
              "heat_excess": -math.inf}
    snapshots: list[Snapshot] = []
    certificate = None
    termination = None

    def snap_now() -> Snapshot:
        return Snapshot(t=float(scal[2]), g=float(scal[0]), h=float(scal[1]),
                        U=U.copy(), y=y)

    def run_checks(s: Snapshot):
        zv = float(zeta.sol(s.t)[0]) if s.t <= zeta.t[-1] else float(zeta.y[0][-1])
        excess = s.max_u() - zv
        checks["zeta_excess"] = max(checks["zeta_excess"], excess)
        if excess > tol.check_tol:
            warnings_log.append(
                f"t={s.t:.6g}: max u exceeds the reaction ODE bound by {excess:.3g}")
        if nl.sup_slope > 0.0:
            hb = _heat_bound(nl.sup_slope, s.t, u0_mass)
            h_excess = s.max_u() - hb
            checks["heat_excess"] = max(checks["heat_excess"], h_excess)
            if h_excess > tol.check_tol:
                warnings_log.append(
                    f"t={s.t:.6g}: max u exceeds the heat bound by {h_excess:.3g}")

    def certify_now(s: Snapshot):
        nonlocal certificate, termination
        if certifier is None or certificate is not None:
            return
        verdict = certifier(s)
        if verdict is not None:
            certificate = verdict
            termination = (Termination.SPREAD_CERTIFIED
                           if verdict.outcome.value == "Spreading"
                           else Termination.VANISH_CERTIFIED)

    s0 = snap_now()
    snapshots.append(s0)
    run_checks(s0)
    certify_now(s0)

    next_snap = cfg.snapshot_every
    while termination is None:
        t_stop = min(next_snap, cfg.t_max)
        status, steps, nh, gp, hp = _advance(
            U, scal, y, dy, cfg.mu, cfg.dt_safety, cfg.h0, t_stop,
            1 << 62, -1.0, *table, u_hi, blow_cap, tol.vanish_stop,
            tol.sign_tol, total_steps, hist, cc, mv, dL, dR, rhs_buf)
        total_steps += steps
        if nh:
            chunks.append(hist[:nh].copy())
            total_rows += nh
            if total_rows > 4_000_000:  # keep long runs bounded in memory
                merged = np.concatenate(chunks)[::2]
                chunks = [merged]
                total_rows = len(merged)
        if status == _HISTFULL or status == _NMAX:
            continue
        if status == _BLOWUP:
            termination = Termination.BLOWUP
            warnings_log.append(
                f"t={scal[2]:.6g}: blow-up cap {blow_cap:.3g} exceeded")
            break
        if status == _SIGN:
            raise SignError(
                f"t={scal[2]:.6g}: front moved inward (g'={gp:.3g}, h'={hp:.3g})")
        if status == _VANISH:
            termination = Termination.VANISH_TOL
            s = snap_now()
            snapshots.append(s)
            run_checks(s)
            break
        # reached t_stop
        s = snap_now()
        if abs(s.t - next_snap) <= 1e-9 * (1.0 + next_snap) or s.t >= cfg.t_max:
            snapshots.append(s)
            run_checks(s)
            certify_now(s)
            next_snap = round(s.t / cfg.snapshot_every + 1) * cfg.snapshot_every
        if termination is None and s.t >= cfg.t_max - 1e-12 * (1.0 + cfg.t_max):
            termination = Termination.TMAX

    if checks["center_bound_excess"] < scal[3]:
        checks["center_bound_excess"] = float(scal[3])
    if scal[3] > tol.check_tol:
        warnings_log.append(
            f"center bound |g+h| < 2 h0 violated by {scal[3]:.3g}")

    fronts = np.concatenate(chunks) if chunks else np.zeros((0, 5))
    return Run(config=cfg, config_hash=cfg.digest(), snapshots=snapshots,
               fronts=fronts, termination=termination, warnings=warnings_log,
               checks=checks, certificate=certificate)
