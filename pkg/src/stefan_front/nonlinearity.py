"""Reaction terms: validation, derived constants, and integrals.

A reaction term f drives u_t = u_xx + f(u).  Three named kinds are
supported (monostable, bistable, combustion) plus a lightly-checked
custom kind.  Building a :class:`Nonlinearity` verifies the sign/zero
structure of f on a grid and precomputes the constants the rest of the
package needs: f'(0), f'(1), the best linear bound K with f(u) <= K*u,
the supremum F of f, omega0 = sqrt(2*int_0^1 f), and (bistable only)
the level theta_bar in (theta, 1) where int_0^theta_bar f = 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .errors import DomainError, KindError, QuadError, ValidationError

__all__ = [
    "Kind",
    "Nonlinearity",
    "build",
    "catalog",
    "primitive",
    "theta_bar",
    "omega0",
    "sup_slope",
    "sup_val",
]

DEFAULT_QUAD_TOL = 1e-10
_ZERO_TOL = 1e-9  # |f| below this at a mandated zero counts as zero


class Kind(enum.Enum):
    MONOSTABLE = "monostable"
    BISTABLE = "bistable"
    COMBUSTION = "combustion"
    CUSTOM = "custom"


# ----------------------------------------------------------------------
# quadrature

def _adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                      tol: float, max_depth: int = 48) -> float:
    """Adaptive Simpson rule with absolute tolerance ``tol``."""

    def simpson(lo, flo, hi, fhi, fmid):
        return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)

    def recurse(lo, flo, hi, fhi, fmid, whole, tol, depth):
        mid = 0.5 * (lo + hi)
        lmid = 0.5 * (lo + mid)
        rmid = 0.5 * (mid + hi)
        flmid = f(lmid)
        frmid = f(rmid)
        left = simpson(lo, flo, mid, fmid, flmid)
        right = simpson(mid, fmid, hi, fhi, frmid)
        err = left + right - whole
        if abs(err) <= 15.0 * tol:
            return left + right + err / 15.0
        if depth >= max_depth:
            raise QuadError(
                f"adaptive Simpson hit depth {max_depth} on [{lo}, {hi}]")
        return (recurse(lo, flo, mid, fmid, flmid, left, 0.5 * tol, depth + 1)
                + recurse(mid, fmid, hi, fhi, frmid, right, 0.5 * tol, depth + 1))

    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    fm = f(0.5 * (a + b))
    whole = simpson(a, fa, b, fb, fm)
    return recurse(a, fa, b, fb, fm, whole, tol, 0)


class _Antiderivative:
    """Fast vectorized antiderivative Phi(x) = int_0^x f, tabulated once.

    Piecewise-uniform cubic Hermite cells (values from Gauss-Legendre,
    slopes are f itself), split at the supplied breakpoints so kinked
    catalog functions keep full accuracy.  Roughly 1e-13 absolute error
    for smooth-per-segment f; `primitive` remains the adaptive reference.
    """

    _GL_X = np.array([-0.9061798459386640, -0.5384693101056831, 0.0,
                      0.5384693101056831, 0.9061798459386640])
    _GL_W = np.array([0.2369268850561891, 0.4786286704993665,
                      0.5688888888888889, 0.4786286704993665,
                      0.2369268850561891])

    def __init__(self, f: Callable[[np.ndarray], np.ndarray],
                 breaks: list[float], cells_per_segment: int = 2048):
        nodes = [np.linspace(breaks[i], breaks[i + 1],
                             cells_per_segment + 1)
                 for i in range(len(breaks) - 1)]
        x = np.unique(np.concatenate(nodes))
        mid = 0.5 * (x[:-1] + x[1:])
        half = 0.5 * np.diff(x)
        # per-cell 5-point Gauss-Legendre, then cumulative sum
        pts = mid[:, None] + half[:, None] * self._GL_X[None, :]
        vals = np.asarray(f(pts.ravel()), dtype=float).reshape(pts.shape)
        cell = half * (vals @ self._GL_W)
        self.x = x
        self.F = np.concatenate(([0.0], np.cumsum(cell)))
        self.fx = np.asarray(f(x), dtype=float)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        x, F, fx = self.x, self.F, self.fx
        if np.any(u < x[0] - 1e-12) or np.any(u > x[-1] + 1e-12):
            raise DomainError(
                f"antiderivative evaluated outside [{x[0]}, {x[-1]}]")
        idx = np.clip(np.searchsorted(x, u, side="right") - 1, 0, len(x) - 2)
        h = x[idx + 1] - x[idx]
        t = np.clip((u - x[idx]) / h, 0.0, 1.0)
        t2 = t * t
        t3 = t2 * t
        h00 = 2 * t3 - 3 * t2 + 1
        h10 = t3 - 2 * t2 + t
        h01 = -2 * t3 + 3 * t2
        h11 = t3 - t2
        out = (h00 * F[idx] + h * h10 * fx[idx]
               + h01 * F[idx + 1] + h * h11 * fx[idx + 1])
        return out if out.ndim else float(out)


# ----------------------------------------------------------------------
# the domain type

@dataclass(frozen=True)
class Nonlinearity:
    """A validated reaction term with its derived constants.

    ``theta`` is the unstable/ignition zero (bistable/combustion),
    ``delta0`` the monotone band above ignition (combustion),
    ``fp0``/``fp1`` the end slopes f'(0)/f'(1), ``sup_slope`` the best K
    with f(u) <= K*u, ``sup_val`` the supremum of f, ``omega0`` the slope
    sqrt(2*int_0^1 f) of the zero-speed wave at u = 0, ``theta_bar`` the
    bistable balance level, and ``u_cap`` the validation/search ceiling.
    Instances are immutable and safe to share between workers.
    """

    kind: Kind
    f: Callable
    df: Callable
    theta: float | None
    delta0: float | None
    fp0: float
    fp1: float
    sup_slope: float
    sup_val: float
    omega0: float
    theta_bar: float | None
    u_cap: float
    kinks: tuple[float, ...] = ()
    label: str = "nonlinearity"
    _phi: _Antiderivative = field(repr=False, compare=False, default=None)

    def primitive(self, a: float, b: float, quad_tol: float = DEFAULT_QUAD_TOL) -> float:
        """Integral of f over [a, b] by adaptive quadrature (reference path)."""
        return primitive(self, a, b, quad_tol)

    def integral_from_zero(self, u):
        """Tabulated Phi(u) = int_0^u f; vectorized fast path for hot loops."""
        return self._phi(u)

    def __repr__(self):  # avoid dumping callables / tables
        return (f"Nonlinearity({self.label!r}, kind={self.kind.value}, "
                f"theta={self.theta}, K={self.sup_slope:.6g}, "
                f"omega0={self.omega0:.6g})")

    def descriptor(self) -> dict:
        """JSON-safe summary used for config echoes and run hashes."""
        return {
            "label": self.label,
            "kind": self.kind.value,
            "theta": self.theta,
            "delta0": self.delta0,
            "fp0": self.fp0,
            "fp1": self.fp1,
            "sup_slope": self.sup_slope,
            "sup_val": self.sup_val,
            "omega0": self.omega0,
            "theta_bar": self.theta_bar,
            "u_cap": self.u_cap,
        }


# ----------------------------------------------------------------------
# validation helpers

def _golden_max(fun, lo, hi, iters=80):
    """Golden-section maximizer; returns (x, fun(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    x = 0.5 * (a + b)
    return x, fun(x)


def _refined_grid_max(fun, grid):
    """Max over a grid, then golden-section between the best point's neighbors."""
    vals = np.array([fun(u) for u in grid])
    i = int(np.argmax(vals))
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        _, v = _golden_max(fun, lo, hi)
        return max(float(vals[i]), v)
    return float(vals[i])


def _fail(cond: str, u: float, value: float):
    raise ValidationError(f"{cond} violated at u={u:.12g} (f={value:.6g})")


def _validate(kind: Kind, f, df, theta, delta0, u_cap, grid):
    """Check the sign/zero structure of f on ``grid`` plus exact points."""
    fv = {float(u): float(f(u)) for u in grid}

    def check_zero(u, name):
        val = float(f(u))
        if abs(val) > _ZERO_TOL:
            _fail(f"{name}=0", u, val)

    check_zero(0.0, "f(0)")
    if kind is Kind.CUSTOM:
        return

    check_zero(1.0, "f(1)")
    fp0 = float(df(0.0))
    fp1 = float(df(1.0))
    if fp1 >= 0.0:
        raise ValidationError(f"f'(1) must be negative, got {fp1:.6g}")

    if kind is Kind.MONOSTABLE:
        if fp0 <= 0.0:
            raise ValidationError(f"monostable needs f'(0) > 0, got {fp0:.6g}")
        for u, val in fv.items():
            if u <= 0.0 or abs(u - 1.0) < 1e-12:
                continue
            if (1.0 - u) * val <= 0.0:
                _fail("(1-u) f(u) > 0", u, val)
        return

    if theta is None:
        raise DomainError(f"{kind.value} requires theta")
    check_zero(theta, "f(theta)")

    if kind is Kind.BISTABLE:
        if fp0 >= 0.0:
            raise ValidationError(f"bistable needs f'(0) < 0, got {fp0:.6g}")
        for u, val in fv.items():
            if min(abs(u), abs(u - theta), abs(u - 1.0)) < 1e-12:
                continue
            if 0.0 < u < theta and val >= 0.0:
                _fail("f < 0 on (0, theta)", u, val)
            if theta < u < 1.0 and val <= 0.0:
                _fail("f > 0 on (theta, 1)", u, val)
            if u > 1.0 and val >= 0.0:
                _fail("f < 0 above 1", u, val)
        total = _adaptive_simpson(lambda s: float(f(s)), 0.0, 1.0, DEFAULT_QUAD_TOL)
        if total <= 0.0:
            raise ValidationError(
                f"bistable needs int_0^1 f > 0, got {total:.6g}")
        return

    # combustion
    for u, val in fv.items():
        if abs(u - 1.0) < 1e-12:
            continue
        if 0.0 <= u <= theta and abs(val) > _ZERO_TOL:
            _fail("f = 0 on [0, theta]", u, val)
        if theta < u < 1.0 and val <= 0.0:
            _fail("f > 0 on (theta, 1)", u, val)
        if u > 1.0 and val >= 0.0:
            _fail("f < 0 above 1", u, val)
    band = delta0 if delta0 is not None else 0.5 * (1.0 - theta)
    for u in np.linspace(theta + 1e-9, theta + band - 1e-9, 33):
        if float(df(u)) < -1e-9:
            _fail("f nondecreasing on (theta, theta+delta0)", float(u), float(f(u)))


# ----------------------------------------------------------------------
# public operations

def build(kind: Kind | str, f: Callable, df: Callable, theta: float | None = None,
          delta0: float | None = None, u_cap: float = 3.0, grid_n: int = 513,
          kinks: tuple[float, ...] = (), label: str = "nonlinearity") -> Nonlinearity:
    """Validate a reaction term and precompute its derived constants.

    Sign conditions are checked on a uniform grid of ``grid_n`` points on
    [0, u_cap] plus the exact points {0, theta, 1}; K and F come from grid
    maximization with golden-section refinement; omega0 and theta_bar from
    adaptive quadrature and bisection.

    Raises ValidationError naming the first violated condition, or
    DomainError for malformed arguments.
    """
    kind = Kind(kind) if not isinstance(kind, Kind) else kind
    if grid_n < 64:
        raise DomainError(f"grid_n must be >= 64, got {grid_n}")
    if u_cap <= 1.0:
        raise DomainError(f"u_cap must exceed 1, got {u_cap}")
    if theta is not None and not (0.0 < theta < 1.0):
        raise DomainError(f"theta must lie in (0, 1), got {theta}")
    if kind is Kind.COMBUSTION and delta0 is not None and delta0 <= 0.0:
        raise DomainError(f"delta0 must be positive, got {delta0}")

    # accept scalar-only callables
    try:
        np.asarray(f(np.array([0.0, 0.5]))) + 0.0
    except Exception:
        f = np.vectorize(f, otypes=[float])
        df = np.vectorize(df, otypes=[float])

    grid = np.unique(np.concatenate([
        np.linspace(0.0, u_cap, grid_n),
        [0.0, 1.0] + ([theta] if theta is not None else []),
    ]))
    _validate(kind, f, df, theta, delta0, u_cap, grid)

    fp0 = float(df(0.0))
    fp1 = float(df(1.0))

    eps = 1e-12
    slope_fun = lambda u: float(f(u)) / u
    interior = grid[grid > eps]
    K = _refined_grid_max(slope_fun, interior)
    K = max(K, fp0, 0.0)  # sup f(u)/u can live in the u -> 0 limit
    F = max(_refined_grid_max(lambda u: float(f(u)), grid), 0.0)

    for u in grid[grid > eps]:
        if float(f(u)) > K * u + 1e-12 * (1.0 + K):
            _fail("f(u) <= K u", float(u), float(f(u)))

    if kind is Kind.COMBUSTION and delta0 is None:
        delta0 = 0.5 * (1.0 - theta)
    if kind is not Kind.COMBUSTION:
        delta0 = None
    if kind in (Kind.MONOSTABLE, Kind.CUSTOM):
        theta = None

    breaks = sorted({0.0, u_cap} | set(kinks)
                    | ({theta} if theta is not None else set()))
    phi = _Antiderivative(f, breaks)

    int01 = _adaptive_simpson(lambda s: float(f(s)), 0.0, 1.0, DEFAULT_QUAD_TOL)
    w0 = math.sqrt(2.0 * int01) if int01 > 0.0 else 0.0
    if kind is not Kind.CUSTOM and w0 <= 0.0:
        raise ValidationError(f"int_0^1 f must be positive, got {int01:.6g}")

    nl = Nonlinearity(kind=kind, f=f, df=df, theta=theta, delta0=delta0,
                      fp0=fp0, fp1=fp1, sup_slope=K, sup_val=F, omega0=w0,
                      theta_bar=None, u_cap=u_cap, kinks=tuple(kinks),
                      label=label, _phi=phi)
    if kind is Kind.BISTABLE:
        nl = replace(nl, theta_bar=theta_bar(nl))
    return nl


def primitive(nl: Nonlinearity, a: float, b: float,
              quad_tol: float = DEFAULT_QUAD_TOL) -> float:
    """int_a^b f(s) ds by adaptive Simpson, absolute error <= quad_tol."""
    if not (0.0 <= a <= b <= nl.u_cap):
        raise DomainError(f"need 0 <= a <= b <= u_cap, got a={a}, b={b}")
    if a == b:
        return 0.0
    cuts = [a] + [c for c in sorted(set(nl.kinks) | ({nl.theta} if nl.theta else set()))
                  if a < c < b] + [b]
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        total += _adaptive_simpson(lambda s: float(nl.f(s)), lo, hi, quad_tol)
    return total


def theta_bar(nl: Nonlinearity, tol: float = 1e-10) -> float:
    """The level in (theta, 1) where int_0^x f vanishes (bistable only)."""
    if nl.kind is not Kind.BISTABLE:
        raise KindError(f"theta_bar requires a bistable term, got {nl.kind.value}")
    lo, hi = nl.theta, 1.0
    flo = primitive(nl, 0.0, lo)
    if flo >= 0.0:
        raise ValidationError("int_0^theta f should be negative")
    F = nl.integral_from_zero
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if F(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def omega0(nl: Nonlinearity) -> float:
    """sqrt(2 * int_0^1 f): the zero-speed wave slope at u = 0."""
    return nl.omega0


def sup_slope(nl: Nonlinearity) -> float:
    """The best K with f(u) <= K*u on the validated range."""
    return nl.sup_slope


def sup_val(nl: Nonlinearity) -> float:
    """sup of f on the validated range."""
    return nl.sup_val


# ----------------------------------------------------------------------
# catalog

def _poly_pair(coeffs):
    p = np.polynomial.Polynomial(coeffs)
    return p, p.deriv()


def catalog(name: str, theta: float | None = None,
            coeffs: list[float] | None = None, u_cap: float = 3.0,
            grid_n: int = 513) -> Nonlinearity:
    """Build a named reaction term.

    "logistic"          u(1-u)
    "cubic_bistable"    u(u-theta)(1-u), needs theta
    "combustion"        0 on [0,theta], (u-theta)(1-u) above, needs theta
    "custom"            polynomial from a coefficient list (low order first)
    """
    if name == "logistic":
        f, df = _poly_pair([0.0, 1.0, -1.0])
        return build(Kind.MONOSTABLE, f, df, u_cap=u_cap, grid_n=grid_n,
                     label="logistic")
    if name == "cubic_bistable":
        if theta is None:
            raise DomainError("cubic_bistable requires theta")
        # u(u-theta)(1-u) = -theta*u + (1+theta)*u^2 - u^3
        f, df = _poly_pair([0.0, -theta, 1.0 + theta, -1.0])
        return build(Kind.BISTABLE, f, df, theta=theta, u_cap=u_cap,
                     grid_n=grid_n, label=f"cubic_bistable(theta={theta})")
    if name == "combustion":
        if theta is None:
            raise DomainError("combustion requires theta")
        th = float(theta)

        def f(u):
            u = np.asarray(u, dtype=float)
            out = np.where(u > th, (u - th) * (1.0 - u), 0.0)
            return out if out.ndim else float(out)

        def df(u):
            u = np.asarray(u, dtype=float)
            out = np.where(u > th, 1.0 + th - 2.0 * u, 0.0)
            return out if out.ndim else float(out)

        return build(Kind.COMBUSTION, f, df, theta=th, u_cap=u_cap,
                     grid_n=grid_n, kinks=(th,),
                     label=f"combustion(theta={theta})")
    if name == "custom":
        if coeffs is None:
            raise DomainError("custom requires a coefficient list")
        f, df = _poly_pair([float(c) for c in coeffs])
        return build(Kind.CUSTOM, f, df, u_cap=u_cap, grid_n=grid_n,
                     label=f"custom{tuple(coeffs)}")
    raise DomainError(f"unknown catalog name {name!r}")
