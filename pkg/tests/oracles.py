"""Brute-force reference computations, independent of the library paths.

Each oracle re-derives a quantity from first principles (dense trapezoid
sums, plain scans) so the adaptive/shooting implementations are checked
against something that cannot share their failure modes.
"""

import numpy as np


def antiderivative_table(f, hi=1.0, n=2_000_001):
    """Cumulative trapezoid of f on [0, hi]; returns (grid, values)."""
    u = np.linspace(0.0, hi, n)
    fu = np.asarray(f(u), dtype=float)
    du = u[1] - u[0]
    F = np.concatenate(([0.0], np.cumsum(0.5 * (fu[1:] + fu[:-1]) * du)))
    return u, F


def time_map_trapezoid(f, fq, Fgrid, q, n=1_000_000):
    """Z(q) by plain trapezoid on the substituted variable r = q - s^2."""
    u, F = Fgrid
    s = np.linspace(0.0, np.sqrt(q), n)
    Fq = np.interp(q, u, F)
    inner = Fq - np.interp(q - s * s, u, F)
    vals = np.empty_like(s)
    vals[0] = np.sqrt(2.0 / fq)
    vals[1:] = 2.0 * s[1:] / np.sqrt(2.0 * np.maximum(inner[1:], 1e-300))
    return float(np.trapezoid(vals, s))


def time_map_scan(f, Fgrid, q_lo, q_hi, n_scan=10_000, n_s=20_001):
    """Scan Z(q) over [q_lo, q_hi] with a fixed trapezoid rule per point.

    Returns (q values, Z values); the minimum brackets the critical length.
    """
    u, F = Fgrid
    qs = np.linspace(q_lo, q_hi, n_scan)
    zs = np.empty_like(qs)
    for i, q in enumerate(qs):
        s = np.linspace(0.0, np.sqrt(q), n_s)
        inner = np.interp(q, u, F) - np.interp(q - s * s, u, F)
        vals = np.empty_like(s)
        vals[0] = np.sqrt(2.0 / float(f(q)))
        vals[1:] = 2.0 * s[1:] / np.sqrt(2.0 * np.maximum(inner[1:], 1e-300))
        zs[i] = np.trapezoid(vals, s)
    return qs, zs


def wave_coordinate_quadrature(f, omega, q_points, n=400_001):
    """z(q) = int_0^q dr / sqrt(omega^2 - 2*int_0^r f) by dense trapezoid."""
    u, F = antiderivative_table(f, hi=1.0, n=n)
    out = []
    for q in q_points:
        r = np.linspace(0.0, q, n // 4)
        p = np.sqrt(np.maximum(omega * omega - 2.0 * np.interp(r, u, F),
                               1e-300))
        out.append(float(np.trapezoid(1.0 / p, r)))
    return np.asarray(out)
