"""Reference computations written independently of the package.

Nothing here imports ``abgrav``; each function restates the physics or the
numerics from scratch so tests can compare against it.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from scipy import integrate


def raised_cosine(s, duration, start, end):
    w = 0.5 * (1.0 - np.cos(np.pi * np.asarray(s) / duration))
    return start + (end - start) * w


def piecewise(segments):
    """U(t) for ``[("const", dur, level) | ("ramp", dur, a, b), ...]``."""
    edges = np.concatenate([[0.0], np.cumsum([s[1] for s in segments])])

    def U(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for i, seg in enumerate(segments):
            lo, hi = edges[i], edges[i + 1]
            last = i == len(segments) - 1
            mask = (t >= lo) & ((t <= hi) if last else (t < hi))
            if seg[0] == "const":
                out[mask] = seg[2]
            else:
                out[mask] = raised_cosine(t[mask] - lo, seg[1], seg[2], seg[3])
        return out

    return U, float(edges[-1])


def midpoint_integral(U, duration, n=10**6):
    t = (np.arange(n) + 0.5) * (duration / n)
    return math.fsum(U(t)) * (duration / n)


def quad_integral(U, duration, breakpoints=()):
    val, _ = integrate.quad(lambda t: float(U(np.array([t]))[0]), 0.0, duration,
                            points=list(breakpoints) or None, limit=500,
                            epsabs=1e-12, epsrel=1e-11)
    return val


def dft_mean_momentum(psi, dx, hbar=1.0):
    """<p> from an explicit O(n^2) discrete Fourier sum."""
    n = len(psi)
    j = np.arange(n)
    kk = np.where(j < n // 2, j, j - n) * (2 * np.pi / (n * dx))
    phases = np.exp(-2j * np.pi * np.outer(j, j) / n)
    coeffs = phases @ psi
    w = np.abs(coeffs) ** 2
    return hbar * float(np.dot(kk, w) / w.sum())


def free_gaussian_variance(sigma0, t, hbar=1.0, m=1.0):
    """Position variance of a free Gaussian packet of initial width sigma0."""
    return sigma0**2 * (1.0 + (hbar * t / (2.0 * m * sigma0**2)) ** 2)


def newtonian_exact(m, M, R1, R2, dwell, hbar=1):
    """(m M / hbar)(1/R2 - 1/R1) dwell in exact rational arithmetic."""
    F = Fraction
    val = F(m) * F(M) / F(hbar) * (1 / F(R2) - 1 / F(R1)) * F(dwell)
    return float(val)


def inverse_radius_trapezoid(times, radii):
    return float(integrate.trapezoid(1.0 / np.asarray(radii), np.asarray(times)))


def fit_through_origin(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slope = float(np.dot(x, y) / np.dot(x, x))
    rel = float(np.max(np.abs(y - slope * x)) / np.max(np.abs(y)))
    return slope, rel
