"""Independent reference computations used by the tests.

Nothing here calls the projection kernels under test; each oracle works
from the mathematical definition by brute force or a closed form.
"""
import cmath
import math

import numpy as np
from scipy.optimize import minimize_scalar


def epigraph_brute(f, lo, hi, x, h=1e-4, fv=None):
    """Nearest point of {(t, y): lo <= t <= hi, y >= f(t)} by grid search and refinement.

    `fv` is an optional array version of `f` for speed.
    """
    u1, u2 = float(x[0]), float(x[1])
    fv = fv if fv is not None else np.vectorize(f)
    if lo <= u1 <= hi and u2 >= f(u1):
        return np.array([u1, u2])
    t = np.linspace(lo, hi, int(round((hi - lo) / h)) + 1)
    d2 = (t - u1) ** 2 + (fv(t) - u2) ** 2
    i = int(np.argmin(d2))
    res = minimize_scalar(lambda s: (s - u1) ** 2 + (f(s) - u2) ** 2,
                          bounds=(max(lo, t[i] - h), min(hi, t[i] + h)), method="bounded",
                          options={"xatol": 1e-13})
    cands = [(res.x, f(res.x)), (t[i], f(t[i]))]
    # vertical boundary rays above the graph at the domain ends
    for e in (lo, hi):
        cands.append((e, max(u2, f(e))))
    best = min(cands, key=lambda p: (p[0] - u1) ** 2 + (p[1] - u2) ** 2)
    return np.array(best, dtype=float)


def sector_brute(theta_lo, theta_hi, cap, x, n=200_001):
    """Nearest point of a (capped) planar sector, sampling its boundary densely."""
    x = np.asarray(x, dtype=float)
    span = (theta_hi - theta_lo) % (2 * math.pi) or 2 * math.pi
    ang = math.atan2(x[1], x[0])
    rel = (ang - theta_lo) % (2 * math.pi)
    r = math.hypot(x[0], x[1])
    if rel <= span and (cap is None or r <= cap):
        return x.copy()
    R = cap if cap is not None else r + 10.0
    s = np.linspace(0.0, R, n)
    pts = [np.outer(s, [math.cos(theta_lo), math.sin(theta_lo)]),
           np.outer(s, [math.cos(theta_hi), math.sin(theta_hi)])]
    if cap is not None:
        a = theta_lo + np.linspace(0.0, span, n)
        pts.append(cap * np.stack([np.cos(a), np.sin(a)], axis=1))
    P = np.vstack(pts)
    return P[np.argmin(((P - x) ** 2).sum(axis=1))]


def nearest_point_loop(points, x):
    """Nearest listed point, plain loop, lexicographic tie-break."""
    best, best_d = None, math.inf
    for p in np.asarray(points, dtype=float):
        d = float(((p - x) ** 2).sum())
        if d < best_d or (d == best_d and tuple(p) < tuple(best)):
            best, best_d = p, d
    return best


def dft_slow(z):
    """Unitary DFT with kernel exp(+2 pi i t w / N) / sqrt(N), as an explicit double sum."""
    z = list(complex(v) for v in z)
    N = len(z)
    return np.array([sum(z[t] * cmath.exp(2j * math.pi * t * w / N) for t in range(N)) / math.sqrt(N)
                     for w in range(N)])


def parabola_step(x):
    """x_{k+1} for epi(t^2) vs the lower halfplane: the real root of t + 2 t^3 = x.

    Cardano's formula for t^3 + t/2 - x/2 = 0, polished by one Newton step.
    """
    s = math.sqrt(x * x / 16.0 + 1.0 / 216.0)
    t = math.copysign(abs(x / 4 + s) ** (1 / 3), x / 4 + s) + math.copysign(abs(x / 4 - s) ** (1 / 3), x / 4 - s)
    return t - (t + 2 * t ** 3 - x) / (1 + 6 * t * t)


def parabola_orbit(x0, n):
    xs = [x0]
    for _ in range(n):
        xs.append(parabola_step(xs[-1]))
    return np.array(xs)


def flat_quotient_bound(x, omega):
    """Upper bound 2 x^-6 exp(-(2 - omega) / x^2) on the angle quotient of exp(-1/x^2)."""
    return 2.0 * x ** -6 * math.exp(-(2.0 - omega) / (x * x))
