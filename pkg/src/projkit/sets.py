"""Closed sets with nearest-point projections.

Every set derives from :class:`ProjectableSet` and implements ``project``;
``distance`` and ``contains`` follow from it.  Set-valued projections are made
single-valued by picking the lexicographically smallest nearest point.

The module-level ``project_*`` functions are the stateless kernels; the
classes wrap them with validated parameters.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import BracketError, StructuralError
from .geometry import as_vector

__all__ = [
    "ProjectableSet",
    "FullSpace",
    "HalfSpace",
    "AffineSubspace",
    "EpigraphSet",
    "Sector",
    "FiniteSet",
    "ProductSet",
    "DiagonalSet",
    "project_halfspace",
    "project_affine",
    "project_epigraph",
    "project_sector",
    "project_finite",
    "project_product",
    "project_diagonal",
]

_EPS = np.finfo(float).eps


class ProjectableSet:
    """A closed subset of R^dim with a (single-valued) nearest-point map."""

    dim: int

    def project(self, x) -> np.ndarray:
        raise NotImplementedError

    def distance(self, x) -> float:
        x = as_vector(x, self.dim)
        return float(np.linalg.norm(x - self.project(x)))

    def contains(self, x, tol: float = 1e-10) -> bool:
        return self.distance(x) <= tol

    def _check(self, x) -> np.ndarray:
        return as_vector(x, self.dim)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


def _lexmin(cands: np.ndarray, d2: np.ndarray) -> np.ndarray:
    """Row of `cands` with minimal `d2`; exact ties go to the lexicographically smallest."""
    best = d2.min()
    idx = np.flatnonzero(d2 == best)
    if idx.size == 1:
        return cands[idx[0]]
    tied = cands[idx]
    order = np.lexsort(tied.T[::-1])
    return tied[order[0]]


class FullSpace(ProjectableSet):
    """All of R^dim; projection is the identity."""

    def __init__(self, dim: int):
        if dim < 1:
            raise StructuralError("dimension must be positive")
        self.dim = int(dim)

    def project(self, x):
        return self._check(x)


# -- halfspaces -------------------------------------------------------------

def project_halfspace(normal, offset: float, x) -> np.ndarray:
    """Project `x` onto ``{z : <normal, z> <= offset}``."""
    n = np.asarray(normal, dtype=float)
    x = as_vector(x, n.size)
    nn = float(np.dot(n, n))
    if nn == 0.0:
        raise StructuralError("halfspace normal must be nonzero")
    excess = float(np.dot(n, x)) - offset
    if excess <= 0.0:
        return x
    return as_vector(x - (excess / nn) * n)


class HalfSpace(ProjectableSet):
    """``{z : <normal, z> <= offset}``."""

    def __init__(self, normal, offset: float = 0.0):
        self.normal = as_vector(normal)
        if not np.any(self.normal):
            raise StructuralError("halfspace normal must be nonzero")
        self.offset = float(offset)
        self.dim = self.normal.size

    def project(self, x):
        return project_halfspace(self.normal, self.offset, x)


def project_affine(point, basis, x) -> np.ndarray:
    """Project `x` onto ``point + span(basis)``; `basis` rows must be orthonormal."""
    p = np.asarray(point, dtype=float)
    x = as_vector(x, p.size)
    Q = np.asarray(basis, dtype=float).reshape(-1, p.size)
    return as_vector(p + Q.T @ (Q @ (x - p)))


class AffineSubspace(ProjectableSet):
    """``point + span(directions)``; the directions are orthonormalised on entry."""

    def __init__(self, point, directions):
        self.point = as_vector(point)
        D = np.array(directions, dtype=float).reshape(-1, self.point.size)
        if not np.all(np.isfinite(D)):
            raise StructuralError("directions must be finite")
        q, r = np.linalg.qr(D.T)
        if np.any(np.abs(np.diag(r)) <= 1e-12 * max(1.0, np.abs(D).max())):
            raise StructuralError("directions must be linearly independent")
        basis = q.T.copy()
        basis.flags.writeable = False
        self.basis = basis
        self.dim = self.point.size

    def project(self, x):
        return project_affine(self.point, self.basis, x)


# -- epigraphs --------------------------------------------------------------

def _newton_bisect(g, dg, a, b, ga, gb, tol=1e-12, maxiter=200):
    """Safeguarded Newton on a sign-change bracket of `g`.

    Newton steps that leave the bracket (or lack a derivative) fall back to
    bisection.  Iterates until the bracket is a couple of ulps wide, so the
    returned root is as accurate as double precision permits.
    """
    if ga == 0.0:
        return a
    if gb == 0.0:
        return b
    if ga > 0:
        a, b, ga, gb = b, a, gb, ga  # keep g(a) < 0 < g(b)
    t = 0.5 * (a + b)
    best_t, best_g = (a, ga) if abs(ga) <= abs(gb) else (b, gb)
    for _ in range(maxiter):
        gt = g(t)
        if abs(gt) < abs(best_g):
            best_t, best_g = t, gt
        if gt == 0.0:
            return t
        if gt < 0:
            a = t
        else:
            b = t
        lo, hi = min(a, b), max(a, b)
        if hi - lo <= 4 * _EPS * max(abs(lo), abs(hi), 1e-300):
            break
        step = None
        if dg is not None:
            d = dg(t)
            if d != 0.0 and math.isfinite(d):
                step = gt / d
        if step is not None and abs(gt) <= tol and abs(step) <= 2 * _EPS * max(abs(t), 1e-300):
            break
        tn = t - step if step is not None else None
        if tn is None or not (lo < tn < hi):
            tn = 0.5 * (lo + hi)
        t = tn
    return best_t


def project_epigraph(es: "EpigraphSet", x) -> np.ndarray:
    """Project a 2-D point onto the epigraph of ``es.f`` over ``[es.lo, es.hi]``.

    Points on or above the graph inside the domain strip are returned
    unchanged.  Otherwise the nearest point lies on the graph or on one of the
    two vertical boundary rays; graph candidates are the roots of the
    stationarity equation ``(t - u1) + (f(t) - u2) f'(t) = 0`` inside a bracket
    guaranteed to contain the minimiser.
    """
    u = as_vector(x, 2)
    u1, u2 = float(u[0]), float(u[1])
    f, df, d2f, lo, hi = es.f, es.df, es.d2f, es.lo, es.hi
    if lo <= u1 <= hi and u2 >= f(u1):
        return u

    cands = []
    for edge in (lo, hi):
        cands.append((edge, max(u2, f(edge))))
    # any feasible candidate bounds the search radius
    if lo <= u1 <= hi:
        cands.append((u1, f(u1)))
    d0 = min(math.hypot(p - u1, q - u2) for p, q in cands)
    a, b = max(lo, u1 - d0), min(hi, u1 + d0)
    cands.append((a, f(a)))
    cands.append((b, f(b)))

    def g(t):
        return (t - u1) + (f(t) - u2) * df(t)

    dg = None
    if d2f is not None:
        def dg(t):
            ft = df(t)
            return 1.0 + ft * ft + (f(t) - u2) * d2f(t)

    if b > a:
        n = es.scan_points
        grid = [a + (b - a) * i / n for i in range(n)] + [b]
        gv = [g(t) for t in grid]
        for i in range(n):
            if gv[i] == 0.0 or gv[i] * gv[i + 1] < 0.0:
                t = _newton_bisect(g, dg, grid[i], grid[i + 1], gv[i], gv[i + 1])
                cands.append((t, f(t)))
        if gv[-1] == 0.0:
            cands.append((b, f(b)))
    # (squared distance, x, y) ordering breaks exact ties lexicographically
    best = min(((p - u1) ** 2 + (q - u2) ** 2, p, q) for p, q in cands)
    if not math.isfinite(best[0]):
        raise BracketError("non-finite epigraph candidate; f outside its domain?")
    return as_vector(best[1:])


class EpigraphSet(ProjectableSet):
    """``{(x, y) : lo <= x <= hi, y >= f(x)}`` for a C^1 scalar function `f`.

    Parameters
    ----------
    f, df : callable
        The function and its derivative (scalar in, scalar out).
    lo, hi : float
        Domain bracket.
    d2f : callable, optional
        Second derivative; enables Newton polishing of the stationarity root.
        Without it the root finder bisects.
    scan_points : int
        Subintervals scanned for sign changes, which guards against
        nonconvex `f` having several stationary points in the bracket.
    """

    dim = 2

    def __init__(self, f: Callable[[float], float], df: Callable[[float], float],
                 lo: float = -10.0, hi: float = 10.0,
                 d2f: Callable[[float], float] | None = None,
                 scan_points: int = 16, name: str = "f"):
        if not lo < hi:
            raise StructuralError("domain bracket needs lo < hi")
        self.f, self.df, self.d2f = f, df, d2f
        self.lo, self.hi = float(lo), float(hi)
        self.scan_points = int(scan_points)
        self.name = name

    def project(self, x):
        return project_epigraph(self, x)

    def __repr__(self):
        return f"EpigraphSet({self.name}, [{self.lo}, {self.hi}])"


# -- angular sectors ----------------------------------------------------------

def _cross(p, q) -> float:
    return p[0] * q[1] - p[1] * q[0]


def _in_wedge(theta_lo, theta_hi, x) -> bool:
    d_lo = (math.cos(theta_lo), math.sin(theta_lo))
    d_hi = (math.cos(theta_hi), math.sin(theta_hi))
    slack = -8 * _EPS * math.hypot(x[0], x[1])
    if theta_hi - theta_lo <= math.pi:
        return _cross(d_lo, x) >= slack and _cross(x, d_hi) >= slack
    # reflex sector: member unless strictly inside the complementary wedge
    return not (_cross(d_hi, x) > -slack and _cross(x, d_lo) > -slack)


def project_sector(apex_angles: Sequence[float], radius_cap: float | None, x) -> np.ndarray:
    """Project onto ``{r (cos t, sin t) : t in [lo, hi], 0 <= r <= cap}``.

    `radius_cap` of ``None`` means an unbounded cone.
    """
    theta_lo, theta_hi = map(float, apex_angles)
    if not 0.0 < theta_hi - theta_lo < 2 * math.pi:
        raise StructuralError("sector needs 0 < theta_hi - theta_lo < 2 pi")
    x = as_vector(x, 2)
    r = math.hypot(x[0], x[1])
    cap = math.inf if radius_cap is None else float(radius_cap)
    wedge = r == 0.0 or _in_wedge(theta_lo, theta_hi, x)
    if wedge and r <= cap:
        return x
    cands = [(0.0, 0.0)]
    for th in (theta_lo, theta_hi):
        d = (math.cos(th), math.sin(th))
        t = min(max(x[0] * d[0] + x[1] * d[1], 0.0), cap)
        cands.append((t * d[0], t * d[1]))
    if wedge:
        cands.append((cap * x[0] / r, cap * x[1] / r))
    pts = np.array(cands)
    d2 = ((pts - x) ** 2).sum(axis=1)
    return as_vector(_lexmin(pts, d2))


class Sector(ProjectableSet):
    """Closed angular sector (possibly reflex) with optional radius cap."""

    dim = 2

    def __init__(self, theta_lo: float, theta_hi: float, radius_cap: float | None = None):
        if not 0.0 < theta_hi - theta_lo < 2 * math.pi:
            raise StructuralError("sector needs 0 < theta_hi - theta_lo < 2 pi")
        self.theta_lo, self.theta_hi = float(theta_lo), float(theta_hi)
        self.radius_cap = radius_cap

    def project(self, x):
        return project_sector((self.theta_lo, self.theta_hi), self.radius_cap, x)


# -- finite point sets ---------------------------------------------------------

_KDTREE_MIN = 2048


def project_finite(points, x) -> np.ndarray:
    """Nearest listed point; exact ties go to the lexicographically smallest."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.shape[0] == 0:
        raise StructuralError("cannot project onto an empty point list")
    x = as_vector(x, pts.shape[1])
    d2 = ((pts - x) ** 2).sum(axis=1)
    return as_vector(_lexmin(pts, d2))


class FiniteSet(ProjectableSet):
    """A finite list of points.  Large lists are searched with a KD-tree."""

    def __init__(self, points):
        pts = np.array(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.shape[0] == 0:
            raise StructuralError("a finite set needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise StructuralError("finite set contains non-finite points")
        pts.flags.writeable = False
        self.points = pts
        self.dim = pts.shape[1]
        self._tree = cKDTree(pts) if pts.shape[0] >= _KDTREE_MIN else None

    def project(self, x):
        x = self._check(x)
        if self._tree is None:
            d2 = ((self.points - x) ** 2).sum(axis=1)
            return as_vector(_lexmin(self.points, d2))
        k = 8
        while True:
            _, idx = self._tree.query(x, k=min(k, len(self.points)))
            cand = self.points[np.atleast_1d(idx)]
            d2 = ((cand - x) ** 2).sum(axis=1)
            # recheck exactly; widen the query if the k-th neighbour also ties
            if k >= len(self.points) or d2.max() > d2.min():
                return as_vector(_lexmin(cand, d2))
            k *= 4

    def within(self, center, radius: float) -> np.ndarray:
        """Listed points in the closed ball ``B(center, radius)``."""
        c = self._check(center)
        if self._tree is None:
            mask = ((self.points - c) ** 2).sum(axis=1) <= radius * radius
            return self.points[mask]
        return self.points[sorted(self._tree.query_ball_point(c, radius))]

    def __repr__(self):
        return f"FiniteSet(n={len(self.points)}, dim={self.dim})"


# -- product space ---------------------------------------------------------------

def project_product(sets: Sequence[ProjectableSet], x) -> np.ndarray:
    """Componentwise projection onto ``C_1 x ... x C_m``."""
    dims = [s.dim for s in sets]
    x = as_vector(x)
    if x.size != sum(dims):
        raise StructuralError(f"product dimension {sum(dims)} != {x.size}")
    out = np.empty_like(x)
    i = 0
    for s, d in zip(sets, dims):
        out[i:i + d] = s.project(x[i:i + d])
        i += d
    return as_vector(out)


class ProductSet(ProjectableSet):
    def __init__(self, sets: Sequence[ProjectableSet]):
        if not sets:
            raise StructuralError("product of zero sets")
        self.sets = tuple(sets)
        self.dim = sum(s.dim for s in self.sets)

    def project(self, x):
        return project_product(self.sets, x)


def project_diagonal(x, m: int) -> np.ndarray:
    """Replace each of the `m` equal blocks of `x` by the blockwise mean."""
    x = as_vector(x)
    if m < 1 or x.size % m:
        raise StructuralError(f"dimension {x.size} is not divisible into {m} blocks")
    blocks = x.reshape(m, -1)
    mean = blocks.sum(axis=0) / m
    return as_vector(np.tile(mean, m))


class DiagonalSet(ProjectableSet):
    """``{(x, ..., x)}`` in (R^d)^m."""

    def __init__(self, m: int, d: int):
        if m < 1 or d < 1:
            raise StructuralError("need m >= 1 and d >= 1")
        self.m, self.d = int(m), int(d)
        self.dim = self.m * self.d

    def project(self, x):
        self._check(x)
        return project_diagonal(x, self.m)
