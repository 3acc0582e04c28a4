"""Spiral-shaped set pairs on which alternating projections behave badly or well.

* discrete spirals: points obtained by projecting perpendicularly from one
  ray onto the next, alternately assigned to A and B (linear convergence);
* the continuous spiral approaching the unit circle from outside, sampled at
  a recursively defined sequence of angles (non-convergence);
* a 3-D spiral winding down onto a cylinder (non-convergence).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import ConstructionError, StructuralError
from .geometry import as_vector
from .sets import FiniteSet, ProjectableSet

__all__ = [
    "DiscreteSpiralSpec",
    "discrete_spiral_orbit",
    "build_discrete_spiral",
    "spiral_point",
    "continuous_spiral_angles",
    "build_continuous_spiral_pair",
    "circle_sample",
    "Cylinder",
    "build_spiral_cylinder",
]


@dataclass(frozen=True)
class DiscreteSpiralSpec:
    """Parameters of a discrete spiral.

    ``ray_angle`` is the angle between consecutive rays.  Points with even
    orbit index go to A when ``parity == "even"`` (to B otherwise).
    """

    ray_angle: float = math.pi / 4
    start_radius: float = 1.0
    start_angle: float = 0.0
    truncation_floor: float = 1e-13
    parity: str = "even"

    def __post_init__(self):
        if not 0.0 < self.ray_angle <= math.pi / 4 + 1e-15:
            raise ConstructionError("ray angle must lie in (0, pi/4]")
        if self.truncation_floor <= 0.0 or self.start_radius <= 0.0:
            raise ConstructionError("start radius and truncation floor must be positive")
        if self.parity not in ("even", "odd"):
            raise ConstructionError("parity is 'even' or 'odd'")

    @property
    def ray_count(self) -> float:
        return 2 * math.pi / self.ray_angle


def discrete_spiral_orbit(spec: DiscreteSpiralSpec) -> np.ndarray:
    """Orbit ``p_0, p_1, ...`` of successive projections onto the next ray.

    Each step scales the norm by ``cos(ray_angle)``; generation stops before
    the norm drops below the truncation floor.
    """
    th = spec.start_angle
    p = spec.start_radius * np.array([math.cos(th), math.sin(th)])
    pts = [p]
    k = 0
    while True:
        k += 1
        u = np.array([math.cos(th + k * spec.ray_angle), math.sin(th + k * spec.ray_angle)])
        p = np.dot(p, u) * u
        if np.linalg.norm(p) < spec.truncation_floor:
            break
        pts.append(p)
    return np.array(pts)


def build_discrete_spiral(spec: DiscreteSpiralSpec, validate: bool = True):
    """Split the spiral orbit into the pair ``(A, B)``, both containing the origin.

    With `validate`, every orbit point except the last is checked to project
    onto its successor in the other set; a failure raises
    :class:`ConstructionError`.
    """
    orbit = discrete_spiral_orbit(spec)
    first = 0 if spec.parity == "even" else 1
    origin = np.zeros((1, 2))
    A = FiniteSet(np.vstack([orbit[first::2], origin]))
    B = FiniteSet(np.vstack([orbit[1 - first::2], origin]))
    if validate:
        for k in range(len(orbit) - 1):
            target = B if (k - first) % 2 == 0 else A
            if not np.array_equal(target.project(orbit[k]), orbit[k + 1]):
                raise ConstructionError(
                    f"projection order breaks at orbit index {k} for ray angle {spec.ray_angle}"
                )
    return A, B


# -- continuous spiral around the unit circle -----------------------------------

_HALF_TURN_GAP = (1.0 - math.exp(-2 * math.pi)) / 2


def spiral_point(phi: float) -> np.ndarray:
    """``z(phi) = (1 + exp(-phi)) exp(i phi)`` as a point of R^2."""
    rad = 1.0 + math.exp(-phi)
    return np.array([rad * math.cos(phi), rad * math.sin(phi)])


def _chord(phi0: float, phi1: float) -> float:
    # |z(phi1) - z(phi0)| without cancellation in the radial part
    e0, e1 = math.exp(-phi0), math.exp(-phi1)
    dphi = phi1 - phi0
    # |r1 e^{i dphi} - r0|^2 = (r1 - r0)^2 + 4 r0 r1 sin^2(dphi/2)
    r0, r1 = 1.0 + e0, 1.0 + e1
    s = math.sin(dphi / 2)
    return math.sqrt((e1 - e0) ** 2 + 4 * r0 * r1 * s * s)


def continuous_spiral_angles(r1: float, n_points: int = 6000, phi1: float = 0.0,
                             floor: float = 1e-13) -> np.ndarray:
    """Angles ``phi_1 < phi_2 < ...`` with ``|z(phi_{n+1}) - z(phi_n)| = r_n``.

    ``r_1`` is given; afterwards ``r_{n+1} = exp(-phi_{n+1}) (1 - exp(-2 pi)) / 2``.
    Generation stops after `n_points` angles or once ``exp(-phi)`` falls below
    `floor`.
    """
    if r1 <= 0:
        raise ConstructionError("r1 must be positive")
    phis = [float(phi1)]
    r = float(r1)
    while len(phis) < n_points:
        p0 = phis[-1]
        hi = p0 + math.pi
        if _chord(p0, hi) <= r:
            raise ConstructionError(f"chord {r} too long at phi={p0}; choose a smaller r1")
        p1 = brentq(lambda p: _chord(p0, p) - r, p0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        if not p1 > p0:
            raise ConstructionError(f"angle recursion stalled at phi={p0}")
        if math.exp(-p1) < floor:
            break
        phis.append(p1)
        r = math.exp(-p1) * _HALF_TURN_GAP
    return np.array(phis)


def circle_sample(n: int, dim: int = 2) -> np.ndarray:
    t = 2 * math.pi * np.arange(n) / n
    pts = np.zeros((n, dim))
    pts[:, 0], pts[:, 1] = np.cos(t), np.sin(t)
    return pts


@lru_cache(maxsize=8)
def _continuous_pair(r1, n_points, circle_samples, phi1):
    phis = continuous_spiral_angles(r1, n_points, phi1)
    z = np.array([spiral_point(p) for p in phis])
    circ = circle_sample(circle_samples)
    # 1-based indexing: z_1, z_3, ... in B and z_2, z_4, ... in A
    A = FiniteSet(np.vstack([z[1::2], circ]))
    B = FiniteSet(np.vstack([z[0::2], circ]))
    return A, B, z, phis


def build_continuous_spiral_pair(r1: float = _HALF_TURN_GAP, n_points: int = 6000,
                                 circle_samples: int = 4096, phi1: float = 0.0):
    """Return ``(A, B)``: alternate spiral points plus a sample of the unit circle.

    The generated points and angles are available as ``A.spiral_points`` and
    ``A.spiral_angles`` (shared by both sets).
    """
    A, B, z, phis = _continuous_pair(float(r1), int(n_points), int(circle_samples), float(phi1))
    for s in (A, B):
        s.spiral_points, s.spiral_angles = z, phis
    return A, B


# -- spiral and cylinder in R^3 ------------------------------------------------------

class Cylinder(ProjectableSet):
    """Lateral surface ``{(cos a, sin a, h) : 0 <= h <= height}``."""

    dim = 3

    def __init__(self, height: float = 1.0):
        if height <= 0:
            raise StructuralError("height must be positive")
        self.height = float(height)

    def project(self, x):
        x = self._check(x)
        rho = math.hypot(x[0], x[1])
        h = min(max(x[2], 0.0), self.height)
        if rho == 0.0:
            # every rim point is nearest; (-1, 0, h) is the lexicographic minimum
            return as_vector([-1.0, 0.0, h])
        return as_vector([x[0] / rho, x[1] / rho, h])


def spiral3d_point(t):
    t = np.asarray(t, dtype=float)
    rad = 1.0 + np.exp(-t)
    return np.stack([rad * np.cos(t), rad * np.sin(t), np.exp(-t / 2)], axis=-1)


@lru_cache(maxsize=2)
def build_spiral_cylinder(n_samples: int = 1_000_000, t_max: float = 6.0,
                          circle_samples: int = 4096):
    """Return ``(A, B)``: a densely sampled 3-D spiral plus its limit circle, and the cylinder.

    Samples are uniform in ``exp(2 t)`` so that their spacing in ``t`` shrinks
    like ``exp(-2 t)``, the same rate as the alternating-projection step along
    the spiral.
    """
    u = np.linspace(1.0, math.exp(2 * t_max), int(n_samples))
    t = 0.5 * np.log(u)
    A = FiniteSet(np.vstack([spiral3d_point(t), circle_sample(circle_samples, dim=3)]))
    return A, Cylinder(1.0)
