"""Vectors, angles and the building-block abstraction.

Points are plain one-dimensional ``float64`` numpy arrays.  :func:`as_vector`
normalises any array-like into that form, rejects non-finite entries and
marks the result read-only so that traces can share iterates safely.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateAngleError, NumericError, StructuralError

__all__ = [
    "as_vector",
    "cos_angle",
    "versine",
    "BuildingBlock",
    "make_block",
]


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Return `x` as an immutable, finite, one-dimensional float array.

    Scalars are promoted to 1-vectors.  If `dim` is given the length must match.
    """
    v = np.array(x, dtype=float).reshape(-1)
    if v.size == 0:
        raise StructuralError("a vector needs at least one coordinate")
    if dim is not None and v.size != dim:
        raise StructuralError(f"expected dimension {dim}, got {v.size}")
    if not np.isfinite(v).all():
        raise NumericError(f"non-finite coordinates in {v!r}")
    v.flags.writeable = False
    return v


def _unit(u: np.ndarray) -> np.ndarray | None:
    n = math.sqrt(float(np.dot(u, u)))
    if n == 0.0:
        return None
    if not math.isfinite(n):
        # overflow in the squared norm; rescale first
        s = float(np.max(np.abs(u)))
        w = u / s
        return w / math.sqrt(float(np.dot(w, w)))
    return u / n


def cos_angle(u, v) -> float:
    """Cosine of the angle between two nonzero vectors, clamped to [-1, 1]."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise StructuralError(f"shape mismatch {u.shape} vs {v.shape}")
    uu, vv = _unit(u), _unit(v)
    if uu is None or vv is None:
        raise DegenerateAngleError("angle with a zero vector is undefined")
    return min(1.0, max(-1.0, float(np.dot(uu, vv))))


def versine(u, v) -> float:
    """``1 - cos`` of the angle between `u` and `v`, accurate for tiny angles.

    Uses ``|u/|u| - v/|v||^2 / 2`` which avoids the cancellation in
    ``1 - cos_angle(u, v)`` when the angle is below ~1e-8 rad.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise StructuralError(f"shape mismatch {u.shape} vs {v.shape}")
    uu, vv = _unit(u), _unit(v)
    if uu is None or vv is None:
        raise DegenerateAngleError("angle with a zero vector is undefined")
    d = uu - vv
    return min(2.0, max(0.0, 0.5 * float(np.dot(d, d))))


@dataclass(frozen=True)
class BuildingBlock:
    """Three consecutive projections ``b -> a_plus -> b_plus``.

    ``cos_alpha`` is the cosine of the angle at ``a_plus`` between
    ``b - a_plus`` and ``b_plus - a_plus``; ``cos_beta`` the cosine at
    ``b_plus`` between ``a_plus - b_plus`` and ``b - b_plus``.  When a
    difference vector vanishes the cosine is stored as 0 and the matching
    ``*_degenerate`` flag is set.  ``vers_alpha``/``vers_beta`` hold ``1 - cos``
    computed without cancellation.
    """

    b: np.ndarray
    a_plus: np.ndarray
    b_plus: np.ndarray
    cos_alpha: float
    cos_beta: float
    vers_alpha: float
    vers_beta: float
    alpha_degenerate: bool
    beta_degenerate: bool

    @property
    def gap(self) -> float:
        """``|a_plus - b_plus|``."""
        return float(np.linalg.norm(self.a_plus - self.b_plus))

    @property
    def degenerate(self) -> bool:
        return self.alpha_degenerate or self.beta_degenerate


def _angle_pair(u: np.ndarray, v: np.ndarray) -> tuple[float, float, bool]:
    uu, vv = _unit(u), _unit(v)
    if uu is None or vv is None:
        return 0.0, 0.0, True
    c = min(1.0, max(-1.0, float(np.dot(uu, vv))))
    d = uu - vv
    return c, min(2.0, max(0.0, 0.5 * float(np.dot(d, d)))), False


def make_block(b, a_plus, b_plus) -> BuildingBlock:
    """Build the block ``b -> a_plus -> b_plus`` and cache both angles."""
    b = as_vector(b)
    a_plus = as_vector(a_plus)
    b_plus = as_vector(b_plus)
    if not (b.size == a_plus.size == b_plus.size):
        raise StructuralError(
            f"block dimensions differ: {b.size}, {a_plus.size}, {b_plus.size}"
        )
    ca, va, da = _angle_pair(b - a_plus, b_plus - a_plus)
    cb, vb, db = _angle_pair(a_plus - b_plus, b - b_plus)
    return BuildingBlock(b, a_plus, b_plus, ca, cb, va, vb, da, db)
