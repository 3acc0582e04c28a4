"""Alternating-projection drivers that record complete traces."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import NumericError, StructuralError
from .fourier import FourierMagnitudeSet
from .geometry import BuildingBlock, _angle_pair, as_vector
from .sets import DiagonalSet, ProductSet, ProjectableSet

__all__ = [
    "StopRule",
    "Trace",
    "CONVERGED",
    "MAX_ITER",
    "STALLED",
    "alternate",
    "averaged_projections",
    "gerchberg_saxton",
]

CONVERGED = "converged"
MAX_ITER = "max_iter"
STALLED = "stalled_nonconvergent"


@dataclass(frozen=True)
class StopRule:
    """Stopping thresholds for a run.

    The run is *converged* once ``gap < gap_tol`` and ``step < step_tol``.  It
    is *stalled* when the gap stays below ``gap_tol`` while the step stays at
    or above ``step_tol`` for ``stall_window`` consecutive iterations.
    """

    gap_tol: float = 1e-12
    step_tol: float = 1e-12
    max_iter: int = 100_000
    stall_window: int = 500

    def __post_init__(self):
        if not (self.gap_tol > 0 and self.step_tol > 0 and self.max_iter > 0 and self.stall_window > 0):
            raise StructuralError("all stop-rule parameters must be strictly positive")


def _block(b, a_plus, b_plus) -> BuildingBlock:
    ca, va, da = _angle_pair(b - a_plus, b_plus - a_plus)
    cb, vb, db = _angle_pair(a_plus - b_plus, b - b_plus)
    return BuildingBlock(b, a_plus, b_plus, ca, cb, va, vb, da, db)


@dataclass(frozen=True)
class Trace:
    """Record of an alternating-projection run.

    ``b_iters[k]`` is ``b_k``.  ``a_iters[i]`` is ``a_{i + a_offset}``, where
    ``a_offset`` is 0 when the start point already lies in A (it then serves
    as ``a_0``) and 1 otherwise.  ``gaps[i] = |a_iters[i] - b_{i + a_offset}|``,
    ``steps[k] = |b_k - b_{k+1}|`` and ``blocks[k]`` is ``b_k -> a_{k+1} -> b_{k+1}``.
    """

    a_iters: tuple
    b_iters: tuple
    gaps: np.ndarray
    steps: np.ndarray
    blocks: tuple
    status: str
    a_offset: int = 1
    extras: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "extras", MappingProxyType(dict(self.extras)))
        for name in ("gaps", "steps"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n_steps(self) -> int:
        return len(self.b_iters) - 1

    @property
    def orbit(self) -> np.ndarray:
        """All projections in order: ``(a_0,) b_0, a_1, b_1, ...``."""
        out = []
        if self.a_offset == 0:
            out.append(self.a_iters[0])
        a = self.a_iters[1 - self.a_offset:]
        out.append(self.b_iters[0])
        for ak, bk in zip(a, self.b_iters[1:]):
            out.append(ak)
            out.append(bk)
        return np.array(out)

    @property
    def orbit_gaps(self) -> np.ndarray:
        """Distances between consecutive projections along :attr:`orbit`."""
        o = self.orbit
        return np.linalg.norm(np.diff(o, axis=0), axis=1)

    @property
    def limit(self) -> np.ndarray:
        return self.b_iters[-1]


def alternate(A: ProjectableSet, B: ProjectableSet, x0, rule: StopRule = StopRule(),
              member_tol: float = 1e-12) -> Trace:
    """Alternating projections ``a_{k+1} = P_A(b_k)``, ``b_{k+1} = P_B(a_{k+1})``.

    The run starts from ``b_0 = P_B(x0)``.  If `x0` lies in A (within
    ``member_tol * |x0|``, so the test scales with the point) it is
    recorded as ``a_0``.
    """
    if A.dim != B.dim:
        raise StructuralError(f"set dimensions differ: {A.dim} vs {B.dim}")
    x0 = as_vector(x0, A.dim)

    def proj(S, x, label):
        try:
            return S.project(x)
        except NumericError as exc:
            raise NumericError(f"non-finite {label}-iterate: {exc}") from None

    a_iters, gaps = [], []
    b = proj(B, x0, "b")
    b_iters = [b]
    a_offset = 1
    if A.distance(x0) <= member_tol * float(np.linalg.norm(x0)):
        a_iters.append(x0)
        gaps.append(float(np.linalg.norm(x0 - b)))
        a_offset = 0
    steps, blocks = [], []
    status = MAX_ITER
    stall = 0
    for _ in range(rule.max_iter):
        a = proj(A, b, "a")
        b_next = proj(B, a, "b")
        gap = math.sqrt(float(np.dot(a - b_next, a - b_next)))
        step = math.sqrt(float(np.dot(b - b_next, b - b_next)))
        a_iters.append(a)
        b_iters.append(b_next)
        gaps.append(gap)
        steps.append(step)
        blocks.append(_block(b, a, b_next))
        b = b_next
        if gap < rule.gap_tol:
            if step < rule.step_tol:
                status = CONVERGED
                break
            stall += 1
            if stall >= rule.stall_window:
                status = STALLED
                break
        else:
            stall = 0
    return Trace(tuple(a_iters), tuple(b_iters), gaps, steps, tuple(blocks), status, a_offset)


def averaged_projections(sets: Sequence[ProjectableSet], x0, rule: StopRule = StopRule()) -> Trace:
    """Averaged projections ``x_{n+1} = mean_i P_{C_i}(x_n)`` via the product space.

    Runs :func:`alternate` between ``C_1 x ... x C_m`` and the diagonal of
    ``(R^d)^m`` from the lifted start ``(x0, ..., x0)``.  The base-space
    sequence ``x_n`` (first block of ``b_n``) is stored in
    ``trace.extras["base_iters"]``.
    """
    if not sets:
        raise StructuralError("need at least one set")
    d = sets[0].dim
    if any(s.dim != d for s in sets):
        raise StructuralError("all sets must share the base dimension")
    x0 = as_vector(x0, d)
    m = len(sets)
    trace = alternate(ProductSet(sets), DiagonalSet(m, d), np.tile(x0, m), rule)
    base = np.array([b[:d] for b in trace.b_iters])
    base.flags.writeable = False
    return Trace(trace.a_iters, trace.b_iters, trace.gaps, trace.steps, trace.blocks,
                 trace.status, trace.a_offset, {"base_iters": base, "m": m, "d": d})


def gerchberg_saxton(amplitude, A: ProjectableSet, x0, rule: StopRule = StopRule()) -> Trace:
    """Gerchberg-Saxton error reduction as alternating projections.

    B is the Fourier-magnitude set of `amplitude`; A the signal-domain
    constraint (acting on interleaved vectors of length ``2 N``).  Extras:
    ``residuals`` -- ``max_w | |xhat(w)| - a(w) |`` of every A-iterate, and
    ``extinctions`` -- number of exactly vanishing Fourier coefficients met
    by the magnitude projection over the run.
    """
    B = FourierMagnitudeSet(amplitude)
    if A.dim != B.dim:
        raise StructuralError(f"constraint acts on dimension {A.dim}, amplitude needs {B.dim}")
    trace = alternate(A, B, x0, rule)
    residuals = np.array([B.residual(a) for a in trace.a_iters])
    residuals.flags.writeable = False
    inputs = [as_vector(x0)] + list(trace.a_iters[1 - trace.a_offset:])
    ext = sum(B.extinctions(x) for x in inputs)
    return Trace(trace.a_iters, trace.b_iters, trace.gaps, trace.steps, trace.blocks,
                 trace.status, trace.a_offset,
                 {"residuals": residuals, "extinctions": ext, "amplitude": B.amplitude})
