"""Empirical separability, Hölder-regularity, point-estimate and rate diagnostics.

All functions take finished :class:`~projkit.engine.Trace` objects or set
pairs and never modify them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats
from scipy.stats import qmc

from .engine import MAX_ITER, STALLED, Trace
from .errors import (
    DegenerateAngleError,
    DomainError,
    EmptyEstimateError,
    HypothesisViolation,
    InsufficientSamplingError,
    LinearRegimeSignal,
    StructuralError,
    UnfittableError,
    WindowError,
)
from .geometry import BuildingBlock, as_vector, cos_angle
from .sets import ProjectableSet

__all__ = [
    "DEFAULT_OMEGA_GRID",
    "SeparabilityEstimate",
    "HolderParams",
    "HolderViolation",
    "HolderReport",
    "PointCheckReport",
    "RateFit",
    "angle_quotient",
    "angle_quotients",
    "estimate_separability",
    "holder_probe",
    "three_point_ell",
    "three_point_check",
    "four_point_check",
    "fit_rate",
    "predicted_rate",
    "loja_to_omega",
    "loja_constant",
    "omega_to_loja",
]

DEFAULT_OMEGA_GRID = (0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75)


# -- separability ---------------------------------------------------------------

def angle_quotient(block: BuildingBlock, omega: float) -> float:
    """``(1 - cos alpha) / |a_plus - b_plus|^omega`` for one building block.

    Returns ``inf`` when ``a_plus == b_plus`` and ``omega > 0`` (the angle
    condition says nothing there).  Raises :class:`DegenerateAngleError` for
    any other block whose angle at ``a_plus`` is undefined, so callers can
    skip it.
    """
    if not 0.0 <= omega:
        raise DomainError("omega must be nonnegative")
    gap = block.gap
    if gap == 0.0 and omega > 0:
        return math.inf
    if block.alpha_degenerate:
        raise DegenerateAngleError("block has a zero difference vector at a_plus")
    return block.vers_alpha / gap ** omega


def angle_quotients(blocks: Sequence[BuildingBlock], omega: float) -> np.ndarray:
    """Quotients of all admissible blocks (degenerate and infinite ones dropped)."""
    out = []
    for bl in blocks:
        try:
            q = angle_quotient(bl, omega)
        except DegenerateAngleError:
            continue
        if math.isfinite(q):
            out.append(q)
    return np.array(out)


@dataclass(frozen=True)
class SeparabilityEstimate:
    omega: float
    gamma_hat: float
    blocks_used: int
    degenerate_skipped: int


def estimate_separability(trace: Trace, omega_grid: Sequence[float] = DEFAULT_OMEGA_GRID,
                          window: slice | None = None) -> list[SeparabilityEstimate]:
    """Smallest angle quotient over the trace's blocks, for every omega in the grid.

    `window` restricts the blocks considered (e.g. ``slice(-1000, None)`` for
    the late trace).  Blocks with an undefined angle, and blocks with
    ``a_plus == b_plus`` when omega > 0, do not count.
    """
    blocks = trace.blocks if window is None else trace.blocks[window]
    out = []
    for om in omega_grid:
        if not 0.0 <= om < 2.0:
            raise DomainError(f"omega {om} outside [0, 2)")
        used, skipped, best = 0, 0, math.inf
        for bl in blocks:
            try:
                q = angle_quotient(bl, om)
            except DegenerateAngleError:
                skipped += 1
                continue
            if not math.isfinite(q):
                skipped += 1
                continue
            used += 1
            best = min(best, q)
        if used == 0:
            raise EmptyEstimateError(f"no admissible building block for omega={om}")
        out.append(SeparabilityEstimate(float(om), best, used, skipped))
    return out


# -- Hölder regularity probe -----------------------------------------------------------

@dataclass(frozen=True)
class HolderParams:
    """Exponent `sigma`, constant `c` and sampling controls for :func:`holder_probe`."""

    sigma: float
    c: float
    neighborhood_radius: float = 0.1
    sample_count: int = 256
    ray_points: int = 32
    membership_tol: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.sigma < 1.0:
            raise DomainError("sigma must lie in [0, 1)")
        if not self.c > 0:
            raise DomainError("c must be positive")
        if self.neighborhood_radius <= 0 or self.sample_count < 1 or self.ray_points < 1:
            raise DomainError("radius and sample counts must be positive")


@dataclass(frozen=True)
class HolderViolation:
    a_plus: tuple
    b_plus: tuple
    b: tuple
    r: float
    cos_beta: float
    threshold: float


@dataclass(frozen=True)
class HolderReport:
    sigma: float
    c: float
    violations: list
    a_samples: int
    candidates_checked: int
    membership_tol_rule: str
    note: str = ("preimage membership b in P_A^-1(a+) is tested numerically as "
                 "|P_A(b) - a+| <= membership_tol")

    @property
    def ok(self) -> bool:
        return not self.violations


def _ball_samples(center: np.ndarray, radius: float, n: int, seed) -> np.ndarray:
    d = center.size
    sob = qmc.Sobol(d, scramble=True, seed=seed)
    m = max(1, int(math.ceil(math.log2(max(2 * n, 2)))))
    pts = sob.random_base2(m) * 2.0 - 1.0
    pts = pts[(pts ** 2).sum(axis=1) <= 1.0][:n]
    return center + radius * pts


def holder_probe(A: ProjectableSet, B: ProjectableSet, x_star, params: HolderParams,
                 seed: int | None = 0, intersection_tol: float = 1e-10) -> HolderReport:
    """Search for points of B that violate the Hölder emptiness condition.

    Points ``a+`` of A near `x_star` are obtained by projecting quasi-random
    samples of the ball ``B(x_star, radius)`` onto A.  For each one,
    ``b+ = P_B(a+)`` and ``r = |a+ - b+|``; candidate points ``b`` of B in
    ``B(a+, (1 + c) r)`` are gathered from (i) the listed points of B if B is
    finite, (ii) the proximal-normal ray from ``a+`` through the sample that
    produced it and (iii) projections onto B of further ball samples.  A
    candidate whose projection onto A returns to ``a+`` and whose angle
    ``beta`` at ``b+`` has ``cos beta > sqrt(c) r^sigma`` is a violation.
    """
    x_star = as_vector(x_star, A.dim)
    if A.distance(x_star) > intersection_tol or B.distance(x_star) > intersection_tol:
        raise DomainError("x_star is not in the intersection of A and B")
    R = params.neighborhood_radius
    samples = _ball_samples(x_star, R, params.sample_count, seed)
    normals: dict[tuple, list] = {}
    for s in samples:
        a = A.project(s)
        if np.linalg.norm(a - x_star) > R:
            continue
        key = tuple(a)
        normals.setdefault(key, [])
        if np.any(s != a):
            normals[key].append((s - a) / np.linalg.norm(s - a))
    if not normals:
        raise InsufficientSamplingError("no point of A found in the neighbourhood")

    rng_seed = None if seed is None else seed + 1
    thr_c = math.sqrt(params.c)
    violations, checked, informative = [], 0, 0
    for k, (key, dirs) in enumerate(normals.items()):
        a = np.array(key)
        b_plus = B.project(a)
        r = float(np.linalg.norm(a - b_plus))
        if r == 0.0 or np.linalg.norm(b_plus - x_star) > R:
            continue
        informative += 1
        rad = (1.0 + params.c) * r
        tol = params.membership_tol if params.membership_tol is not None else 1e-8 * (1.0 + np.linalg.norm(a))
        cands = []
        if hasattr(B, "within"):
            cands.extend(B.within(a, rad))
        ts = rad * np.arange(1, params.ray_points + 1) / params.ray_points
        for d in dirs[:4]:
            cands.extend(a + t * d for t in ts)
        extra = _ball_samples(a, rad, params.ray_points,
                              None if rng_seed is None else rng_seed + k)
        cands.extend(B.project(p) for p in extra)
        threshold = thr_c * r ** params.sigma
        seen = set()
        for b in cands:
            b = np.asarray(b, dtype=float)
            kb = tuple(b)
            if kb in seen:
                continue
            seen.add(kb)
            if np.linalg.norm(b - a) > rad or not np.any(b != b_plus):
                continue
            if B.distance(b) > 1e-10 * (1.0 + np.linalg.norm(b)):
                continue
            if np.linalg.norm(A.project(b) - a) > tol:
                continue
            checked += 1
            cb = cos_angle(a - b_plus, b - b_plus)
            if cb > threshold:
                violations.append(HolderViolation(tuple(a), tuple(b_plus), kb, r, cb, threshold))
    if informative == 0:
        raise InsufficientSamplingError("every sampled point of A near x_star already lies in B")
    return HolderReport(params.sigma, params.c, violations, len(normals), checked,
                        "1e-8 * (1 + |a+|)" if params.membership_tol is None
                        else repr(params.membership_tol))


# -- three- and four-point estimates --------------------------------------------------

@dataclass(frozen=True)
class PointCheckReport:
    ell: float
    violations: list   # indices of offending blocks / quadruples
    checked: int
    max_excess: float  # largest (lhs - rhs) / rhs seen, negative when all hold

    @property
    def ok(self) -> bool:
        return not self.violations


def three_point_ell(gamma: float, c: float) -> float:
    """``min(1/2, 1 - sqrt(2 c / gamma), c / (2 + c))``; requires ``0 < c < gamma / 2``."""
    if not gamma > 0 or not c > 0:
        raise HypothesisViolation("gamma and c must be positive")
    if not c < gamma / 2:
        raise HypothesisViolation(f"need c < gamma/2, got c={c}, gamma={gamma}")
    return min(0.5, 1.0 - math.sqrt(2.0 * c / gamma), c / (2.0 + c))


def _excess(lhs: float, rhs: float) -> float:
    scale = max(abs(lhs), abs(rhs))
    return 0.0 if scale == 0.0 else (lhs - rhs) / scale


def three_point_check(trace: Trace, gamma: float, c: float, ell: float | None = None,
                      slack: float = 1e-12) -> PointCheckReport:
    """Check ``|a+ - b+|^2 + ell |b - b+|^2 <= |a+ - b|^2`` on every block.

    ``ell`` defaults to :func:`three_point_ell` ``(gamma, c)``; passing it
    explicitly skips the hypothesis check on `c`.  Relative excess above
    `slack` counts as a violation.
    """
    if ell is None:
        ell = three_point_ell(gamma, c)
    bad, worst = [], -math.inf
    for i, bl in enumerate(trace.blocks):
        lhs = float(np.sum((bl.a_plus - bl.b_plus) ** 2) + ell * np.sum((bl.b - bl.b_plus) ** 2))
        rhs = float(np.sum((bl.a_plus - bl.b) ** 2))
        e = _excess(lhs, rhs)
        worst = max(worst, e)
        if e > slack:
            bad.append(i)
    return PointCheckReport(ell, bad, len(trace.blocks), worst)


def four_point_check(trace: Trace, ell: float, slack: float = 1e-12) -> PointCheckReport:
    """Check ``d_B(a+)^2 + ell |b - b+|^2 <= d_B(a)^2`` along ``a -> b -> a+ -> b+``."""
    if not 0.0 < ell < 1.0:
        raise DomainError("ell must lie in (0, 1)")
    off = trace.a_offset
    gaps, steps = trace.gaps, trace.steps
    bad, worst, n = [], -math.inf, 0
    for i in range(len(gaps) - 1):
        k = i + off  # gaps[i] = |a_k - b_k|
        lhs = gaps[i + 1] ** 2 + ell * steps[k] ** 2
        rhs = gaps[i] ** 2
        e = _excess(lhs, rhs)
        worst = max(worst, e)
        n += 1
        if e > slack:
            bad.append(k)
    return PointCheckReport(ell, bad, n, worst)


# -- rates ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateFit:
    """Least-squares rate fit.

    ``value`` is the decay exponent ``rho_hat`` for ``kind="power"`` and the
    per-index contraction ``q_factor`` for ``kind="linear"``.
    """

    kind: str
    value: float
    r_squared: float
    window: tuple
    per: str = "projection"
    limit_source: str = "final iterate"
    extra: dict = field(default_factory=dict)

    @property
    def rho_hat(self) -> float:
        if self.kind != "power":
            raise AttributeError("rho_hat is only defined for power fits")
        return self.value

    @property
    def q_factor(self) -> float:
        if self.kind != "linear":
            raise AttributeError("q_factor is only defined for linear fits")
        return self.value


def fit_rate(trace: Trace, kind: str, limit=None, per: str = "projection",
             tail_fraction: float = 0.1, min_points: int = 50) -> RateFit:
    """Fit ``|x_k - x*| ~ k^-rho`` (``kind="power"``) or ``~ q^k`` (``"linear"``).

    Parameters
    ----------
    trace : Trace
    kind : {"power", "linear"}
    limit : array_like, optional
        Known limit ``x*``.  Defaults to the final iterate, in which case the
        fit is biased near the end of the run; the last `tail_fraction` of the
        sequence is always left out.  Stalled runs cannot be fitted, and runs
        stopped by ``max_iter`` only against a given limit.
    per : {"projection", "step"}
        ``"projection"`` indexes the full orbit ``b_0, a_1, b_1, ...`` so one
        index is one projection; ``"step"`` uses the B-iterates only.
    min_points : int
        Minimum number of positive distances in the fitting window.
    """
    if kind not in ("power", "linear"):
        raise StructuralError(f"unknown rate kind {kind!r}")
    if per not in ("projection", "step"):
        raise StructuralError(f"unknown indexing {per!r}")
    if trace.status == STALLED:
        raise UnfittableError("stalled run has no limit to fit against")
    if trace.status == MAX_ITER and limit is None:
        raise UnfittableError("run hit max_iter; pass the known limit to fit it")
    seq = trace.orbit if per == "projection" else np.array(trace.b_iters)
    if limit is None:
        ref, source = seq[-1], "final iterate"
    else:
        ref, source = as_vector(limit, seq.shape[1]), "given"
    n = len(seq)
    stop = n - int(math.ceil(tail_fraction * n))
    err = np.linalg.norm(seq[:stop] - ref, axis=1)
    k = np.arange(1, stop + 1, dtype=float)
    keep = err > 0
    if keep.sum() < min_points:
        raise WindowError(f"only {int(keep.sum())} usable points, need {min_points}")
    k, y = k[keep], np.log(err[keep])
    if kind == "power":
        res = stats.linregress(np.log(k), y)
        value = -res.slope
    else:
        res = stats.linregress(k, y)
        value = math.exp(res.slope)
    r2 = min(1.0, max(0.0, res.rvalue ** 2))
    return RateFit(kind, float(value), float(r2), (0, stop), per, source)


def predicted_rate(omega: float) -> float:
    """Power rate ``(2 - omega) / (2 omega)`` for omega in (0, 2)."""
    if omega == 0:
        raise LinearRegimeSignal("omega = 0 gives linear convergence, not a power rate")
    if not 0.0 < omega < 2.0:
        raise DomainError("omega must lie in (0, 2)")
    return (2.0 - omega) / (2.0 * omega)


def loja_to_omega(theta: float) -> float:
    """Separability exponent ``4 theta - 2`` of a Łojasiewicz exponent theta in (1/2, 1)."""
    if not 0.5 < theta < 1.0:
        raise DomainError("theta must lie in (1/2, 1)")
    return 4.0 * theta - 2.0


def loja_constant(theta: float, gamma: float) -> float:
    """Companion separability constant ``2^(-2 theta - 1) gamma^2``."""
    loja_to_omega(theta)
    return 2.0 ** (-2.0 * theta - 1.0) * gamma ** 2


def omega_to_loja(omega: float) -> float:
    """Inverse map ``theta = (omega + 2) / 4``."""
    if not 0.0 < omega < 2.0:
        raise DomainError("omega must lie in (0, 2)")
    return (omega + 2.0) / 4.0
