"""Acceptance suite: one test per criterion, tolerances pinned as stated.

Criteria whose clauses cannot all be met are still checked in full; the
failure message lists the clauses that failed and the measured values.
"""
import math
import time

import numpy as np
import pytest

from oracles import dft_slow, epigraph_brute, flat_quotient_bound, parabola_orbit
from projkit.diagnostics import (
    HolderParams,
    estimate_separability,
    fit_rate,
    four_point_check,
    holder_probe,
    loja_to_omega,
    omega_to_loja,
    predicted_rate,
    three_point_check,
    three_point_ell,
)
from projkit.engine import STALLED, StopRule, averaged_projections, gerchberg_saxton
from projkit.fourier import FourierMagnitudeSet, SupportSet, dft, to_real
from projkit.gallery import EPIGRAPH_FUNCTIONS, example, run_gallery, unwrapped_winding
from projkit.sets import (
    AffineSubspace,
    DiagonalSet,
    EpigraphSet,
    FiniteSet,
    FullSpace,
    HalfSpace,
    ProductSet,
    Sector,
)
from projkit.spirals import Cylinder, DiscreteSpiralSpec, build_continuous_spiral_pair, build_discrete_spiral

N_QUERIES = 1000


@pytest.fixture(scope="module")
def gallery():
    t0 = time.perf_counter()
    runs = {r.verdict.name: r for r in run_gallery("all")}
    return runs, time.perf_counter() - t0


def _clauses(failures):
    assert not failures, "failed clauses:\n  " + "\n  ".join(failures)


# -- 1 ---------------------------------------------------------------------------------------

def _square_v(t):
    return t * t


def _flat_v(t):
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(np.abs(t) < 0.02, 0.0, np.exp(-1.0 / (t * t)))


def _catalog(rng):
    """(name, set, query sampler, member sampler) for every set family."""
    sq = EPIGRAPH_FUNCTIONS["square"]
    fl = EPIGRAPH_FUNCTIONS["flat_exp"]
    spiral_a, _ = build_discrete_spiral(DiscreteSpiralSpec(ray_angle=0.5))
    circle_a, _ = build_continuous_spiral_pair(n_points=2001)
    pts = rng.normal(size=(3000, 3))
    n_vec = rng.normal(size=3)
    line_dir = rng.normal(size=(1, 3))
    mask = np.array([True, False, True, True, False, False])
    amp = rng.uniform(0.2, 2.0, 6)

    def ball(d, s=3.0):
        return lambda n: rng.normal(size=(n, d)) * s

    def graph(f, lo, hi):
        def members(n):
            t = rng.uniform(lo, hi, n)
            return np.stack([t, np.vectorize(f)(t) + rng.exponential(0.5, n) * (rng.uniform(size=n) < 0.5)], 1)
        return members

    def sector_members(lo, hi, cap):
        def members(n):
            a = lo + rng.uniform(0, 1, n) * ((hi - lo) % (2 * math.pi))
            r = rng.uniform(0, cap, n)
            return np.stack([r * np.cos(a), r * np.sin(a)], 1)
        return members

    def sample_rows(P):
        return lambda n: P[rng.integers(0, len(P), n)]

    def diag_members(n):
        return np.tile(rng.normal(size=(n, 2)), 3)

    def mag_members(n):
        ph = np.exp(2j * math.pi * rng.uniform(size=(n, 6)))
        return np.array([to_real(np.fft.fft(amp * p, norm="ortho")) for p in ph])

    def cyl_members(n):
        a = rng.uniform(0, 2 * math.pi, n)
        return np.stack([np.cos(a), np.sin(a), rng.uniform(0, 1, n)], 1)

    packman_a = (-math.atan(0.5), math.atan(0.5), 1.0)
    packman_b = (math.pi / 4, 7 * math.pi / 4, 1.0)
    return [
        ("full_space", FullSpace(3), ball(3), ball(3)),
        ("halfspace", HalfSpace(n_vec, 0.3), ball(3),
         lambda n: (lambda y: y - np.maximum(0, (y @ n_vec - 0.3) / (n_vec @ n_vec))[:, None] * n_vec)(ball(3)(n))),
        ("affine_line", AffineSubspace([1.0, 0.0, -1.0], line_dir), ball(3),
         lambda n: np.array([1.0, 0.0, -1.0]) + rng.normal(size=(n, 1)) * line_dir),
        ("epigraph_square", EpigraphSet(*sq[:2], -3.0, 3.0, d2f=sq[2]), ball(2, 2.0), graph(sq[0], -3, 3)),
        ("epigraph_flat", EpigraphSet(*fl[:2], -0.8, 0.8, d2f=fl[2]), ball(2, 0.5), graph(fl[0], -0.8, 0.8)),
        ("sector_cone", Sector(*packman_a), ball(2, 1.0), sector_members(*packman_a)),
        ("sector_mouth", Sector(*packman_b), ball(2, 1.0), sector_members(*packman_b)),
        ("finite_kdtree", FiniteSet(pts), ball(3), sample_rows(pts)),
        ("finite_small", FiniteSet(pts[:40]), ball(3), sample_rows(pts[:40])),
        ("discrete_spiral", spiral_a, ball(2, 0.5), sample_rows(spiral_a.points)),
        ("spiral_circle", circle_a, ball(2, 1.5), sample_rows(circle_a.points)),
        ("product", ProductSet([HalfSpace([1.0], 0.0), Sector(*packman_a)]), ball(3),
         lambda n: np.hstack([-rng.exponential(size=(n, 1)), sector_members(*packman_a)(n)])),
        ("diagonal", DiagonalSet(3, 2), ball(6), diag_members),
        ("fourier_magnitude", FourierMagnitudeSet(amp), ball(12), mag_members),
        ("support", SupportSet(mask), ball(12),
         lambda n: ball(12)(n) * np.repeat(mask, 2)),
        ("cylinder", Cylinder(1.0), ball(3), cyl_members),
    ]


def test_criterion_01_projection_correctness():
    rng = np.random.default_rng(20240501)
    t0 = time.perf_counter()
    failures = []
    for name, S, queries, members in _catalog(rng):
        X = queries(N_QUERIES)
        P = np.array([S.project(x) for x in X])
        scale = 1.0 + np.linalg.norm(X, axis=1)
        idem = max(np.linalg.norm(S.project(p) - p) / s for p, s in zip(P, scale))
        # distance consistency: no other member of the set is closer than P(x)
        M = np.vstack([P, members(N_QUERIES)])
        dP = np.linalg.norm(X - P, axis=1)
        dmin = np.sqrt(((X[:, None, :] - M[None, :, :]) ** 2).sum(-1)).min(axis=1)
        dist = np.max((dP - dmin) / scale)
        M2 = members(N_QUERIES)
        fix = max(np.linalg.norm(S.project(m) - m) / (1 + np.linalg.norm(m)) for m in M2)
        for label, v in (("idempotence", idem), ("distance", dist), ("member fixity", fix)):
            if v > 1e-12:
                failures.append(f"{name}: {label} error {v:.3g}")
    proj_time = time.perf_counter() - t0
    if proj_time >= 10.0:
        failures.append(f"projection checks took {proj_time:.1f} s")

    for f, fv, lo, hi, s in ((EPIGRAPH_FUNCTIONS["square"], _square_v, -3.0, 3.0, 2.0),
                            (EPIGRAPH_FUNCTIONS["flat_exp"], _flat_v, -0.8, 0.8, 0.5)):
        E = EpigraphSet(f[0], f[1], lo, hi, d2f=f[2])
        X = rng.normal(size=(N_QUERIES, 2)) * s
        err = max(np.linalg.norm(E.project(x) - epigraph_brute(f[0], lo, hi, x, fv=fv)) for x in X)
        if err > 1e-6:
            failures.append(f"epigraph on [{lo}, {hi}]: brute-force mismatch {err:.3g}")
    _clauses(failures)


# -- 2 ---------------------------------------------------------------------------------------

def test_criterion_02_gap_monotonicity(gallery):
    runs, elapsed = gallery
    failures = []
    for name, run in runs.items():
        g = run.trace.gaps
        excess = (g[1:] - g[:-1]) / np.maximum(g[:-1], np.finfo(float).tiny)
        if g.size > 1 and excess.max() > 1e-12:
            failures.append(f"{name}: gap increases by relative {excess.max():.3g}")
    if elapsed >= 30.0:
        failures.append(f"full gallery took {elapsed:.1f} s")
    _clauses(failures)


# -- 3 ---------------------------------------------------------------------------------------

def test_criterion_03_geometric_pair(gallery):
    tr = gallery[0]["geometric_pair"].trace
    orbit = tr.orbit[:, 0]
    assert np.array_equal(orbit, 2.0 ** -np.arange(orbit.size))
    fit = fit_rate(tr, "linear")
    assert abs(fit.q_factor - 0.5) <= 0.01


# -- 4 ---------------------------------------------------------------------------------------

def test_criterion_04_discrete_spiral(gallery):
    tr = gallery[0]["discrete_spiral_8"].trace
    failures = []
    a4 = tr.a_iters[4 - tr.a_offset]
    if np.linalg.norm(a4 - [1 / 16, 0.0]) > 1e-12:
        failures.append(f"a_4 = {a4}")
    r = np.linalg.norm(tr.orbit, axis=1)
    ratio = r[1:] / r[:-1]
    if np.max(np.abs(ratio - math.sqrt(2) / 2)) > 1e-12:
        failures.append(f"norm factor off by {np.max(np.abs(ratio - math.sqrt(2) / 2)):.3g}")
    if tr.status != "converged" or np.linalg.norm(tr.limit) > 1e-12:
        failures.append(f"limit {tr.limit} ({tr.status})")
    g = estimate_separability(tr, [0.0])[0].gamma_hat
    if abs(g - (1 + math.sqrt(2) / 2)) > 1e-12:
        failures.append(f"gamma_hat = {g!r}")
    _clauses(failures)


# -- 5 ---------------------------------------------------------------------------------------

def test_criterion_05_packman(gallery):
    tr = gallery[0]["packman"].trace
    failures = []
    if tr.status != "converged" or np.linalg.norm(tr.limit) > 1e-10:
        failures.append(f"limit {tr.limit} ({tr.status})")
    A, B = example("packman").build()
    for sigma in (0.0, 0.5, 0.9):
        rep = holder_probe(A, B, [0.0, 0.0], HolderParams(sigma, 0.5, neighborhood_radius=0.3))
        if rep.violations:
            failures.append(f"sigma={sigma}: {len(rep.violations)} violations")
    q = fit_rate(tr, "linear").q_factor
    if not q < 1:
        failures.append(f"q_factor = {q}")
    _clauses(failures)


# -- 6 ---------------------------------------------------------------------------------------

def test_criterion_06_spiral_circle(gallery):
    tr = gallery[0]["spiral_circle"].trace
    failures = []
    if tr.status != STALLED:
        failures.append(f"status {tr.status}")
    below = np.flatnonzero(tr.gaps < 1e-3)
    gain = unwrapped_winding(np.array(tr.b_iters[below[0] + tr.a_offset:])) if below.size else 0.0
    if not gain > 4 * math.pi:
        failures.append(f"angle gained while gap < 1e-3 is {gain:.4f} rad, need > 4 pi = {4 * math.pi:.4f}")
    A, B = example("spiral_circle").build()
    rep = holder_probe(A, B, [1.0, 0.0], HolderParams(0.0, 0.1, neighborhood_radius=0.05))
    if len(rep.violations) < 1:
        failures.append("holder probe found no violation")
    _clauses(failures)


# -- 7 ---------------------------------------------------------------------------------------

def test_criterion_07_flat_tangent(gallery):
    tr = gallery[0]["flat_tangent"].trace
    n_late = len(tr.blocks) // 10
    late = tr.blocks[-n_late:]
    failures = []
    est = estimate_separability(tr, (0.0, 0.5, 1.0, 1.5), window=slice(-n_late, None))
    for e in est:
        if not e.gamma_hat < 1e-6:
            failures.append(f"omega={e.omega}: late-window gamma_hat = {e.gamma_hat:.3g}, need < 1e-6")
    for om in (0.0, 0.5, 1.0, 1.5):
        worst = max(bl.vers_alpha / bl.gap ** om / flat_quotient_bound(bl.a_plus[0], om) for bl in late)
        if worst > 2.0:
            failures.append(f"omega={om}: quotient / formula bound = {worst:.3g} > 2")
    usable = [bl for bl in tr.blocks if not bl.alpha_degenerate and bl.gap > 0]
    inf2 = min(bl.vers_alpha / bl.gap ** 2 for bl in usable)
    if not inf2 > 0:
        failures.append(f"omega=2 infimum is {inf2}")
    _clauses(failures)


# -- 8 ---------------------------------------------------------------------------------------

def test_criterion_08_parabola(gallery):
    tr = gallery[0]["parabola_tangent"].trace
    assert tr.n_steps == 10_000
    fit = fit_rate(tr, "power", limit=[0.0, 0.0])
    assert 0.4 <= fit.rho_hat <= 0.6 and fit.r_squared >= 0.99
    xs = parabola_orbit(0.5, tr.n_steps)
    bx = np.array([b[0] for b in tr.b_iters])
    assert np.max(np.abs(bx - xs)) <= 1e-8
    assert predicted_rate(1.0) == 0.5


# -- 9 ---------------------------------------------------------------------------------------

def test_criterion_09_rate_formulas():
    assert predicted_rate(1.0) == 0.5
    assert abs(predicted_rate(2 / 3) - 1.0) <= 1e-15
    assert loja_to_omega(0.75) == 1.0
    thetas = np.linspace(0.5, 1.0, 1001)[1:-1]
    assert max(abs(omega_to_loja(loja_to_omega(t)) - t) for t in thetas) <= 1e-15


# -- 10 --------------------------------------------------------------------------------------

def test_criterion_10_gerchberg_saxton():
    rng = np.random.default_rng(10)
    failures = []
    for n in (1, 2, 5, 8, 16, 33, 64):
        z = rng.normal(size=n) + 1j * rng.normal(size=n)
        if np.max(np.abs(dft(z) - dft_slow(z))) > 1e-12:
            failures.append(f"N={n}: DFT differs from explicit sum")
        if abs(np.linalg.norm(dft(z)) - np.linalg.norm(z)) > 1e-12:
            failures.append(f"N={n}: DFT not norm preserving")
        a = rng.uniform(0, 2, n)
        p = FourierMagnitudeSet(a).project(rng.normal(size=2 * n))
        if FourierMagnitudeSet(a).residual(p) > 1e-10:
            failures.append(f"N={n}: magnitude projection off the amplitude")

    rng = np.random.default_rng(7)
    mask = np.zeros(8, bool)
    mask[:3] = True
    z = np.zeros(8, complex)
    z[:3] = rng.normal(size=3) + 1j * rng.normal(size=3)
    x, amp = to_real(z), np.abs(dft(z))
    fixed = gerchberg_saxton(amp, SupportSet(mask), x, StopRule(max_iter=50))
    if fixed.extras["residuals"].max() > 1e-12:
        failures.append("solution is not a fixed point")
    x0 = x + 0.05 * rng.normal(size=x.size)
    rec = gerchberg_saxton(amp, SupportSet(mask), x0, StopRule(max_iter=500))
    if not rec.extras["residuals"][-1] < 1e-8:
        failures.append(f"recovery residual {rec.extras['residuals'][-1]:.3g}")
    _clauses(failures)


# -- 11 --------------------------------------------------------------------------------------

def _convex_instance(rng, m, d=3):
    sets = []
    for i in range(m):
        if i % 2:
            sets.append(AffineSubspace(rng.normal(size=d), rng.normal(size=(1, d))))
        else:
            sets.append(HalfSpace(rng.normal(size=d), rng.normal()))
    return sets


def test_criterion_11_averaged_projections():
    rng = np.random.default_rng(11)
    worst = 0.0
    for trial in range(20):
        for m in (2, 3):
            sets = _convex_instance(rng, m)
            x0 = rng.normal(size=3) * 2
            tr = averaged_projections(sets, x0, StopRule(max_iter=200))
            base = tr.extras["base_iters"]
            for k in range(len(base) - 1):
                direct = np.stack([S.project(base[k]) for S in sets]).sum(axis=0) / m
                worst = max(worst, float(np.max(np.abs(base[k + 1] - direct))))
    assert worst <= 1e-15


# -- 12 --------------------------------------------------------------------------------------

def test_criterion_12_point_estimates(gallery):
    failures = []
    for name in ("packman", "geometric_pair"):
        tr = gallery[0][name].trace
        g = estimate_separability(tr, [0.0])[0].gamma_hat
        ell = three_point_ell(g, g / 4)
        r3 = three_point_check(tr, g, g / 4)
        r4 = four_point_check(tr, ell)
        if r3.violations or r4.violations:
            failures.append(f"{name}: {len(r3.violations)} three-point and {len(r4.violations)} four-point violations")
    _clauses(failures)
