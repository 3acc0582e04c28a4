"""Named fixtures: set pairs, start points and their expected qualitative outcome.

Each fixture is an :class:`ExperimentSpec` whose sets are given as small JSON
descriptors (``{"type": "sector", ...}``), so every fixture can be exported,
edited and rebuilt with :func:`build_set`.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .diagnostics import RateFit, estimate_separability, fit_rate
from .engine import CONVERGED, MAX_ITER, STALLED, StopRule, Trace, alternate
from .errors import FixtureNotFound, ProjkitError, StructuralError
from .sets import (
    AffineSubspace,
    EpigraphSet,
    FiniteSet,
    FullSpace,
    HalfSpace,
    ProjectableSet,
    Sector,
)
from .spirals import (
    Cylinder,
    DiscreteSpiralSpec,
    build_continuous_spiral_pair,
    build_discrete_spiral,
    build_spiral_cylinder,
)

__all__ = [
    "Expected",
    "ExperimentSpec",
    "Verdict",
    "GalleryRun",
    "EPIGRAPH_FUNCTIONS",
    "SET_SCHEMA",
    "build_set",
    "example",
    "fixture_names",
    "register",
    "classify",
    "run_spec",
    "run_gallery",
    "unwrapped_winding",
]

LINEAR = "converges_linear"
SUBLINEAR = "converges_sublinear"
NONCONVERGENT = "non_convergent"
FINITE = "converges_finite"
UNDETERMINED = "undetermined"
OUTCOMES = (LINEAR, SUBLINEAR, NONCONVERGENT, FINITE)


# -- scalar functions for epigraph sets ------------------------------------------------

def _flat(t):
    # exp(-1/t^2) underflows to 0 below |t| ~ 0.0376 anyway
    return 0.0 if abs(t) < 0.02 else math.exp(-1.0 / (t * t))


def _flat_d1(t):
    return 0.0 if abs(t) < 0.02 else 2.0 * _flat(t) / t ** 3


def _flat_d2(t):
    return 0.0 if abs(t) < 0.02 else _flat(t) * (4.0 / t ** 6 - 6.0 / t ** 4)


EPIGRAPH_FUNCTIONS = {
    "square": (lambda t: t * t, lambda t: 2.0 * t, lambda t: 2.0),
    "flat_exp": (_flat, _flat_d1, _flat_d2),
}


# -- set descriptors -----------------------------------------------------------------

_num = {"type": "number"}
_vec = {"type": "array", "items": _num, "minItems": 1}


def _obj(type_name, props, required=()):
    return {
        "type": "object",
        "properties": {"type": {"const": type_name}, **props},
        "required": ["type", *required],
        "additionalProperties": False,
    }


_role = {"enum": ["A", "B"]}
SET_SCHEMA = {
    "oneOf": [
        _obj("full_space", {"dim": {"type": "integer", "minimum": 1}}, ["dim"]),
        _obj("halfspace", {"normal": _vec, "offset": _num}, ["normal"]),
        _obj("affine", {"point": _vec, "directions": {"type": "array", "items": _vec}},
             ["point", "directions"]),
        _obj("sector", {"theta_lo": _num, "theta_hi": _num,
                        "radius_cap": {"type": ["number", "null"]}}, ["theta_lo", "theta_hi"]),
        _obj("epigraph", {"function": {"enum": sorted(EPIGRAPH_FUNCTIONS)}, "lo": _num, "hi": _num,
                          "scan_points": {"type": "integer", "minimum": 1}}, ["function"]),
        _obj("finite", {"points": {"type": "array", "items": _vec, "minItems": 1}}, ["points"]),
        _obj("discrete_spiral", {"role": _role, "ray_angle": _num, "start_radius": _num,
                                 "start_angle": _num, "truncation_floor": _num,
                                 "parity": {"enum": ["even", "odd"]}}, ["role"]),
        _obj("continuous_spiral", {"role": _role, "r1": _num,
                                   "n_points": {"type": "integer", "minimum": 2},
                                   "circle_samples": {"type": "integer", "minimum": 1}}, ["role"]),
        _obj("spiral_curve_3d", {"n_samples": {"type": "integer", "minimum": 2}, "t_max": _num,
                                 "circle_samples": {"type": "integer", "minimum": 1}}),
        _obj("cylinder", {"height": _num}),
        _obj("geometric_ladder", {"role": _role,
                                  "floor_exponent": {"type": "integer", "minimum": 2}}, ["role"]),
    ]
}


def _geometric_ladder(role: str, floor_exponent: int = 200) -> FiniteSet:
    # A = {2^-k : k even, k <= floor}, B = {2^-k : k odd, k <= floor + 1}, both with 0.
    # B reaching one rung lower keeps the last A point's projection regular.
    first = 0 if role == "A" else 1
    k = np.arange(first, floor_exponent + 2, 2, dtype=float)
    return FiniteSet(np.concatenate([np.ldexp(1.0, -k.astype(int)), [0.0]])[:, None])


def build_set(desc: Mapping) -> ProjectableSet:
    """Instantiate a set from its JSON descriptor (see :data:`SET_SCHEMA`)."""
    d = dict(desc)
    kind = d.pop("type", None)
    try:
        if kind == "full_space":
            return FullSpace(d["dim"])
        if kind == "halfspace":
            return HalfSpace(d["normal"], d.get("offset", 0.0))
        if kind == "affine":
            return AffineSubspace(d["point"], d["directions"])
        if kind == "sector":
            return Sector(d["theta_lo"], d["theta_hi"], d.get("radius_cap"))
        if kind == "epigraph":
            f, df, d2f = EPIGRAPH_FUNCTIONS[d["function"]]
            return EpigraphSet(f, df, d.get("lo", -10.0), d.get("hi", 10.0), d2f=d2f,
                               scan_points=d.get("scan_points", 16), name=d["function"])
        if kind == "finite":
            return FiniteSet(d["points"])
        if kind == "discrete_spiral":
            role = d.pop("role")
            A, B = build_discrete_spiral(DiscreteSpiralSpec(**d))
            return A if role == "A" else B
        if kind == "continuous_spiral":
            role = d.pop("role")
            A, B = build_continuous_spiral_pair(**d)
            return A if role == "A" else B
        if kind == "spiral_curve_3d":
            return build_spiral_cylinder(**d)[0]
        if kind == "cylinder":
            return Cylinder(d.get("height", 1.0))
        if kind == "geometric_ladder":
            return _geometric_ladder(d["role"], d.get("floor_exponent", 200))
    except (KeyError, TypeError) as exc:
        raise StructuralError(f"bad parameters for set type {kind!r}: {exc}") from None
    raise StructuralError(f"unknown set type {kind!r}")


# -- fixtures ------------------------------------------------------------------------

@dataclass(frozen=True)
class Expected:
    """Expected outcome; `rho` and `rho_tol` apply to ``converges_sublinear`` only."""

    outcome: str
    rho: float | None = None
    rho_tol: float | None = None

    def __post_init__(self):
        if self.outcome not in OUTCOMES:
            raise StructuralError(f"unknown outcome {self.outcome!r}")
        if (self.outcome == SUBLINEAR) != (self.rho is not None):
            raise StructuralError("rho is required for, and only for, sublinear outcomes")

    def __str__(self):
        if self.outcome == SUBLINEAR:
            return f"{self.outcome}(rho={self.rho:g})"
        return self.outcome


@dataclass(frozen=True)
class ExperimentSpec:
    """A fully parameterized experiment.

    ``limit`` is the known limit point, used for rate fits when given.
    ``winding_gap`` enables the winding measurement for planar or
    cylindrical spiral fixtures: the unwrapped polar angle gained by the
    b-iterates while the gap is below that value.
    """

    name: str
    set_a: Mapping
    set_b: Mapping
    x0: tuple
    rule: StopRule
    expected: Expected
    limit: tuple | None = None
    description: str = ""
    winding_gap: float | None = None

    def build(self) -> tuple[ProjectableSet, ProjectableSet]:
        return build_set(self.set_a), build_set(self.set_b)

    def with_rule(self, **overrides) -> "ExperimentSpec":
        return dataclasses.replace(self, rule=dataclasses.replace(self.rule, **overrides))

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "description": self.description,
            "set_a": dict(self.set_a),
            "set_b": dict(self.set_b),
            "x0": list(self.x0),
            "rule": dataclasses.asdict(self.rule),
            "expected": {k: v for k, v in dataclasses.asdict(self.expected).items() if v is not None},
            "limit": None if self.limit is None else list(self.limit),
            "winding_gap": self.winding_gap,
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "ExperimentSpec":
        return cls(
            name=doc["name"],
            set_a=doc["set_a"],
            set_b=doc["set_b"],
            x0=tuple(doc["x0"]),
            rule=StopRule(**doc.get("rule", {})),
            expected=Expected(**doc["expected"]),
            limit=None if doc.get("limit") is None else tuple(doc["limit"]),
            description=doc.get("description", ""),
            winding_gap=doc.get("winding_gap"),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


_REGISTRY: dict[str, ExperimentSpec] = {}


def register(spec: ExperimentSpec) -> ExperimentSpec:
    if spec.name in _REGISTRY:
        raise StructuralError(f"fixture {spec.name!r} already registered")
    _REGISTRY[spec.name] = spec
    return spec


def fixture_names() -> list[str]:
    return list(_REGISTRY)


def example(name: str) -> ExperimentSpec:
    """Look up a registered fixture."""
    try:
        return _REGISTRY[name]
    except KeyError:
        raise FixtureNotFound(f"no fixture named {name!r}; known: {', '.join(_REGISTRY)}") from None


_DEFAULT = StopRule(gap_tol=1e-12, step_tol=1e-12, max_iter=100_000, stall_window=500)
_ORIGIN = (0.0, 0.0)
_LOWER = {"type": "halfspace", "normal": [0.0, 1.0], "offset": 0.0}

register(ExperimentSpec(
    name="packman",
    description="cone of half-angle atan(1/2) inside the mouth of a unit disc sector",
    set_a={"type": "sector", "theta_lo": -math.atan(0.5), "theta_hi": math.atan(0.5), "radius_cap": 1.0},
    set_b={"type": "sector", "theta_lo": math.pi / 4, "theta_hi": 7 * math.pi / 4, "radius_cap": 1.0},
    x0=(0.5, 0.1), rule=_DEFAULT, expected=Expected(LINEAR), limit=_ORIGIN,
))
register(ExperimentSpec(
    name="spiral_circle",
    description="alternate points of a spiral winding onto the unit circle, plus the circle",
    set_a={"type": "continuous_spiral", "role": "A", "n_points": 8001},
    set_b={"type": "continuous_spiral", "role": "B", "n_points": 8001},
    x0=(2.0, 0.0),
    rule=StopRule(gap_tol=1e-3, step_tol=1e-12, max_iter=10_000, stall_window=500),
    expected=Expected(NONCONVERGENT), winding_gap=1e-3,
))
register(ExperimentSpec(
    name="discrete_spiral_8",
    description="8 rays 45 degrees apart, perpendicular projections alternate between A and B",
    set_a={"type": "discrete_spiral", "role": "A", "ray_angle": math.pi / 4},
    set_b={"type": "discrete_spiral", "role": "B", "ray_angle": math.pi / 4},
    x0=(1.0, 0.0), rule=_DEFAULT, expected=Expected(LINEAR), limit=_ORIGIN,
))
register(ExperimentSpec(
    name="discrete_spiral_irrational",
    description="rays at multiples of 0.5 rad, never closing up",
    set_a={"type": "discrete_spiral", "role": "A", "ray_angle": 0.5},
    set_b={"type": "discrete_spiral", "role": "B", "ray_angle": 0.5},
    x0=(1.0, 0.0), rule=_DEFAULT, expected=Expected(LINEAR), limit=_ORIGIN,
))
register(ExperimentSpec(
    name="spiral_cylinder",
    description="3-D spiral descending onto the cylinder's rim circle, against the cylinder",
    set_a={"type": "spiral_curve_3d", "n_samples": 1_000_000, "t_max": 6.0},
    set_b={"type": "cylinder", "height": 1.0},
    x0=(2.0, 0.0, 1.0),
    rule=StopRule(gap_tol=1e-2, step_tol=1e-12, max_iter=10_000, stall_window=500),
    expected=Expected(NONCONVERGENT), winding_gap=1e-2,
))
register(ExperimentSpec(
    name="geometric_pair",
    description="A = {4^-n} and B = {2 * 4^-n} on the line, both with 0",
    set_a={"type": "geometric_ladder", "role": "A", "floor_exponent": 200},
    set_b={"type": "geometric_ladder", "role": "B", "floor_exponent": 200},
    x0=(1.0,),
    rule=StopRule(gap_tol=1e-60, step_tol=1e-60, max_iter=100_000, stall_window=500),
    expected=Expected(LINEAR), limit=(0.0,),
))
register(ExperimentSpec(
    name="flat_tangent",
    description="epigraph of exp(-1/x^2) against the lower halfplane, tangent of infinite order",
    set_a={"type": "epigraph", "function": "flat_exp", "lo": -0.8, "hi": 0.8, "scan_points": 1},
    set_b=_LOWER, x0=(0.35, 0.0), rule=_DEFAULT,
    expected=Expected(SUBLINEAR, rho=0.0, rho_tol=0.05), limit=_ORIGIN,
))
register(ExperimentSpec(
    name="parabola_tangent",
    description="epigraph of t^2 against the lower halfplane",
    set_a={"type": "epigraph", "function": "square", "lo": -10.0, "hi": 10.0, "scan_points": 1},
    set_b=_LOWER, x0=(0.5, 0.0),
    rule=StopRule(gap_tol=1e-12, step_tol=1e-12, max_iter=10_000, stall_window=500),
    expected=Expected(SUBLINEAR, rho=0.5, rho_tol=0.1), limit=_ORIGIN,
))
register(ExperimentSpec(
    name="orthogonal_lines",
    description="the two coordinate axes",
    set_a={"type": "affine", "point": [0.0, 0.0], "directions": [[1.0, 0.0]]},
    set_b={"type": "affine", "point": [0.0, 0.0], "directions": [[0.0, 1.0]]},
    x0=(1.0, 1.0), rule=_DEFAULT, expected=Expected(FINITE), limit=_ORIGIN,
))


# -- running and classifying ----------------------------------------------------------------

def unwrapped_winding(points: np.ndarray) -> float:
    """Net unwrapped polar angle (about the z-axis) swept by a point sequence."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return 0.0
    ang = np.unwrap(np.arctan2(pts[:, 1], pts[:, 0]))
    return float(ang[-1] - ang[0])


@dataclass(frozen=True)
class Verdict:
    name: str
    expected: str
    observed: str
    passed: bool
    fit: RateFit | None = None
    detail: Mapping = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: expected {self.expected}, observed {self.observed}"


class GalleryRun(NamedTuple):
    trace: Trace
    verdict: Verdict


FINITE_MAX_STEPS = 10


def classify(trace: Trace, limit=None) -> tuple[str, RateFit | None]:
    """Qualitative outcome of a run plus the rate fit it rests on.

    Stalled runs are non-convergent.  Runs that hit the intersection exactly
    within :data:`FINITE_MAX_STEPS` steps converge finitely.  Converged runs
    with a geometric fit (``q < 1``, ``r^2 >= 0.9``) converge linearly;
    anything else that approaches its limit is classified by a power fit.
    """
    if trace.status == STALLED:
        return NONCONVERGENT, None
    if trace.status == CONVERGED and trace.n_steps <= FINITE_MAX_STEPS and trace.gaps[-1] == 0.0:
        return FINITE, None
    if trace.status == MAX_ITER and limit is None:
        return UNDETERMINED, None
    try:
        if trace.status == CONVERGED:
            lin = fit_rate(trace, "linear", limit=limit)
            if lin.value < 1.0 and lin.r_squared >= 0.9:
                return LINEAR, lin
        pw = fit_rate(trace, "power", limit=limit)
    except ProjkitError:
        return UNDETERMINED, None
    return f"{SUBLINEAR}(rho_hat={pw.value:.4g})", pw


def _matches(expected: Expected, observed: str, fit: RateFit | None) -> bool:
    if expected.outcome != SUBLINEAR:
        return observed == expected.outcome
    if not observed.startswith(SUBLINEAR) or fit is None:
        return False
    tol = expected.rho_tol if expected.rho_tol is not None else 0.1
    return abs(fit.value - expected.rho) <= tol


def run_spec(spec: ExperimentSpec, **rule_overrides) -> GalleryRun:
    """Run one fixture and judge the outcome against its expectation."""
    if rule_overrides:
        spec = spec.with_rule(**rule_overrides)
    try:
        A, B = spec.build()
        trace = alternate(A, B, spec.x0, spec.rule)
    except ProjkitError as exc:
        raise type(exc)(f"fixture {spec.name}: {exc}") from exc
    observed, fit = classify(trace, spec.limit)
    detail: dict = {"status": trace.status, "n_steps": trace.n_steps,
                    "final_gap": float(trace.gaps[-1]) if len(trace.gaps) else None}
    if spec.winding_gap is not None:
        idx = np.flatnonzero(trace.gaps < spec.winding_gap)
        if idx.size:
            start = idx[0] + trace.a_offset
            detail["winding_below_gap"] = unwrapped_winding(np.array(trace.b_iters[start:]))
        else:
            detail["winding_below_gap"] = 0.0
        detail["winding_total"] = unwrapped_winding(np.array(trace.b_iters))
    verdict = Verdict(spec.name, str(spec.expected), observed,
                      _matches(spec.expected, observed, fit), fit, detail)
    return GalleryRun(trace, verdict)


def run_gallery(names: Iterable[str] | str = "all",
                rule_overrides: Mapping | None = None) -> list[GalleryRun]:
    """Run the named fixtures (or ``"all"``) and return ``(trace, verdict)`` pairs."""
    if isinstance(names, str):
        names = fixture_names() if names == "all" else [names]
    return [run_spec(example(n), **dict(rule_overrides or {})) for n in names]


def late_separability(trace: Trace, fraction: float = 0.1, omega_grid=None):
    """Separability estimates on the last `fraction` of the building blocks."""
    n = max(1, int(len(trace.blocks) * fraction))
    kw = {} if omega_grid is None else {"omega_grid": omega_grid}
    return estimate_separability(trace, window=slice(-n, None), **kw)
