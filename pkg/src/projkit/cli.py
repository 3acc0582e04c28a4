"""Command-line front end.

``projkit run TARGET``
    Run a fixture (by name) or a JSON experiment config, write the trace CSV
    files and ``<name>_diagnostics.json``, print a verdict line.  Exit 0 when
    the outcome matches the expectation, 1 otherwise.
``projkit probe TARGET --x-star ...``
    Hölder probe around ``x*``; writes ``<name>_holder.json``.  Exit 0 without
    violations, 1 with violations, 2 if ``x*`` is not in both sets.
``projkit rate TRACE_CSV --kind {power,linear}``
    Fit a convergence rate to a written trace; writes ``<stem>_fit.json``.
``projkit list`` / ``projkit show NAME``
    List the fixtures / print one fixture's JSON spec.

Usage errors (bad flags, invalid configs, malformed files) exit with 2.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from pathlib import Path

import jsonschema

from . import diagnostics as dg
from .engine import StopRule, alternate
from .errors import (
    DomainError,
    EmptyEstimateError,
    FixtureNotFound,
    InsufficientSamplingError,
    ProjkitError,
    StructuralError,
    UnfittableError,
    WindowError,
)
from .gallery import SET_SCHEMA, Expected, ExperimentSpec, classify, example, fixture_names, _matches
from .io import read_trace, write_json, write_trace

__all__ = ["main", "CONFIG_SCHEMA", "load_config"]

EXIT_OK, EXIT_MISMATCH, EXIT_USAGE = 0, 1, 2

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "name": {"type": "string", "pattern": r"^[A-Za-z0-9_.-]+$"},
        "description": {"type": "string"},
        "set_a": SET_SCHEMA,
        "set_b": SET_SCHEMA,
        "x0": {"type": "array", "items": _num, "minItems": 1},
        "rule": {
            "type": "object",
            "properties": {"gap_tol": _pos, "step_tol": _pos,
                           "max_iter": {"type": "integer", "minimum": 1},
                           "stall_window": {"type": "integer", "minimum": 1}},
            "additionalProperties": False,
        },
        "expected": {
            "type": "object",
            "properties": {"outcome": {"enum": ["converges_linear", "converges_sublinear",
                                                "non_convergent", "converges_finite"]},
                           "rho": _num, "rho_tol": _pos},
            "required": ["outcome"],
            "additionalProperties": False,
        },
        "limit": {"type": ["array", "null"], "items": _num},
        "winding_gap": {"type": ["number", "null"]},
        "diagnostics": {
            "type": "object",
            "properties": {
                "omega_grid": {"type": "array", "items": {"type": "number", "minimum": 0, "exclusiveMaximum": 2}},
                "rate_kind": {"enum": ["power", "linear"]},
                "holder": {
                    "type": "object",
                    "properties": {"sigma": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
                                   "c": _pos, "neighborhood_radius": _pos,
                                   "sample_count": {"type": "integer", "minimum": 1},
                                   "x_star": {"type": "array", "items": _num}},
                    "required": ["sigma", "c", "x_star"],
                    "additionalProperties": False,
                },
            },
            "additionalProperties": False,
        },
        "output": {
            "type": "object",
            "properties": {"out_dir": {"type": "string"}},
            "additionalProperties": False,
        },
    },
    "required": ["name", "set_a", "set_b", "x0"],
    "additionalProperties": False,
}


class UsageError(Exception):
    pass


def load_config(target: str) -> tuple[ExperimentSpec, dict]:
    """Resolve `target` to ``(spec, config)``; a fixture name gives an empty config.

    Configs without an ``expected`` block give ``spec.expected is None``.
    """
    p = Path(target)
    if not (p.suffix == ".json" or p.exists()):
        try:
            return example(target), {}
        except FixtureNotFound as exc:
            raise UsageError(str(exc.args[0])) from None
    try:
        doc = json.loads(p.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {target}: {exc}") from None
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(map(str, exc.absolute_path)) or "<root>"
        raise UsageError(f"invalid config at {where}: {exc.message}") from None
    try:
        spec = ExperimentSpec(
            name=doc["name"], set_a=doc["set_a"], set_b=doc["set_b"], x0=tuple(doc["x0"]),
            rule=StopRule(**doc.get("rule", {})),
            expected=Expected(**doc["expected"]) if "expected" in doc else None,
            limit=None if doc.get("limit") is None else tuple(doc["limit"]),
            description=doc.get("description", ""), winding_gap=doc.get("winding_gap"),
        )
    except ProjkitError as exc:
        raise UsageError(f"invalid config: {exc}") from None
    return spec, doc


def _build(spec: ExperimentSpec):
    try:
        return spec.build()
    except ProjkitError as exc:
        raise UsageError(f"cannot build the sets of {spec.name}: {exc}") from None


def _floats(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.replace(" ", "").split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals or not all(math.isfinite(v) for v in vals):
        raise argparse.ArgumentTypeError(f"expected finite numbers, got {text!r}")
    return vals


def _out_dir(args, cfg: dict | None = None) -> Path:
    if args.out_dir is not None:
        return Path(args.out_dir)
    if cfg and "output" in cfg and "out_dir" in cfg["output"]:
        return Path(cfg["output"]["out_dir"])
    return Path(os.environ.get("PROJKIT_OUT_DIR", "."))


def _rule_overrides(args) -> dict:
    out = {}
    for flag, key in (("max_iter", "max_iter"), ("gap_tol", "gap_tol"), ("step_tol", "step_tol")):
        v = getattr(args, flag)
        if v is not None:
            out[key] = v
    return out


def _holder_json(report: dg.HolderReport) -> dict:
    return {
        "sigma": report.sigma,
        "c": report.c,
        "violations": [dataclasses.asdict(v) for v in report.violations],
        "a_samples": report.a_samples,
        "candidates_checked": report.candidates_checked,
        "membership_tol": report.membership_tol_rule,
        "note": report.note,
    }


def _fit_json(fit: dg.RateFit | None) -> dict | None:
    if fit is None:
        return None
    return {"kind": fit.kind, "value": fit.value, "r2": fit.r_squared,
            "window": list(fit.window), "per": fit.per, "limit_source": fit.limit_source}


def cmd_run(args) -> int:
    spec, cfg = load_config(args.target)
    diag_cfg = cfg.get("diagnostics", {})
    try:
        rule = dataclasses.replace(spec.rule, **_rule_overrides(args))
    except ProjkitError as exc:
        raise UsageError(str(exc)) from None
    spec = dataclasses.replace(spec, rule=rule)
    A, B = _build(spec)
    trace = alternate(A, B, spec.x0, spec.rule)
    omega_grid = args.omega_grid or diag_cfg.get("omega_grid") or dg.DEFAULT_OMEGA_GRID

    try:
        sep = [{"omega": e.omega, "gamma_hat": e.gamma_hat, "blocks_used": e.blocks_used,
                "degenerate_skipped": e.degenerate_skipped}
               for e in dg.estimate_separability(trace, omega_grid)]
    except EmptyEstimateError:
        sep = []
    except DomainError as exc:
        raise UsageError(str(exc)) from None

    observed, fit = classify(trace, spec.limit)
    kind = diag_cfg.get("rate_kind")
    if kind is not None and (fit is None or fit.kind != kind):
        try:
            fit = dg.fit_rate(trace, kind, limit=spec.limit)
        except (UnfittableError, WindowError):
            fit = None

    holder = None
    if "holder" in diag_cfg:
        h = dict(diag_cfg["holder"])
        x_star = h.pop("x_star")
        params = dg.HolderParams(**h)
        try:
            holder = _holder_json(dg.holder_probe(A, B, x_star, params, seed=args.seed,
                                                  intersection_tol=1e-8))
        except (DomainError, InsufficientSamplingError) as exc:
            holder = {"sigma": params.sigma, "c": params.c, "violations": [], "error": str(exc)}

    out = _out_dir(args, cfg)
    write_trace(trace, out, spec.name)
    write_json(out / f"{spec.name}_diagnostics.json", {
        "name": spec.name,
        "status": trace.status,
        "n_steps": trace.n_steps,
        "expected": None if spec.expected is None else str(spec.expected),
        "observed": observed,
        "separability": sep,
        "holder": holder,
        "rate": _fit_json(fit),
    })
    if spec.expected is None:
        print(f"DONE {spec.name}: observed {observed} ({trace.status}, {trace.n_steps} steps)")
        return EXIT_OK
    ok = _matches(spec.expected, observed, fit)
    print(f"{'PASS' if ok else 'FAIL'} {spec.name}: expected {spec.expected}, observed {observed} "
          f"({trace.status}, {trace.n_steps} steps)")
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_probe(args) -> int:
    spec, cfg = load_config(args.target)
    A, B = _build(spec)
    try:
        params = dg.HolderParams(sigma=args.sigma, c=args.c, neighborhood_radius=args.radius,
                                 sample_count=args.samples)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    if len(args.x_star) != A.dim:
        raise UsageError(f"x* needs {A.dim} coordinates")
    try:
        report = dg.holder_probe(A, B, args.x_star, params, seed=args.seed, intersection_tol=1e-8)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InsufficientSamplingError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    doc = _holder_json(report)
    doc["x_star"] = list(args.x_star)
    write_json(_out_dir(args, cfg) / f"{spec.name}_holder.json", doc)
    n = len(report.violations)
    print(f"{spec.name}: {n} violation(s) of the Hölder condition "
          f"(sigma={params.sigma:g}, c={params.c:g}, {report.candidates_checked} candidates)")
    return EXIT_OK if n == 0 else EXIT_MISMATCH


def cmd_rate(args) -> int:
    try:
        trace = read_trace(args.trace)
        fit = dg.fit_rate(trace, args.kind, limit=args.limit, per=args.per)
    except (StructuralError, WindowError, UnfittableError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    name = Path(args.trace).name
    stem = name[: -len("_trace.csv")] if name.endswith("_trace.csv") else Path(name).stem
    out = Path(args.out_dir) if args.out_dir is not None else Path(args.trace).parent
    write_json(out / f"{stem}_fit.json", _fit_json(fit))
    label = "rho_hat" if fit.kind == "power" else "q_factor"
    print(f"{label}={fit.value:.6g} r2={fit.r_squared:.6f} window={fit.window[0]}:{fit.window[1]}")
    return EXIT_OK


def cmd_list(args) -> int:
    for n in fixture_names():
        spec = example(n)
        print(f"{n:28s} {str(spec.expected):34s} {spec.description}")
    return EXIT_OK


def cmd_show(args) -> int:
    try:
        print(example(args.name).dumps())
    except FixtureNotFound as exc:
        raise UsageError(str(exc.args[0])) from None
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="projkit", description="Alternating-projection experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out-dir", default=None,
                        help="output directory (default: $PROJKIT_OUT_DIR or .)")
        sp.add_argument("--seed", type=int, default=0, help="seed for probe sampling")

    r = sub.add_parser("run", help="run a fixture or JSON config")
    r.add_argument("target", help="fixture name or path to a JSON config")
    r.add_argument("--max-iter", type=int, default=None)
    r.add_argument("--gap-tol", type=float, default=None)
    r.add_argument("--step-tol", type=float, default=None)
    r.add_argument("--omega-grid", type=_floats, default=None, help="e.g. 0,0.5,1")
    common(r)
    r.set_defaults(func=cmd_run)

    pr = sub.add_parser("probe", help="Hölder regularity probe around x*")
    pr.add_argument("target")
    pr.add_argument("--x-star", type=_floats, required=True, help="e.g. 0,0")
    pr.add_argument("--sigma", type=float, required=True)
    pr.add_argument("--c", type=float, required=True)
    pr.add_argument("--radius", type=float, default=0.1)
    pr.add_argument("--samples", type=int, default=256)
    common(pr)
    pr.set_defaults(func=cmd_probe)

    ra = sub.add_parser("rate", help="fit a rate to a trace CSV")
    ra.add_argument("trace")
    ra.add_argument("--kind", choices=["power", "linear"], required=True)
    ra.add_argument("--limit", type=_floats, default=None, help="known limit, e.g. 0,0")
    ra.add_argument("--per", choices=["projection", "step"], default="projection")
    ra.add_argument("--out-dir", default=None, help="default: the trace's directory")
    ra.set_defaults(func=cmd_rate)

    sub.add_parser("list", help="list fixtures").set_defaults(func=cmd_list)
    sh = sub.add_parser("show", help="print a fixture's JSON spec")
    sh.add_argument("name")
    sh.set_defaults(func=cmd_show)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
