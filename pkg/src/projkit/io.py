"""Trace CSV and report JSON files.

A trace ``<stem>_trace.csv`` has the header ``k,gap,step,cos_alpha,cos_beta``
and one row per index ``k = 0 .. n``: ``gap = |a_k - b_k|`` (empty when
``a_0`` does not exist), ``step = |b_k - b_{k+1}|`` and the cosines of block
``k`` (both empty on the last row).  Iterates go to ``<stem>_a.csv`` and
``<stem>_b.csv`` with header ``k,coord_0,...``.  Floats are written with 17
significant digits, which round-trips doubles exactly.
"""
from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .engine import Trace, _block
from .errors import StructuralError
from .geometry import as_vector

__all__ = [
    "TRACE_HEADER",
    "UNKNOWN_STATUS",
    "atomic_write_text",
    "write_json",
    "write_trace",
    "read_trace",
    "sidecar_paths",
]

TRACE_HEADER = ["k", "gap", "step", "cos_alpha", "cos_beta"]
UNKNOWN_STATUS = "unknown"


def _fmt(v) -> str:
    return format(float(v), ".17g")


def atomic_write_text(path, text: str) -> Path:
    """Write `text` to a temporary file next to `path`, then rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_json(path, obj) -> Path:
    return atomic_write_text(path, json.dumps(obj, indent=2, allow_nan=False) + "\n")


def sidecar_paths(trace_path) -> tuple[Path, Path]:
    p = Path(trace_path)
    stem = p.name[: -len("_trace.csv")] if p.name.endswith("_trace.csv") else p.stem
    return p.with_name(f"{stem}_a.csv"), p.with_name(f"{stem}_b.csv")


def _csv_text(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _vector_rows(first_index: int, vecs) -> list:
    dim = len(vecs[0]) if vecs else 0
    rows = [["k"] + [f"coord_{i}" for i in range(dim)]]
    rows += [[first_index + i] + [_fmt(c) for c in v] for i, v in enumerate(vecs)]
    return rows


def write_trace(trace: Trace, out_dir, stem: str) -> tuple[Path, Path, Path]:
    """Write the trace CSV and its two sidecars; returns their paths."""
    out = Path(out_dir)
    n = trace.n_steps
    rows = [TRACE_HEADER]
    for k in range(n + 1):
        gi = k - trace.a_offset
        gap = _fmt(trace.gaps[gi]) if 0 <= gi < len(trace.gaps) else ""
        if k < n:
            bl = trace.blocks[k]
            row = [k, gap, _fmt(trace.steps[k]), _fmt(bl.cos_alpha), _fmt(bl.cos_beta)]
        else:
            row = [k, gap, "", "", ""]
        rows.append(row)
    main = atomic_write_text(out / f"{stem}_trace.csv", _csv_text(rows))
    pa, pb = sidecar_paths(main)
    atomic_write_text(pa, _csv_text(_vector_rows(trace.a_offset, list(trace.a_iters))))
    atomic_write_text(pb, _csv_text(_vector_rows(0, list(trace.b_iters))))
    return main, pa, pb


def _read_rows(path: Path) -> list[list[str]]:
    try:
        with open(path, newline="") as fh:
            return list(csv.reader(fh))
    except OSError as exc:
        raise StructuralError(f"cannot read {path}: {exc}") from None


def _read_vectors(path: Path) -> tuple[int, list]:
    rows = _read_rows(path)
    if not rows or rows[0][:1] != ["k"] or len(rows[0]) < 2:
        raise StructuralError(f"{path}: expected header k,coord_0,...")
    dim = len(rows[0]) - 1
    if rows[0][1:] != [f"coord_{i}" for i in range(dim)]:
        raise StructuralError(f"{path}: malformed coordinate header")
    ks, vecs = [], []
    for r in rows[1:]:
        if len(r) != dim + 1:
            raise StructuralError(f"{path}: row {r!r} has the wrong width")
        try:
            ks.append(int(r[0]))
            vecs.append(as_vector([float(c) for c in r[1:]], dim))
        except ValueError as exc:
            raise StructuralError(f"{path}: {exc}") from None
    if not vecs:
        raise StructuralError(f"{path}: no iterates")
    if ks != list(range(ks[0], ks[0] + len(ks))):
        raise StructuralError(f"{path}: indices are not consecutive")
    return ks[0], vecs


def read_trace(path, status: str = UNKNOWN_STATUS) -> Trace:
    """Rebuild a :class:`Trace` from its CSV and sidecars.

    Gaps and steps come from the trace file bit for bit; building blocks are
    recomputed from the iterates.  The run status is not stored in the files
    and is set to `status`.
    """
    path = Path(path)
    rows = _read_rows(path)
    if not rows or rows[0] != TRACE_HEADER:
        raise StructuralError(f"{path}: header must be {','.join(TRACE_HEADER)}")
    pa, pb = sidecar_paths(path)
    a_off, a_iters = _read_vectors(pa)
    b_first, b_iters = _read_vectors(pb)
    if b_first != 0 or a_off not in (0, 1):
        raise StructuralError("sidecar indices do not start where expected")
    n = len(b_iters) - 1
    if len(rows) - 1 != n + 1 or len(a_iters) != n + 1 - a_off:
        raise StructuralError(f"{path}: row count does not match the sidecars")
    if len(a_iters[0]) != len(b_iters[0]):
        raise StructuralError("sidecar dimensions differ")
    gaps, steps = [], []
    try:
        for k, r in enumerate(rows[1:]):
            if len(r) != 5 or int(r[0]) != k:
                raise StructuralError(f"{path}: malformed row {r!r}")
            if r[1]:
                gaps.append(float(r[1]))
            elif k >= a_off:
                raise StructuralError(f"{path}: missing gap in row {k}")
            if k < n:
                steps.append(float(r[2]))
    except ValueError as exc:
        raise StructuralError(f"{path}: {exc}") from None
    if len(gaps) != len(a_iters):
        raise StructuralError(f"{path}: gap column does not match the a-iterates")
    blocks = tuple(_block(b_iters[k], a_iters[k + 1 - a_off], b_iters[k + 1]) for k in range(n))
    return Trace(tuple(a_iters), tuple(b_iters), gaps, steps, blocks, status, a_off)
