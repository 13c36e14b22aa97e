"""Trace CSV and JSON report serialization."""

from __future__ import annotations

import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .solver import IterationTrace

SCHEMA = "qnewt/1"
TRACE_HEADER = ("k", "residual_norm", "step_dist", "dist_to_ref", "t_k", "f_t_over_B", "selection_index")


def fmt_float(v) -> str:
    if v is None:
        return ""
    return "%.17g" % float(v)


def trace_rows(trace: IterationTrace, t_seq: Sequence[float] | None = None,
               f_over_B: Sequence[float] | None = None) -> list[dict]:
    """One row per iterate. ``step_dist`` and ``selection_index`` of row ``k``
    describe the step to ``x^{k+1}`` and are empty on the last row."""
    rows = []
    for k in range(len(trace.points)):
        last = k >= len(trace.step_dists)
        rows.append({
            "k": str(k),
            "residual_norm": fmt_float(trace.residual_norms[k]),
            "step_dist": "" if last else fmt_float(trace.step_dists[k]),
            "dist_to_ref": fmt_float(trace.dists_to_ref[k]) if trace.dists_to_ref else "",
            "t_k": fmt_float(t_seq[k]) if t_seq is not None and k < len(t_seq) else "",
            "f_t_over_B": fmt_float(f_over_B[k]) if f_over_B is not None and k < len(f_over_B) else "",
            "selection_index": "" if last else str(trace.selection_index[k]),
        })
    return rows


def trace_to_csv(trace: IterationTrace, t_seq=None, f_over_B=None) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=TRACE_HEADER, lineterminator="\n")
    w.writeheader()
    w.writerows(trace_rows(trace, t_seq, f_over_B))
    return buf.getvalue()


def read_trace_csv(path) -> dict[str, list]:
    """Columns of a trace CSV; empty cells become ``None``."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != TRACE_HEADER:
            raise ValueError(f"unexpected trace header {reader.fieldnames}")
        cols: dict[str, list] = {h: [] for h in TRACE_HEADER}
        for row in reader:
            for h in TRACE_HEADER:
                cell = row[h]
                cols[h].append(None if cell == "" else (int(cell) if h in ("k", "selection_index") else float(cell)))
    return cols


def _plain(obj: Any):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    return obj


def report_json(kind: str, payload: dict) -> str:
    """Versioned JSON report; non-finite floats are written as strings."""
    return json.dumps({"schema": SCHEMA, "kind": kind, **_plain(payload)}, indent=2, sort_keys=False) + "\n"


def write_text(text: str, path: str | Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)
