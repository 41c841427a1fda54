"""CSV traces and JSON summaries with byte-stable formatting."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from ..report import to_jsonable

TRACE_COLUMNS = (
    "k",
    "x_k",
    "f_x_next",
    "step_norm",
    "inner_iterations",
    "inner_residual",
    "descent_gap",
    "fejer_ok",
    "gamma_k",
    "lambda_k",
)


def fmt(v) -> str:
    """Shortest round-tripping text for a scalar; points are joined with ``;``."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return ";".join(fmt(float(t)) for t in np.ravel(v))
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def trace_rows(report):
    for r in report.records:
        yield (
            r.k, r.x_k, r.f_x_next, r.step_norm, r.inner_iterations, r.inner_residual,
            r.descent_gap, r.fejer_ok, r.gamma_k, r.lambda_k,
        )


def write_trace(report, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(csv_text(TRACE_COLUMNS, trace_rows(report)))
    return path


def json_text(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=True) + "\n"


def write_json(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json_text(obj))
    return path
