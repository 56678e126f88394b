"""CSV trace and key-value metrics output."""

from __future__ import annotations

import csv
import io
from dataclasses import asdict
from pathlib import Path

import numpy as np

HEADER = ["t", "x1", "x2", "u", "v_true", "d_true", "trigger", "H_star", "beta",
          "V_value", "efss_lo", "efss_hi"]


def _num(value) -> str:
    if value is None:
        return ""
    return "%.9g" % float(value)


def _first(arr):
    return None if arr is None else np.atleast_1d(arr)[0]


def trace_rows(trace):
    for r in trace:
        trig = r.is_trigger
        yield [
            str(r.t), _num(r.x[0]), _num(r.x[1]), _num(_first(r.u)),
            _num(_first(r.v_true)), _num(_first(r.d_true)),
            "1" if trig else "0",
            str(r.H_star) if trig else "",
            _num(r.beta) if trig else "",
            _num(r.V_value) if trig else "",
            _num(_first(r.efss_lo)) if trig else "",
            _num(_first(r.efss_hi)) if trig else "",
        ]


def trace_csv(trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    w.writerows(trace_rows(trace))
    return buf.getvalue()


def metrics_text(metrics, include_runtime: bool = False) -> str:
    """``key = value`` lines; runtime is left out by default so reruns match."""
    lines = []
    for key, value in asdict(metrics).items():
        if key == "runtime_s" and not include_runtime:
            continue
        lines.append(f"{key} = {value if isinstance(value, int) else _num(value)}")
    return "\n".join(lines) + "\n"


def export(trace, metrics, out_dir, stem: str = "run") -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{stem}_trace.csv"
    met_path = out / f"{stem}_metrics.txt"
    csv_path.write_text(trace_csv(trace), encoding="utf-8")
    met_path.write_text(metrics_text(metrics), encoding="utf-8")
    return csv_path, met_path


def read_trace(path):
    """Load a CSV written by :func:`export` into column arrays (NaN where empty)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or list(rows[0].keys()) != HEADER:
        raise ValueError(f"{path}: not a trace file")
    return {k: np.array([float(r[k]) if r[k] != "" else np.nan for r in rows]) for k in HEADER}
