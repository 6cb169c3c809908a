"""Trace files: trace.csv, points.jsonl and summary.json.

trace.csv holds one row per block with columns
k, r, step_a, step_b, alpha, beta, multivalued_hit (floats with 17
significant digits).  points.jsonl holds one object per index k = 0..K
with the coordinate arrays "a" and "b" (and "shadow_a" for Douglas-Rachford
runs), so the CSV width does not depend on the dimension.
"""

from __future__ import annotations

import csv
import json
import os

import numpy as np

from .core import Tolerances
from .engine import Trace

TRACE_COLUMNS = ("k", "r", "step_a", "step_b", "alpha", "beta", "multivalued_hit")


def fmt(x):
    return format(float(x), ".17g")


def write_trace_csv(path, trace):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for j in range(len(trace)):
            w.writerow([j + 1, fmt(trace.r[j]), fmt(trace.step_a[j]), fmt(trace.step_b[j]),
                        fmt(trace.alpha[j]), fmt(trace.beta[j]), int(trace.multivalued[j])])


def read_trace_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if rows and tuple(rows[0].keys()) != TRACE_COLUMNS:
        raise ValueError(f"{path}: unexpected columns {tuple(rows[0].keys())}")
    return rows


def write_points(path, trace, extra=None):
    """One JSON object per line; `extra` maps names to (K+1, n) arrays."""
    with open(path, "w") as fh:
        for k in range(trace.a.shape[0]):
            obj = {"k": k, "a": trace.a[k].tolist(), "b": trace.b[k].tolist()}
            for name, arr in (extra or {}).items():
                obj[name] = np.asarray(arr[k]).tolist()
            fh.write(json.dumps(obj) + "\n")


def read_points(path):
    a, b = [], []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                a.append(obj["a"])
                b.append(obj["b"])
    return np.array(a, dtype=float), np.array(b, dtype=float)


def write_outputs(out_dir, trace, summary, extra_points=None):
    os.makedirs(out_dir, exist_ok=True)
    write_trace_csv(os.path.join(out_dir, "trace.csv"), trace)
    write_points(os.path.join(out_dir, "points.jsonl"), trace, extra_points)
    with open(os.path.join(out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_trace_dir(out_dir):
    """Rebuild a Trace (and the summary, if present) from a run directory."""
    pts = os.path.join(out_dir, "points.jsonl")
    if not os.path.exists(pts):
        raise FileNotFoundError(f"no points.jsonl in {out_dir}")
    a, b = read_points(pts)
    if a.ndim != 2 or a.shape[0] < 1:
        raise ValueError("empty trace")
    summary = {}
    spath = os.path.join(out_dir, "summary.json")
    if os.path.exists(spath):
        with open(spath) as fh:
            summary = json.load(fh)
    mv = np.zeros(a.shape[0] - 1, dtype=bool)
    cpath = os.path.join(out_dir, "trace.csv")
    if os.path.exists(cpath):
        rows = read_trace_csv(cpath)
        if len(rows) == mv.size:
            mv = np.array([r["multivalued_hit"] == "1" for r in rows], dtype=bool)
    tol = Tolerances(**summary["tolerances"]) if "tolerances" in summary else Tolerances()
    return Trace(a, b, mv, summary.get("stop_reason", "max_iter"), tol), summary
