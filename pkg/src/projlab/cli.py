"""projlab command line.

    projlab run <config.json> [--out DIR]
    projlab diagnose <dir> [--angle] [--rate] [--three-point C GAMMA] [--four-point L] [--holder C SIGMA]
    projlab reach <set.json> <point> <direction> [--rmax R] [--tol T]
    projlab preset <name> [<name> ...] [--out DIR] [--jobs N] | projlab preset --list

Exit codes: 0 clean stop, 2 diverged, 1 error.  PROJLAB_SEED overrides the
config seed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import config as cfg
from . import diagnostics as dg
from .io import load_trace_dir, write_outputs
from .presets import PRESET_NAMES, preset


def _err(msg):
    print(f"projlab: error: {msg}", file=sys.stderr)
    return 1


def execute(config, out_dir):
    """Run a config and write its outputs; returns the exit code."""
    trace, summary, extra = cfg.run_config(config)
    write_outputs(out_dir, trace, summary, extra)
    print(f"{summary['name']}: {summary['stop_reason']} after {summary['iterations']} iterations -> {out_dir}")
    return cfg.exit_code(summary)


def cmd_run(args):
    try:
        with open(args.config) as fh:
            config = json.load(fh)
    except FileNotFoundError:
        return _err(f"config file not found: {args.config}")
    except json.JSONDecodeError as exc:
        return _err(f"{args.config}: invalid JSON ({exc})")
    out = args.out or config.get("output") or os.path.splitext(args.config)[0] + "-out"
    try:
        return execute(config, out)
    except (ValueError, KeyError, TypeError) as exc:
        return _err(str(exc))


def cmd_diagnose(args):
    try:
        trace, summary = load_trace_dir(args.dir)
    except (FileNotFoundError, ValueError) as exc:
        return _err(str(exc))
    if len(trace) == 0:
        return _err("empty trace")
    settings = dict(summary.get("diagnostics_settings", {}))
    only = []
    if args.angle:
        only.append("angle")
    if args.rate:
        only.append("rate")
    if args.three_point:
        only.append("three_point")
        settings["three_point"] = args.three_point
    if args.four_point is not None:
        only.append("four_point")
        settings["four_point"] = args.four_point
    if args.holder:
        only.append("holder")
        settings["holder"] = args.holder
    try:
        report = cfg.run_diagnostics(trace, settings, only or None)
    except ValueError as exc:
        return _err(str(exc))
    for name in only:
        if report.get(name) is None:
            note = next((n for n in report["notes"] if n.startswith(name)), f"{name}: not available")
            return _err(f"insufficient data for {note}")
    path = os.path.join(args.dir, "diagnostics.json")
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps(report, indent=2, sort_keys=True))
    return 0


def _vector(text):
    text = text.strip()
    if text.startswith("["):
        return np.array(json.loads(text), dtype=float)
    return np.array([float(v) for v in text.split(",")], dtype=float)


def cmd_reach(args):
    try:
        with open(args.set) as fh:
            spec = json.load(fh)
        S = cfg.build_set(spec)
        b = _vector(args.point)
        d = _vector(args.direction)
        nd = float(np.linalg.norm(d))
        if nd == 0:
            return _err("direction must be nonzero")
        R = dg.reach_along(S, b, d / nd, args.rmax, args.tol)
    except FileNotFoundError:
        return _err(f"set file not found: {args.set}")
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        return _err(str(exc))
    print(f"infinite(>={args.rmax:g})" if math.isinf(R) else format(R, ".17g"))
    return 0


def _run_preset(name, out_root):
    return execute(preset(name), os.path.join(out_root, name))


def cmd_preset(args):
    if args.list or not args.names:
        print("\n".join(PRESET_NAMES))
        return 0
    for n in args.names:
        if n not in PRESET_NAMES:
            return _err(f"unknown preset {n!r}; available: {', '.join(PRESET_NAMES)}")
    out_root = args.out or "projlab-out"
    try:
        if args.jobs > 1 and len(args.names) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as ex:
                codes = list(ex.map(_run_preset, args.names, [out_root] * len(args.names)))
        else:
            codes = [_run_preset(n, out_root) for n in args.names]
    except (ValueError, KeyError, TypeError) as exc:
        return _err(str(exc))
    return max(codes)


def build_parser():
    ap = argparse.ArgumentParser(prog="projlab", description="Nonconvex alternating projections lab.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config")
    p.add_argument("config")
    p.add_argument("--out", help="output directory (default: <config>-out)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("diagnose", help="diagnostics on a run directory")
    p.add_argument("dir")
    p.add_argument("--angle", action="store_true")
    p.add_argument("--rate", action="store_true")
    p.add_argument("--three-point", nargs=2, type=float, metavar=("C", "GAMMA"))
    p.add_argument("--four-point", type=float, metavar="ELL")
    p.add_argument("--holder", nargs=2, type=float, metavar=("C", "SIGMA"))
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("reach", help="reach of a set at a point along a direction",
                       description="Vectors are comma separated or JSON lists; write a vector with a "
                                   "leading minus sign as a JSON list, e.g. '[-1, 0, 0]'.")
    p.add_argument("set")
    p.add_argument("point", help="base point in the set")
    p.add_argument("direction", help="direction (normalised internally)")
    p.add_argument("--rmax", type=float, default=1e3)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("preset", help="run named experiments")
    p.add_argument("names", nargs="*")
    p.add_argument("--list", action="store_true")
    p.add_argument("--out", help="root output directory (default: projlab-out)")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_preset)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
