"""Experiment configs: JSON dictionaries naming sets, an algorithm and a start.

A config looks like::

    {"name": "parabola-gap", "algorithm": "ap",
     "sets": [{"family": "affine", "origin": [0, 0], "directions": [[1, 0]]},
              {"family": "epigraph-quadratic", "a0": 1, "a2": 1}],
     "start": [1, 0],
     "tolerances": {"max_iter": 1000},
     "tie_policy": {"mode": "first", "seed": 0},
     "diagnostics": {"cluster_radius": 0.1}}

Errors raised while building carry the offending field in their message.
"""

from __future__ import annotations

import os
import time

import numpy as np

from . import apps, diagnostics as dg, engine, phase, sets
from .core import TiePolicy, Tolerances, as_point
from .engine import Trace

ALGORITHMS = ("ap", "local-ap", "dr", "averaged", "gs", "em", "cadzow")


class ConfigError(ValueError):
    """Malformed config; the message names the field."""


def _need(d, key, where):
    if key not in d:
        raise ConfigError(f"{where}: missing field '{key}'")
    return d[key]


def _intervals(spec, where):
    if "intervals" in spec:
        return [[(float(lo), float(hi)) for lo, hi in coord] for coord in spec["intervals"]]
    lo, hi = _need(spec, "lo", where), _need(spec, "hi", where)
    return [[(float(a), float(b))] for a, b in zip(lo, hi)]


def build_curve(spec, where="curve"):
    kind = _need(spec, "curve", where)
    if kind in ("spiral", "inner-spiral"):
        return sets.spiral_curve(+1 if kind == "spiral" else -1,
                                 spec.get("t_max", sets.SPIRAL_T_MAX), spec.get("grid_step", 1e-3))
    if kind == "power":
        return sets.power_curve(float(_need(spec, "alpha", where)), spec.get("x_max", 1.0),
                                spec.get("grid_step", 1e-4), spec.get("offset", 0.0), spec.get("quad", 0.0))
    raise ConfigError(f"{where}: unknown curve '{kind}'")


def build_set(spec, where="set"):
    """SetDescriptor from a JSON object with a 'family' field."""
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected an object")
    fam = _need(spec, "family", where)
    try:
        if fam == "affine":
            return sets.affine_set(_need(spec, "origin", where), spec.get("directions", []))
        if fam == "axis":
            return sets.coordinate_axis(spec.get("dim", 2), spec.get("axis", 0))
        if fam == "box-product":
            return sets.interval_union_set(_intervals(spec, where))
        if fam == "sphere-product":
            m = _need(spec, "m", where)
            return phase.magnitude_set(m) if spec.get("domain") == "fourier" else sets.sphere_product_set(m)
        if fam == "sphere":
            return sets.sphere_set(_need(spec, "center", where), spec.get("radius", 1.0))
        if fam == "epigraph-quadratic":
            return sets.epigraph_quadratic_set(spec.get("a0", 1.0), spec.get("a2", 1.0))
        if fam == "low-rank":
            return sets.low_rank_set(_need(spec, "shape", where), int(_need(spec, "r", where)))
        if fam == "toeplitz":
            return sets.toeplitz_set(_need(spec, "shape", where))
        if fam == "sparsity":
            return sets.sparsity_set(int(_need(spec, "N", where)), int(_need(spec, "k", where)))
        if fam == "sparse-phase":
            return sets.sparse_phase_set(int(_need(spec, "N", where)), int(_need(spec, "k", where)),
                                         (phase.dft, phase.idft))
        if fam == "support":
            return sets.support_set(int(_need(spec, "N", where)), _need(spec, "support", where))
        if fam == "nonneg-real":
            return sets.nonneg_real_set(int(_need(spec, "N", where)))
        if fam == "cylinder":
            return sets.cylinder_set(spec.get("h_lo", 0.0), spec.get("h_hi", 1.0))
        if fam == "circle-F":
            return sets.circle_F()
        if fam == "param-curve":
            return sets.param_curve_set(build_curve(spec, where))
        if fam == "spiral":
            return sets.spiral_set()
        if fam == "double-spiral":
            return sets.double_spiral_set()
        if fam == "lifted":
            return phase.lifted_projector(_need(spec, "which", where))
        if fam == "product":
            comps = _need(spec, "components", where)
            return sets.product_set([build_set(c, f"{where}.components[{i}]") for i, c in enumerate(comps)])
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as exc:
        raise ConfigError(f"{where}: {exc}") from exc
    raise ConfigError(f"{where}: unknown family '{fam}'")


def build_start(spec, seed, where="start"):
    """A start point: a list of numbers or a named construction."""
    if isinstance(spec, (list, tuple)):
        return as_point(spec)
    if not isinstance(spec, dict):
        raise ConfigError(f"{where}: expected a list or an object")
    if "curve" in spec:
        kind = spec["curve"]
        if kind not in ("spiral", "inner-spiral"):
            raise ConfigError(f"{where}: unknown curve '{kind}'")
        return sets.spiral_point(float(_need(spec, "t", where)), +1 if kind == "spiral" else -1)
    if "lift" in spec:
        return phase.LiftMaps().lift(build_start(spec["lift"], seed, f"{where}.lift"))
    if "random" in spec:
        r = spec["random"]
        rng = np.random.default_rng(int(r.get("seed", seed)))
        return r.get("scale", 1.0) * rng.standard_normal(int(_need(r, "dim", f"{where}.random")))
    raise ConfigError(f"{where}: unknown start construction {sorted(spec)}")


def _noisy_sine(spec, seed):
    L = int(spec.get("L", 64))
    rng = np.random.default_rng(int(spec.get("seed", seed)))
    t = np.arange(L)
    return np.sin(spec.get("freq", 0.3) * t) + spec.get("noise", 0.1) * rng.standard_normal(L)


def effective_seed(config):
    env = os.environ.get("PROJLAB_SEED")
    if env is not None and env.strip():
        return int(env)
    return int(config.get("seed", config.get("tie_policy", {}).get("seed", 0)))


def dr_as_trace(dr, tol):
    """A Douglas-Rachford run viewed as a trace: a = x_k, b = P_B(x_k)."""
    return Trace(dr.x, dr.shadow_b, np.zeros(len(dr) - 1, dtype=bool), dr.stop_reason, tol, dict(dr.info))


# ---------------------------------------------------------------------------
# diagnostics shared by `run` and `diagnose`


DEFAULT_DIAG = {
    "tail_fraction": 0.25, "cluster_radius": 0.1, "rate_drop_tail": 0.25, "rate_window": None,
    "rate_skip_head": 0, "r_floor": dg.R_FLOOR, "three_point": "auto", "four_point": "auto", "holder": None,
}


def run_diagnostics(trace, settings=None, only=None):
    """Diagnostics dictionary of a trace; `only` restricts to a subset of
    {"gap", "angle", "rate", "three_point", "four_point", "holder"}.
    Failing checks are reported as null with a note naming the check."""
    s = dict(DEFAULT_DIAG, **(settings or {}))
    want = set(only) if only is not None else {"gap", "angle", "rate", "three_point", "four_point", "holder"}
    rep = dg.DiagnosticsReport()
    if len(trace) == 0:
        raise ValueError("gap: empty trace")
    rep.gap = dg.estimate_gap(trace, s["tail_fraction"], s["cluster_radius"])
    r_star = rep.gap.r_star
    if "angle" in want or "three_point" in want:
        try:
            rep.angle = dg.fit_angle_exponent(trace, rep.gap, s["r_floor"])
        except ValueError as exc:
            rep.notes.append(f"angle: {exc}")
    if rep.angle is not None and 0.5 <= rep.angle.theta < 1.0:
        rep.predicted = dg.predicted_rate(rep.angle.theta, r_star)
    if "rate" in want:
        try:
            rep.rate = dg.fit_rate(trace.b, s["rate_drop_tail"], s["rate_window"], skip_head=s["rate_skip_head"])
        except ValueError as exc:
            rep.notes.append(f"rate: {exc}")
    ell = None
    tp = s["three_point"]
    if "three_point" in want and tp is not None:
        try:
            if tp == "auto":
                if rep.angle is None:
                    raise ValueError("needs an angle fit")
                gamma = rep.angle.gamma
                c = gamma / 4
            else:
                c, gamma = float(tp[0]), float(tp[1])
            rep.three_point = dg.check_three_point(trace, c, gamma, r_star)
            ell = rep.three_point.ell_used
        except ValueError as exc:
            rep.notes.append(f"three_point: {exc}")
    fp = s["four_point"]
    if "four_point" in want and fp is not None:
        try:
            if fp == "auto":
                if ell is None:
                    raise ValueError("needs the three-point constant")
                fp = ell
            rep.four_point = dg.check_four_point(trace, float(fp), r_star)
        except ValueError as exc:
            rep.notes.append(f"four_point: {exc}")
    if "holder" in want and s["holder"] is not None:
        try:
            rep.holder = dg.holder_check(trace, float(s["holder"][0]), float(s["holder"][1]), rep.gap)
        except ValueError as exc:
            rep.notes.append(f"holder: {exc}")
    out = rep.to_dict()
    if only is not None:
        out = {k: v for k, v in out.items() if k in want or k in ("gap", "notes")}
    return out


def _extras(trace):
    ex = {}
    if trace.dimension == 3:
        tail = trace.b[len(trace) * 3 // 4 + 1:] if len(trace) > 3 else trace.b
        ex["winding_b"] = dg.winding_angle(trace.b)
        ex["tail_b_extent"] = dg.angular_extent(tail)
    return ex


# ---------------------------------------------------------------------------
# running


def run_config(config):
    """Execute a config; returns (trace, summary, extra point arrays)."""
    if not isinstance(config, dict):
        raise ConfigError("config: expected a JSON object")
    algo = _need(config, "algorithm", "config")
    if algo not in ALGORITHMS:
        raise ConfigError(f"algorithm: unknown '{algo}', expected one of {ALGORITHMS}")
    seed = effective_seed(config)
    try:
        tol = Tolerances(**config.get("tolerances", {}))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"tolerances: {exc}") from exc
    tp = config.get("tie_policy", {})
    try:
        policy = TiePolicy(tp.get("mode", "first"), seed)
    except ValueError as exc:
        raise ConfigError(f"tie_policy: {exc}") from exc
    extra_points, info = None, {}
    t0 = time.perf_counter()

    def two_sets():
        ss = _need(config, "sets", "config")
        if len(ss) != 2:
            raise ConfigError("sets: exactly two sets expected")
        return build_set(ss[0], "sets[0]"), build_set(ss[1], "sets[1]")

    def start():
        return build_start(_need(config, "start", "config"), seed)

    if algo == "ap" or (algo == "gs" and "sets" in config):
        A, B = two_sets()
        trace = engine.run_alternating(A, B, start(), tol, policy)
    elif algo == "local-ap":
        A, B = two_sets()
        trace = engine.run_local_alternating(A, B, start(), float(_need(config, "t0", "config")), tol, policy)
        info["global_fallbacks"] = int(sum(c == "global" for c in trace.info["certificate"]))
    elif algo == "dr":
        A, B = two_sets()
        dr = engine.run_douglas_rachford(A, B, start(), tol, policy, bool(config.get("reverse", False)))
        trace = dr_as_trace(dr, tol)
        extra_points = {"shadow_a": dr.shadow_a}
    elif algo == "averaged":
        comps = [build_set(c, f"sets[{i}]") for i, c in enumerate(_need(config, "sets", "config"))]
        trace = engine.run_averaged(comps, start(), tol, policy)
        info["mean"] = trace.info["x"][-1].tolist()
    elif algo == "gs":
        m = _need(config, "m", "config")
        pr = _need(config, "prior", "config")
        prior = phase.PriorSpec(_need(pr, "kind", "prior"), {k: v for k, v in pr.items() if k != "kind"})
        trace = phase.gs_run(m, prior, start(), tol, policy)
        info["better_than_zero"] = trace.info["better_than_zero"]
    elif algo == "em":
        omega = config.get("omega")
        Om = None if omega is None else sets.interval_union_set(_intervals(omega, "omega"))
        p = apps.EMProblem(_need(config, "C", "config"), _need(config, "y", "config"), Om)
        trace, state = apps.em_run(p, start(), tol, policy)
        info["x"] = state.x.tolist()
        info["spread"] = state.spread
    else:  # cadzow
        if "signal" in config:
            sig = _noisy_sine(config["signal"], seed)
            T = apps.trajectory_matrix(sig, int(_need(config, "window", "config")))
            structure, shape, S0 = sets.toeplitz_set(T.shape), T.shape, T
            info["signal"] = sig.tolist()
        else:
            shape = tuple(_need(config, "shape", "config"))
            structure = build_set(_need(config, "structure", "config"), "structure")
            S0 = np.asarray(_need(config, "S0", "config"), dtype=float)
        p = apps.CadzowProblem(structure, shape, int(_need(config, "r", "config")), S0)
        trace = apps.cadzow_run(p, tol, policy)
        if "signal" in config:
            info["denoised"] = apps.signal_from_trajectory(trace.a[-1].reshape(shape)).tolist()
    wall = time.perf_counter() - t0
    settings = dict(DEFAULT_DIAG, **config.get("diagnostics", {}))
    summary = {
        "name": config.get("name", "experiment"),
        "algorithm": algo,
        "stop_reason": trace.stop_reason,
        "iterations": len(trace),
        "seed": seed,
        "tolerances": {"tol_proj": tol.tol_proj, "tol_step": tol.tol_step, "max_iter": tol.max_iter},
        "diagnostics_settings": settings,
        "diagnostics": run_diagnostics(trace, settings),
        "extras": dict(_extras(trace), **info),
        "wall_time": wall,
    }
    return trace, summary, extra_points


def exit_code(summary):
    return 2 if summary["stop_reason"] == "diverged" else 0

