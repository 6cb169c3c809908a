"""Registry of named experiments; each entry is an ordinary config."""

from __future__ import annotations

import copy

AXIS = {"family": "axis", "dim": 2, "axis": 0}

_REGISTRY = {
    "parabola-gap": {
        "algorithm": "ap",
        "sets": [AXIS, {"family": "epigraph-quadratic", "a0": 1.0, "a2": 1.0}],
        "start": [1.0, 0.0],
        "tolerances": {"max_iter": 10000},
        "diagnostics": {"rate_window": 50, "holder": [0.25, 0.5]},
    },
    "parabola-tangent": {
        "algorithm": "ap",
        "sets": [AXIS, {"family": "epigraph-quadratic", "a0": 0.0, "a2": 1.0}],
        "start": [1.0, 0.0],
        "tolerances": {"max_iter": 100000},
        "diagnostics": {"rate_drop_tail": 0.99},
    },
    "spiral": {
        "algorithm": "ap",
        "sets": [{"family": "spiral"}, {"family": "cylinder"}],
        "start": {"curve": "spiral", "t": 1.0},
        "tolerances": {"max_iter": 100000},
        "diagnostics": {"cluster_radius": 0.2, "three_point": None, "four_point": None},
    },
    "double-spiral": {
        "algorithm": "dr",
        "sets": [{"family": "double-spiral"}, {"family": "cylinder"}],
        "start": {"curve": "inner-spiral", "t": 1.0},
        "tolerances": {"max_iter": 10000},
        "diagnostics": {"cluster_radius": 0.2, "three_point": None, "four_point": None},
    },
    "gs-2pixel": {
        "algorithm": "gs",
        "sets": [{"family": "lifted", "which": "A_spiral"}, {"family": "lifted", "which": "B_cyl"}],
        "start": {"lift": {"curve": "spiral", "t": 1.0}},
        "tolerances": {"max_iter": 10000},
        "diagnostics": {"cluster_radius": 0.2, "three_point": None, "four_point": None},
    },
    "hio-2pixel": {
        "algorithm": "dr",
        "sets": [{"family": "lifted", "which": "A_double"}, {"family": "lifted", "which": "B_cyl"}],
        "start": {"lift": {"curve": "inner-spiral", "t": 1.0}},
        "tolerances": {"max_iter": 10000},
        "diagnostics": {"cluster_radius": 0.2, "three_point": None, "four_point": None},
    },
    "cadzow-ex2": {
        "algorithm": "cadzow",
        "structure": {"family": "affine", "origin": [1, -1, 2, -2], "directions": [[1, 0, 1, 1]]},
        "shape": [2, 2],
        "r": 1,
        "S0": [[1.5, -1.0], [2.5, -1.5]],
        "tolerances": {"max_iter": 20000},
        "diagnostics": {"rate_drop_tail": 0.9, "rate_skip_head": 100, "three_point": None, "four_point": None},
    },
    "cadzow-escape": {
        "algorithm": "cadzow",
        "structure": {"family": "affine", "origin": [0, 1, 1, 0], "directions": [[1, 0, 0, 0]]},
        "shape": [2, 2],
        "r": 1,
        "S0": [[1.0, 1.0], [1.0, 0.0]],
        "tolerances": {"max_iter": 10000},
        "diagnostics": {"three_point": None, "four_point": None},
    },
    "cadzow-denoise-demo": {
        "algorithm": "cadzow",
        "signal": {"L": 64, "freq": 0.3, "noise": 0.1},
        "window": 32,
        "r": 2,
        "tolerances": {"max_iter": 10000},
        "diagnostics": {"three_point": None, "four_point": None},
    },
    "em-demo": {
        "algorithm": "em",
        "C": [[1.0, 1.0]],
        "y": [4.0],
        "omega": {"intervals": [[[0, 0], [1, 2]], [[0, 0], [1, 2]]]},
        "start": [0.0, 1.0],
        "tolerances": {"max_iter": 10000},
        "diagnostics": {"three_point": None, "four_point": None},
    },
    "averaged-demo": {
        "algorithm": "averaged",
        "sets": [
            {"family": "sphere", "center": [0.0, 0.0]},
            {"family": "sphere", "center": [1.5, 0.0]},
            {"family": "sphere", "center": [0.0, 1.5]},
        ],
        "start": {"random": {"dim": 2, "scale": 1.0}},
        "tolerances": {"max_iter": 100000},
        "diagnostics": {"three_point": None, "four_point": None},
    },
}

PRESET_NAMES = tuple(_REGISTRY)


def preset(name):
    """A fresh copy of the named config."""
    if name not in _REGISTRY:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    cfg = copy.deepcopy(_REGISTRY[name])
    cfg["name"] = name
    return cfg
