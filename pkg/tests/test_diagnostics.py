import json
import math
from types import SimpleNamespace

import numpy as np
import pytest

from projlab.core import Tolerances
from projlab.diagnostics import (
    DiagnosticsReport, Gap, angular_extent, check_four_point, check_three_point, cover_clusters,
    criticality_residual, estimate_gap, fit_angle_exponent, fit_rate, holder_check, predicted_rate,
    reach_along, shrinking_reach_ratio, tau_estimate, three_point_ell, winding_angle,
)
from projlab.engine import run_alternating
from projlab.sets import (
    circle_F, coordinate_axis, epigraph_quadratic_set, param_curve_set, power_curve, sphere_product_set,
)

PARABOLA = epigraph_quadratic_set(1.0, 1.0)


# ---------------------------------------------------------------------------
# gap and clusters


def test_gap_of_parabola(parabola_gap_trace):
    g = estimate_gap(parabola_gap_trace)
    assert g.r_star == pytest.approx(1.0, abs=1e-10)
    assert len(g.a_clusters) == len(g.b_clusters) == 1
    assert not g.feasible
    assert np.allclose(g.b_clusters[0], [0.0, 1.0], atol=0.1)


def test_gap_feasible_case():
    tr = run_alternating(coordinate_axis(), coordinate_axis(2, 1), [2.0, 3.0])
    g = estimate_gap(tr)
    assert g.feasible and g.r_star == 0.0


def test_gap_errors(parabola_gap_trace):
    with pytest.raises(ValueError):
        estimate_gap(parabola_gap_trace, tail_fraction=0.0)


def test_cover_clusters_covers(rng):
    P = rng.uniform(-1, 1, (300, 2))
    centers = cover_clusters(P, 0.3)
    d = np.min(np.linalg.norm(P[:, None, :] - np.array(centers)[None], axis=2), axis=1)
    assert np.all(d <= 0.3)
    assert cover_clusters(np.zeros((0, 2)), 1.0) == []
    assert len(cover_clusters(np.zeros((5, 3)), 0.1)) == 1


def test_winding_and_extent():
    t = np.linspace(0, 4 * np.pi, 401)
    P = np.column_stack([np.cos(t), np.sin(t), t])
    assert winding_angle(P) == pytest.approx(4 * np.pi)
    assert angular_extent(P) == pytest.approx(2 * np.pi, abs=0.05)
    arc = P[(t >= 1.0) & (t <= 1.5)]
    assert angular_extent(arc) == pytest.approx(0.5, abs=0.04)
    # an arc crossing the branch cut
    s = np.linspace(-0.2, 0.2, 11)
    assert angular_extent(np.column_stack([np.cos(s), np.sin(s)])) == pytest.approx(0.4)


# ---------------------------------------------------------------------------
# angle fit


def _synthetic(alpha, r, step_b=None, cross=None, beta=None):
    n = len(r)
    return SimpleNamespace(alpha=np.asarray(alpha), r=np.asarray(r),
                           step_b=np.zeros(n) if step_b is None else np.asarray(step_b),
                           cross=np.asarray(r) if cross is None else np.asarray(cross),
                           beta=np.full(n, -1.0) if beta is None else np.asarray(beta))


def test_angle_fit_synthetic_power_law():
    r = 1.0 + np.geomspace(1e-1, 1e-6, 40)
    one_minus_cos = 3.0 * (r - 1.0) ** 1.5
    alpha = np.arccos(1.0 - one_minus_cos)
    f = fit_angle_exponent(_synthetic(alpha, r), 1.0)
    assert f.omega == pytest.approx(1.5, abs=1e-6)
    assert f.gamma == pytest.approx(3.0, rel=1e-5)
    assert f.theta == pytest.approx(0.875, abs=1e-6)


def test_angle_fit_skips_sentinels_and_floor():
    r = np.concatenate([1.0 + np.geomspace(1e-1, 1e-4, 10), [1.0, 1.0]])
    alpha = np.concatenate([np.arccos(2.0 - r[:10]), [-1.0, 0.3]])
    f = fit_angle_exponent(_synthetic(alpha, r), Gap(1.0, [], [], False))
    assert f.n_points == 10
    assert f.omega == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        fit_angle_exponent(_synthetic(alpha[:5], r[:5]), 1.0)


def test_angle_fit_parabola_gap(parabola_gap_trace):
    g = estimate_gap(parabola_gap_trace)
    f = fit_angle_exponent(parabola_gap_trace, g)
    assert f.theta == pytest.approx(0.75, abs=0.05)


# ---------------------------------------------------------------------------
# rates


def test_fit_rate_geometric():
    x = 0.5 ** np.arange(1, 61)
    f = fit_rate(x, drop_tail=0.25)
    assert f.kind == "linear" and f.q == pytest.approx(0.5, rel=1e-6)


def test_fit_rate_power():
    # the final point stands in for the limit, so the series must run far past the fitted range
    k = np.arange(1, 10**6 + 1, dtype=float)
    f = fit_rate(k ** -0.5, drop_tail=0.99)
    assert f.kind == "sublinear" and f.rho == pytest.approx(0.5, abs=0.05)
    assert f.r_squared > 0.99


def test_fit_rate_finite():
    x = np.concatenate([[3.0, 2.0, 1.5], np.ones(30)])
    assert fit_rate(x).kind == "finite"


def test_fit_rate_window_and_errors():
    x = np.concatenate([0.9 ** np.arange(1, 51), 0.5 ** np.arange(1, 51) * 0.9 ** 50])
    f = fit_rate(x, drop_tail=0.1, window=30)
    assert f.kind == "linear" and f.q == pytest.approx(0.5, rel=1e-3)
    with pytest.raises(ValueError):
        fit_rate(np.ones(5))
    with pytest.raises(ValueError):
        fit_rate(np.arange(30.0), drop_tail=1.0)


def test_fit_rate_vector_series():
    X = np.outer(0.7 ** np.arange(1, 41), [1.0, -2.0])
    assert fit_rate(X).q == pytest.approx(0.7, rel=1e-3)


@pytest.mark.parametrize("theta,r_star,kind,rho", [
    (0.5, 1.0, "finite", None),
    (0.6, 1.0, "linear", None),
    (0.75, 1.0, "linear", None),
    (0.8, 1.0, "sublinear", 0.2 / 0.1),
    (0.9, 1.0, "sublinear", 0.1 / 0.3),
    (0.5, 0.0, "linear", None),
    (0.75, 0.0, "sublinear", 0.5),
    (0.9, 0.0, "sublinear", 0.125),
])
def test_predicted_rate_table(theta, r_star, kind, rho):
    p = predicted_rate(theta, r_star)
    assert p.kind == kind
    if rho is not None:
        assert p.rho == pytest.approx(rho)


def test_predicted_rate_domain():
    for bad in (0.4, 1.0):
        with pytest.raises(ValueError):
            predicted_rate(bad, 0.0)


# ---------------------------------------------------------------------------
# estimates


def test_three_point_ell():
    assert three_point_ell(0.1, 1.0) == pytest.approx(0.1 / 2.1)
    assert three_point_ell(0.01, 1.0) == pytest.approx(0.01 / 2.01)
    assert three_point_ell(0.4, 1.0) == pytest.approx(1 - math.sqrt(0.8))
    with pytest.raises(ValueError):
        three_point_ell(0.5, 1.0)
    with pytest.raises(ValueError):
        three_point_ell(0.0, 1.0)


def test_estimates_hold_on_parabola(parabola_gap_trace):
    tr = parabola_gap_trace
    f = fit_angle_exponent(tr, estimate_gap(tr))
    c = f.gamma / 4
    three = check_three_point(tr, c, f.gamma, r_star=1.0)
    assert three.ok and three.checked == len(tr)
    four = check_four_point(tr, three.ell_used, r_star=1.0)
    assert four.ok and four.checked == len(tr) - 1


def test_estimates_detect_violations():
    # ||b - a+|| = r so the three-point inequality fails as soon as the B-step is nonzero
    r = np.ones(3)
    t = _synthetic(np.zeros(3), r, step_b=[0.0, 1.0, 1.0], cross=r)
    rep = check_three_point(t, 0.1, 1.0)
    assert [v[0] for v in rep.violations] == [2, 3]
    rep = check_four_point(_synthetic(np.zeros(3), [1.0, 1.0, 1.0], step_b=[0.0, 0.5, 0.0]), 0.1)
    assert [v[0] for v in rep.violations] == [1]
    with pytest.raises(ValueError):
        check_four_point(t, 0.0)


def test_holder_check(parabola_gap_trace):
    rep = holder_check(parabola_gap_trace, 0.25, 0.5, estimate_gap(parabola_gap_trace))
    assert rep.ok and rep.checked > 0
    # a right angle at b never violates, a tiny one does
    t = _synthetic(np.zeros(2), [2.0, 2.0], cross=[2.0, 2.0], beta=[math.pi / 2, 0.01])
    rep = holder_check(t, 0.01, 1.0, 1.0)
    assert rep.checked == 2 and [v[0] for v in rep.violations] == [2]
    with pytest.raises(ValueError):
        holder_check(t, 0.0, 1.0, 1.0)


# ---------------------------------------------------------------------------
# reach


def test_reach_circle():
    F = circle_F()
    assert reach_along(F, [1, 0, 0], [-1, 0, 0]) == pytest.approx(1.0, abs=1e-9)
    assert math.isinf(reach_along(F, [1, 0, 0], [1, 0, 0]))
    assert math.isinf(reach_along(F, [1, 0, 0], [0, 0, 1], R_max=50))


def test_reach_affine_and_sphere_product():
    assert math.isinf(reach_along(coordinate_axis(), [3.0, 0.0], [0.0, 1.0]))
    S = sphere_product_set([1.0, 1.0])
    d = np.array([-1.0, 0.0, -1.0, 0.0]) / math.sqrt(2)
    assert reach_along(S, [1, 0, 1, 0], d) == pytest.approx(math.sqrt(2), abs=1e-9)


def test_reach_errors():
    with pytest.raises(ValueError):
        reach_along(circle_F(), [2, 0, 0], [1, 0, 0])
    with pytest.raises(ValueError):
        reach_along(circle_F(), [1, 0, 0], [2, 0, 0])


@pytest.mark.parametrize("x", [0.01, 0.04, 0.09])
def test_reach_power_curve_matches_bottleneck(x):
    # the reach of y = |x|^(3/2) above (x, x^1.5) along the normal is set by the
    # mirror point: the normal line meets the y-axis at height x^1.5 + x / (1.5 sqrt x)
    S = param_curve_set(power_curve(1.5))
    b = np.array([x, x ** 1.5])
    n = np.array([-1.5 * math.sqrt(x), 1.0])
    n /= np.linalg.norm(n)
    R = reach_along(S, b, n, R_max=10.0, tol=1e-9)
    expected = (2 / 3) * math.sqrt(x) * math.sqrt(1 + 9 * x / 4)
    assert R == pytest.approx(expected, rel=1e-6)


def test_shrinking_reach_ratio_and_tau():
    tr = run_alternating(coordinate_axis(3, 2), circle_F(), [0.2, 0.0, 1.0], Tolerances(max_iter=3))
    ratios = shrinking_reach_ratio(tr, circle_F(), 1.0, 0.0, R_max=10.0)
    assert len(ratios) == len(tr)
    assert all(np.isnan(v) or v >= 0 for v in ratios)
    assert tau_estimate([1.0, 2.0, 0.5, 0.25]) == 0.25
    assert math.isnan(tau_estimate([math.nan]))


# ---------------------------------------------------------------------------
# criticality and report


def test_criticality_residual(parabola_gap_trace):
    tr = parabola_gap_trace
    A = coordinate_axis()
    assert criticality_residual(tr.a[-1], tr.b[-2], A, PARABOLA, 1.0) <= 1e-6
    # an exact critical point and a non-critical one
    assert criticality_residual([0.0, 0.0], [0.0, 1.0], A, PARABOLA, 1.0) == 0.0
    assert criticality_residual([1.0, 0.0], [1.0, 1.5], A, PARABOLA, 1.0) > 0.01
    with pytest.raises(ValueError):
        criticality_residual([0.0, 1.0], [0.0, 1.0], A, PARABOLA, 1.0)


def test_report_is_json_serialisable(parabola_gap_trace):
    g = estimate_gap(parabola_gap_trace)
    rep = DiagnosticsReport(gap=g, angle=fit_angle_exponent(parabola_gap_trace, g),
                            rate=fit_rate(parabola_gap_trace.a), notes=["x"])
    d = json.loads(json.dumps(rep.to_dict()))
    assert d["gap"]["b_clusters"] == 1 and d["holder"] is None and d["notes"] == ["x"]
