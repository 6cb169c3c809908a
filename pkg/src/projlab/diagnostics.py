"""Trace diagnostics: gap, angle exponent, convergence rate, the three- and
four-point estimates, Hölder regularity, reach and a criticality residual.

Everything here can refute a regularity condition on a finite trace but
never certify it; reports should be read as "consistent with".
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import as_point

GAP_TOL = 1e-7
R_FLOOR = 1e-9
INFINITE = math.inf


# ---------------------------------------------------------------------------
# gap


@dataclass
class Gap:
    r_star: float
    a_clusters: list
    b_clusters: list
    feasible: bool


def cover_clusters(points, radius):
    """Greedy farthest-point covering: centers such that every point lies within `radius`."""
    P = np.asarray(points, dtype=float)
    if P.shape[0] == 0:
        return []
    centers = [0]
    dist = np.linalg.norm(P - P[0], axis=1)
    while True:
        j = int(np.argmax(dist))
        if dist[j] <= radius:
            break
        centers.append(j)
        dist = np.minimum(dist, np.linalg.norm(P - P[j], axis=1))
    return [P[j].copy() for j in centers]


def estimate_gap(trace, tail_fraction=0.25, cluster_radius=0.1, gap_tol=GAP_TOL):
    """(A*, B*, r*) estimated from the tail of an alternating trace."""
    if not 0 < tail_fraction <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    K = len(trace)
    if K == 0:
        raise ValueError("empty trace")
    r_star = float(np.min(trace.r))
    n_tail = max(1, int(math.ceil(tail_fraction * K)))
    a_tail = trace.a[K + 1 - n_tail:]
    b_tail = trace.b[K + 1 - n_tail:]
    return Gap(r_star, cover_clusters(a_tail, cluster_radius), cover_clusters(b_tail, cluster_radius),
               r_star <= gap_tol)


def winding_angle(points):
    """Total signed angle swept by the (x1, x2) projection of a point sequence."""
    P = np.asarray(points, dtype=float)
    th = np.unwrap(np.arctan2(P[:, 1], P[:, 0]))
    return float(th[-1] - th[0]) if th.size else 0.0


def angular_extent(points):
    """Length of the smallest arc of angles (about the x3-axis) containing all points."""
    P = np.asarray(points, dtype=float)
    if P.shape[0] < 2:
        return 0.0
    th = np.sort(np.mod(np.arctan2(P[:, 1], P[:, 0]), 2 * np.pi))
    gaps = np.diff(np.concatenate([th, [th[0] + 2 * np.pi]]))
    return float(2 * np.pi - gaps.max())


# ---------------------------------------------------------------------------
# angle exponent


@dataclass
class AngleFit:
    omega: float
    gamma: float
    theta: float
    n_points: int
    r_floor: float


def fit_angle_exponent(trace, gap, r_floor=R_FLOOR, min_blocks=8):
    """Fit 1 - cos(alpha_k) ~ gamma (r_k - r*)^omega over valid blocks.

    `trace` needs arrays `alpha` and `r`; `gap` is a Gap or a number r*.
    """
    r_star = gap.r_star if isinstance(gap, Gap) else float(gap)
    alpha = np.asarray(trace.alpha, dtype=float)
    dr = np.asarray(trace.r, dtype=float) - r_star
    one_minus_cos = 2.0 * np.sin(0.5 * np.clip(alpha, 0.0, None)) ** 2
    ok = (alpha >= 0) & (dr > r_floor) & (one_minus_cos > 0)
    n = int(ok.sum())
    if n < min_blocks:
        raise ValueError(f"angle fit needs >= {min_blocks} valid blocks, found {n}")
    x = np.log(dr[ok])
    y = np.log(one_minus_cos[ok])
    if np.ptp(x) == 0:
        omega = 0.0
    else:
        omega = float(np.polyfit(x, y, 1)[0])
    gamma = float(np.min(one_minus_cos[ok] / dr[ok] ** omega))
    return AngleFit(omega, gamma, (omega + 2.0) / 4.0, n, r_floor)


# ---------------------------------------------------------------------------
# rates


@dataclass
class RateFit:
    kind: str
    q: float | None = None
    rho: float | None = None
    r_squared: float = 1.0
    reference: np.ndarray | None = field(default=None, repr=False)
    n_points: int = 0


def _linfit(x, y):
    slope, icpt = np.polyfit(x, y, 1)
    res = y - (slope * x + icpt)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(res ** 2)) / ss if ss > 0 else 1.0
    return float(slope), min(max(r2, 0.0), 1.0)


def _log_spaced(idx, count=200):
    if idx.size <= count:
        return idx
    pos = np.unique(np.round(np.geomspace(1, idx.size, count)).astype(int) - 1)
    return idx[pos]


def fit_rate(series, drop_tail=0.25, window=None, min_points=20, skip_head=0):
    """Classify the convergence of `series` towards its final point.

    Distances d_k = ||x_k - x_final|| (k counted from 1) are used up to the
    last `drop_tail` fraction, without the first `skip_head` (a transient);
    optionally only the last `window` of them.
    Geometric (log d ~ k) and power (log d ~ log k) models are both fitted
    and the better r-squared wins.
    """
    X = np.asarray(series, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.shape[0] < min_points:
        raise ValueError(f"rate fit needs >= {min_points} points, got {X.shape[0]}")
    if not 0 <= drop_tail < 1:
        raise ValueError("drop_tail must lie in [0, 1)")
    ref = X[-1].copy()
    n_keep = min(X.shape[0] - 1, max(2, int(round(X.shape[0] * (1 - drop_tail)))))
    d = np.linalg.norm(X[:n_keep] - ref, axis=1)
    if np.any(d == 0):
        return RateFit("finite", r_squared=1.0, reference=ref, n_points=int(np.argmax(d == 0)) + 1)
    k = np.arange(1, n_keep + 1, dtype=float)
    idx = np.arange(min(int(skip_head), n_keep - 1), n_keep)
    if window is not None:
        idx = idx[-int(window):]
    if idx.size < 3:
        raise ValueError("too few usable points for a rate fit")
    logd = np.log(d)
    s_lin, r2_lin = _linfit(k[idx], logd[idx])
    pw = _log_spaced(idx)
    s_pow, r2_pow = _linfit(np.log(k[pw]), logd[pw])
    if r2_lin >= r2_pow and s_lin < 0:
        return RateFit("linear", q=math.exp(s_lin), r_squared=r2_lin, reference=ref, n_points=int(idx.size))
    return RateFit("sublinear", rho=-s_pow, r_squared=r2_pow, reference=ref, n_points=int(idx.size))


def predicted_rate(theta, r_star, gap_tol=GAP_TOL):
    """Rate class predicted from the Łojasiewicz exponent theta and the gap value.

    For r* > 0: theta = 1/2 finite, theta in (1/2, 3/4] linear, theta in
    (3/4, 1) power with rho = (1 - theta)/(2 theta - 3/2).  For r* = 0:
    theta = 1/2 linear, otherwise rho = (1 - theta)/(2 theta - 1).
    """
    theta = float(theta)
    if not 0.5 <= theta < 1.0:
        raise ValueError(f"theta must lie in [1/2, 1), got {theta}")
    if r_star > gap_tol:
        if theta == 0.5:
            return RateFit("finite")
        if theta <= 0.75:
            return RateFit("linear")
        return RateFit("sublinear", rho=(1 - theta) / (2 * theta - 1.5))
    if theta == 0.5:
        return RateFit("linear")
    return RateFit("sublinear", rho=(1 - theta) / (2 * theta - 1))


# ---------------------------------------------------------------------------
# three-point, four-point and Hölder estimates


@dataclass
class EstimateReport:
    checked: int
    violations: list
    ell_used: float | None = None

    @property
    def ok(self):
        return not self.violations


def three_point_ell(c, gamma):
    if not (c > 0 and gamma > 0):
        raise ValueError("c and gamma must be positive")
    if not c < gamma / 2:
        raise ValueError(f"three-point estimate needs c < gamma/2 (c={c}, gamma={gamma})")
    return min(0.5, 1 - math.sqrt(2 * c / gamma), c / (2 + c))


def _le(lhs, rhs, slack=1e-12):
    return lhs <= rhs + slack * max(1.0, abs(rhs))


def check_three_point(trace, c, gamma, r_star=0.0, ell=None):
    """||a+ - b+||^2 + l ||b - b+||^2 <= ||b - a+||^2 on every block.

    l defaults to min{1/2, 1 - sqrt(2c/gamma), c/(2+c)}; pass `ell` to test
    another constant.
    """
    ell = three_point_ell(c, gamma) if ell is None else float(ell)
    r, sb, cross = trace.r, trace.step_b, trace.cross
    viol = []
    for j in range(len(r)):
        lhs = r[j] ** 2 + ell * sb[j] ** 2
        rhs = cross[j] ** 2
        if not _le(lhs, rhs):
            viol.append((j + 1, float(lhs), float(rhs)))
    return EstimateReport(len(r), viol, ell)


def check_four_point(trace, ell, r_star=0.0):
    """d_B(a_k)^2 - d_B(a_{k+1})^2 >= l ||b_k - b_{k+1}||^2 for consecutive blocks."""
    if not ell > 0:
        raise ValueError("ell must be positive")
    r, sb = trace.r, trace.step_b
    viol = []
    for j in range(len(r) - 1):
        lhs = r[j] ** 2 - r[j + 1] ** 2
        rhs = ell * sb[j + 1] ** 2
        if not _le(rhs, lhs):
            viol.append((j + 1, float(lhs), float(rhs)))
    return EstimateReport(max(len(r) - 1, 0), viol, float(ell))


def holder_check(trace, c, sigma, gap, r_floor=R_FLOOR):
    """cos(beta_k) <= sqrt(c) (r_k - r*)^sigma whenever b_{k-1} lies in B(a_k, (1+c) r_k).

    As for the angle fit, blocks with r_k - r* <= r_floor are not checked.
    """
    if not (c > 0 and sigma > 0):
        raise ValueError("c and sigma must be positive")
    r_star = gap.r_star if isinstance(gap, Gap) else float(gap)
    r, beta, cross = trace.r, trace.beta, trace.cross
    viol, checked = [], 0
    for j in range(len(r)):
        if beta[j] < 0 or cross[j] > (1 + c) * r[j] or r[j] - r_star <= r_floor:
            continue
        checked += 1
        lhs = math.cos(beta[j])
        rhs = math.sqrt(c) * max(r[j] - r_star, 0.0) ** sigma
        if lhs > rhs + 1e-12:
            viol.append((j + 1, lhs, rhs))
    return EstimateReport(checked, viol)


# ---------------------------------------------------------------------------
# reach


def reach_along(B, b, d, R_max=1e3, tol=1e-10, tol_proj=1e-10):
    """R(b, d) = sup{R >= 0 : P_B(b + R d) = {b}}, by doubling then bisection.

    Returns math.inf when the predicate still holds at R_max.
    """
    b = as_point(b, B.dimension)
    d = as_point(d, B.dimension)
    nd = float(np.linalg.norm(d))
    if abs(nd - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    if B.project(b).distance > tol_proj:
        raise ValueError("base point is not in the set")

    def holds(R):
        res = B.project(b + R * d)
        if res.multivalued or len(res.points) > 1:
            return False
        return float(np.linalg.norm(res.point - b)) <= max(tol_proj, 1e-9 * R)

    lo, hi = 0.0, min(1.0, R_max)
    while holds(hi):
        if hi >= R_max:
            return INFINITE
        lo, hi = hi, min(2.0 * hi, R_max)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if holds(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def shrinking_reach_ratio(trace, B, sigma, gap, R_max=1e3, tol=1e-10, blocks=None):
    """(r_k - r*)^sigma / (R(b_k, d_k) - r*) with d_k = (a_k - b_k)/r_k, per block.

    Blocks with r_k = 0 give nan.  `blocks` optionally restricts to a list of k.
    """
    r_star = gap.r_star if isinstance(gap, Gap) else float(gap)
    ks = range(1, len(trace) + 1) if blocks is None else blocks
    out = []
    for k in ks:
        a, b, r = trace.a[k], trace.b[k], trace.r[k - 1]
        if r <= 0:
            out.append(math.nan)
            continue
        R = reach_along(B, b, (a - b) / r, R_max, tol)
        num = max(r - r_star, 0.0) ** sigma
        out.append(0.0 if math.isinf(R) else num / (R - r_star) if R > r_star else math.inf)
    return out


def tau_estimate(ratios):
    """Max ratio over the last quartile: the finite-trace stand-in for a limsup."""
    v = np.asarray(ratios, dtype=float)
    v = v[-max(1, v.size // 4):]
    v = v[~np.isnan(v)]
    return float(v.max()) if v.size else math.nan


# ---------------------------------------------------------------------------
# criticality


def criticality_residual(a, prev_b, A, B, r_star, tol_member=1e-8):
    """min over lambda >= 0 of ||lambda u + w|| with u = prev_b - a and
    w = (1 - r*/d_B(a)) (a - P_B(a)).

    A small value is consistent with a being an approximate Fréchet-critical
    point of i_A + (d_B - r*)^2 / 2.
    """
    a = as_point(a, A.dimension)
    prev_b = as_point(prev_b, A.dimension)
    if A.project(a).distance > tol_member * max(1.0, float(np.linalg.norm(a))):
        raise ValueError("a is not in A")
    res = B.project(a)
    dB = res.distance
    if dB == 0:
        raise ValueError("d_B(a) = 0: the residual is undefined in the feasible case")
    w = (1.0 - r_star / dB) * (a - res.point)
    u = prev_b - a
    uu = float(u @ u)
    lam = max(0.0, -float(u @ w) / uu) if uu > 0 else 0.0
    return float(np.linalg.norm(lam * u + w))


# ---------------------------------------------------------------------------
# report


@dataclass
class DiagnosticsReport:
    gap: Gap | None = None
    angle: AngleFit | None = None
    rate: RateFit | None = None
    predicted: RateFit | None = None
    three_point: EstimateReport | None = None
    four_point: EstimateReport | None = None
    holder: EstimateReport | None = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        out = {}
        for name in ("gap", "angle", "rate", "predicted", "three_point", "four_point", "holder"):
            v = getattr(self, name)
            out[name] = None if v is None else _jsonable(v)
        out["notes"] = list(self.notes)
        return out


def _jsonable(obj):
    if isinstance(obj, Gap):
        return {"r_star": obj.r_star, "a_clusters": len(obj.a_clusters),
                "b_clusters": len(obj.b_clusters), "feasible": obj.feasible}
    if isinstance(obj, RateFit):
        return {"kind": obj.kind, "q": obj.q, "rho": obj.rho, "r_squared": obj.r_squared,
                "n_points": obj.n_points,
                "reference": None if obj.reference is None else [float(v) for v in obj.reference]}
    if isinstance(obj, EstimateReport):
        return {"checked": obj.checked, "ell_used": obj.ell_used,
                "violations": [list(v) for v in obj.violations]}
    return asdict(obj)
