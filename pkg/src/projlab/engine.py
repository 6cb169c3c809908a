"""Iteration drivers: alternating projections and relatives.

A trace stores the two sequences as arrays.  Row 0 holds the start a_0 and
b_0 = P_B(a_0); record k >= 1 describes the building block
b_{k-1} -> a_k -> b_k.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import ProjectionResult, TiePolicy, Tolerances, as_point, resolve
from .sets import ParamCurve, SetDescriptor, param_curve_set, product_set

DIVERGENCE_NORM = 1e8
STOP_REASONS = ("max_iter", "stationary", "diverged")


class IterationError(RuntimeError):
    """A projector failed; `k` is the iteration at which it happened."""

    def __init__(self, k, cause):
        super().__init__(f"projection failed at iteration {k}: {cause}")
        self.k = k
        self.cause = cause


@dataclass(frozen=True)
class TraceRecord:
    k: int
    a: np.ndarray
    b: np.ndarray
    r: float
    step_a: float
    step_b: float
    alpha: float
    beta: float
    multivalued_hit: bool


def _angles(p, u, v, tol):
    """Angles at vertices p between legs u - p and v - p, row by row.

    Uses the half-angle form 2 atan2(|e_u - e_v|, |e_u + e_v|), which stays
    accurate for tiny angles; legs shorter than `tol` give the sentinel -1.
    """
    du = u - p
    dv = v - p
    nu = np.linalg.norm(du, axis=1)
    nv = np.linalg.norm(dv, axis=1)
    ok = (nu >= tol) & (nv >= tol)
    eu = du / np.where(ok, nu, 1.0)[:, None]
    ev = dv / np.where(ok, nv, 1.0)[:, None]
    ang = 2.0 * np.arctan2(np.linalg.norm(eu - ev, axis=1), np.linalg.norm(eu + ev, axis=1))
    return np.where(ok, ang, -1.0)


@dataclass
class Trace:
    """Sequences a_0..a_K, b_0..b_K of an alternating run plus per-block data."""

    a: np.ndarray
    b: np.ndarray
    multivalued: np.ndarray
    stop_reason: str
    tol: Tolerances = field(default_factory=Tolerances)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.multivalued = np.asarray(self.multivalued, dtype=bool)
        if self.a.shape != self.b.shape or self.a.ndim != 2:
            raise ValueError("a and b must be (K+1, n) arrays of equal shape")
        if self.multivalued.size != self.a.shape[0] - 1:
            raise ValueError("one multivalued flag per record expected")
        if self.stop_reason not in STOP_REASONS:
            raise ValueError(f"unknown stop reason {self.stop_reason!r}")
        a, b = self.a, self.b
        self.r = np.linalg.norm(a[1:] - b[1:], axis=1)
        self.step_a = np.linalg.norm(np.diff(a, axis=0), axis=1)
        self.step_b = np.linalg.norm(np.diff(b, axis=0), axis=1)
        self.alpha = _angles(a[1:], b[:-1], b[1:], self.tol.tol_step)
        self.beta = _angles(b[1:], a[1:], b[:-1], self.tol.tol_step)

    def __len__(self):
        return self.a.shape[0] - 1

    @property
    def start(self):
        return self.a[0]

    @property
    def k(self):
        return np.arange(1, len(self) + 1)

    @property
    def dimension(self):
        return self.a.shape[1]

    @property
    def cross(self):
        """d_k = ||b_{k-1} - a_k||, the distance before the k-th A-step."""
        return np.linalg.norm(self.b[:-1] - self.a[1:], axis=1)

    def record(self, k):
        if not 1 <= k <= len(self):
            raise IndexError(k)
        j = k - 1
        return TraceRecord(k, self.a[k], self.b[k], float(self.r[j]), float(self.step_a[j]),
                           float(self.step_b[j]), float(self.alpha[j]), float(self.beta[j]),
                           bool(self.multivalued[j]))

    @property
    def records(self):
        return [self.record(k) for k in range(1, len(self) + 1)]


def _pick(result, policy):
    if len(result.points) == 1:
        return result.points[0], result
    res = resolve(result, policy)
    return res.point, res


def _sq(x):
    return math.sqrt(float(x @ x))


def _project(S, q, k):
    try:
        return S.projector(q)
    except Exception as exc:  # noqa: BLE001 - re-raised with the iteration index
        raise IterationError(k, exc) from exc


def _finish(a_list, b_list, mv, reason, tol, **info):
    return Trace(np.array(a_list), np.array(b_list), np.array(mv, dtype=bool), reason, tol, info)


def run_alternating(A, B, a0, tol=Tolerances(), policy=TiePolicy(), on_a=None):
    """Alternating projections b_k in P_B(a_k), a_{k+1} in P_A(b_k).

    Stops when both consecutive steps drop below tol_step, when ||a_k||
    exceeds 1e8, or after max_iter blocks.  `on_a(k, result)` is an optional
    hook receiving every A-projection (used to record curve parameters).
    """
    if A.dimension != B.dimension:
        raise ValueError(f"set dimensions differ: {A.dimension} vs {B.dimension}")
    a = as_point(a0, A.dimension)
    b, res = _pick(_project(B, a, 0), policy)
    a_list, b_list, mv = [a], [b], []
    reason = "max_iter"
    for k in range(1, tol.max_iter + 1):
        res_a = _project(A, b, k)
        a_new, res_a = _pick(res_a, policy)
        if on_a is not None:
            on_a(k, res_a)
        res_b = _project(B, a_new, k)
        b_new, res_b = _pick(res_b, policy)
        sa, sb = _sq(a_new - a), _sq(b_new - b)
        a, b = a_new, b_new
        a_list.append(a)
        b_list.append(b)
        mv.append(res_a.multivalued or res_b.multivalued)
        if _sq(a) > DIVERGENCE_NORM:
            reason = "diverged"
            break
        if sa < tol.tol_step and sb < tol.tol_step:
            reason = "stationary"
            break
    return _finish(a_list, b_list, mv, reason, tol)


def enforce_prox_block(prev_b, a_candidate, prev_a, slack=1e-12):
    """Distance-decrease half of a prox block: ||b_{k-1} - a_k|| <= ||b_{k-1} - a_{k-1}||.

    The normal-cone half holds by construction for points returned by a
    global or warm-started local projector.
    """
    prev_b = np.asarray(prev_b, dtype=float)
    d_new = _sq(prev_b - np.asarray(a_candidate, dtype=float))
    d_old = _sq(prev_b - np.asarray(prev_a, dtype=float))
    return d_new <= d_old + slack * max(1.0, d_old)


def _param_of(result):
    """Curve parameter carried by a projection result, if any."""
    p = result.param
    if isinstance(p, tuple):  # union member (index, t)
        p = p[1]
    return p


def run_local_alternating(A, B, a0, t0, tol=Tolerances(), policy=TiePolicy()):
    """Local alternating projections: A-steps by warm-started descent.

    `A` is a ParamCurve or a SetDescriptor with a local projector
    (q, t_prev) -> (point, t).  When the local step fails the decrease
    requirement the global projector is used instead; trace.info records
    which certificate ("local" or "global") applies to every block.
    """
    if isinstance(A, ParamCurve):
        A = param_curve_set(A)
    if A.local_projector is None:
        raise ValueError("set has no warm-startable local projector")
    if A.dimension != B.dimension:
        raise ValueError(f"set dimensions differ: {A.dimension} vs {B.dimension}")
    a = as_point(a0, A.dimension)
    t = float(t0)
    b, _ = _pick(_project(B, a, 0), policy)
    a_list, b_list, mv, cert, params = [a], [b], [], [], [t]
    reason = "max_iter"
    for k in range(1, tol.max_iter + 1):
        try:
            a_new, t_new = A.local_projector(b, t)
        except Exception as exc:  # noqa: BLE001
            raise IterationError(k, exc) from exc
        a_new = np.asarray(a_new, dtype=float)
        hit = False
        if enforce_prox_block(b, a_new, a):
            cert.append("local")
        else:
            res = _project(A, b, k)
            a_new, res = _pick(res, policy)
            hit = res.multivalued
            tp = _param_of(res)
            t_new = t if tp is None else float(tp)
            cert.append("global")
        t = float(t_new)
        res_b = _project(B, a_new, k)
        b_new, res_b = _pick(res_b, policy)
        sa, sb = _sq(a_new - a), _sq(b_new - b)
        a, b = a_new, b_new
        a_list.append(a)
        b_list.append(b)
        params.append(t)
        mv.append(hit or res_b.multivalued)
        if _sq(a) > DIVERGENCE_NORM:
            reason = "diverged"
            break
        if sa < tol.tol_step and sb < tol.tol_step:
            reason = "stationary"
            break
    return _finish(a_list, b_list, mv, reason, tol, certificate=cert, params=np.array(params))


@dataclass
class DRTrace:
    """Douglas-Rachford governing sequence x_k with shadows P_B(x_k) and P_A(2P_B(x_k) - x_k)."""

    x: np.ndarray
    shadow_b: np.ndarray
    shadow_a: np.ndarray
    stop_reason: str
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (len(self.x) == len(self.shadow_b) == len(self.shadow_a)):
            raise ValueError("x and shadows must have equal length")

    def __len__(self):
        return len(self.x)

    @property
    def steps(self):
        return np.linalg.norm(np.diff(self.x, axis=0), axis=1)


def run_douglas_rachford(A, B, x0, tol=Tolerances(), policy=TiePolicy(), reverse=False):
    """x+ = x + P_A(2 P_B(x) - x) - P_B(x); `reverse` swaps the roles of A and B."""
    if reverse:
        A, B = B, A
    if A.dimension != B.dimension:
        raise ValueError(f"set dimensions differ: {A.dimension} vs {B.dimension}")
    x = as_point(x0, A.dimension)
    xs, sb, sa = [], [], []
    reason = "max_iter"
    for k in range(tol.max_iter + 1):
        pb, _ = _pick(_project(B, x, k), policy)
        pa, _ = _pick(_project(A, 2.0 * pb - x, k), policy)
        xs.append(x)
        sb.append(pb)
        sa.append(pa)
        if k == tol.max_iter or reason != "max_iter":
            break
        x_new = x + pa - pb
        if _sq(x_new) > DIVERGENCE_NORM:
            reason = "diverged"
        elif _sq(x_new - x) < tol.tol_step:
            reason = "stationary"
        x = x_new
    return DRTrace(np.array(xs), np.array(sb), np.array(sa), reason, {"reverse": reverse})


def run_averaged(components, x0, tol=Tolerances(), policy=TiePolicy()):
    """Averaged projections x+ = mean_i P_{C_i}(x), as alternating projections
    between the product C_1 x ... x C_m and the diagonal.

    trace.a holds the stacked component projections, trace.b the replicated
    average; trace.info["x"] is the sequence of averages.
    """
    components = tuple(components)
    P = product_set(components)
    D = P.params.get("diagonal")
    if D is None:
        raise ValueError("averaged projections need components of one dimension")
    n, m = components[0].dimension, len(components)
    x0 = as_point(x0, n)
    tr = run_alternating(P, D, np.tile(x0, m), tol, policy)
    tr.info["x"] = tr.b[:, :n].copy()
    tr.info["m"] = m
    return tr


def projections_at(A, q, policy=TiePolicy()):
    """Convenience: the selected point of P_A(q)."""
    return _pick(A.project(q), policy)[0]


__all__ = [
    "DIVERGENCE_NORM", "DRTrace", "IterationError", "ProjectionResult", "SetDescriptor",
    "Trace", "TraceRecord", "enforce_prox_block", "projections_at", "run_alternating",
    "run_averaged", "run_douglas_rachford", "run_local_alternating",
]
