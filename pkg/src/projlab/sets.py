"""Closed sets with exact or numeric nearest-point projectors.

Every set is a :class:`SetDescriptor`; its ``project`` method returns a
:class:`~projlab.core.ProjectionResult`.  Matrices are handled as flattened
(row-major) points together with their shape.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from .core import ProjectionResult, as_point, distance, from_complex, to_complex

FAMILIES = (
    "affine", "box-product", "sphere-product", "epigraph-quadratic", "low-rank",
    "toeplitz", "sparsity", "sparse-phase", "support", "nonneg-real", "cylinder",
    "param-curve", "product", "lifted", "union", "custom",
)

_BLOCK = 64

# relative slack used to decide that two moduli / singular values are tied
TIE_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class SetDescriptor:
    family: str
    dimension: int
    params: dict
    projector: Callable = field(repr=False)
    local_projector: Callable | None = field(default=None, repr=False)

    def project(self, q):
        q = as_point(q, self.dimension)
        return self.projector(q)

    def residual(self, p):
        """Membership residual: distance from p to the set."""
        return self.project(p).distance

    def contains(self, p, tol=1e-10):
        return self.residual(p) <= tol


# ---------------------------------------------------------------------------
# affine sets


def affine_set(origin, directions=()):
    """A = origin + span(directions); directions must be linearly independent."""
    origin = as_point(origin)
    D = np.asarray(directions, dtype=float).reshape(-1, origin.size) if len(directions) else np.zeros((0, origin.size))
    if D.shape[0]:
        if np.linalg.matrix_rank(D) < D.shape[0]:
            raise ValueError("affine directions are linearly dependent")
        G = D @ D.T
    else:
        G = np.zeros((0, 0))
    S = SetDescriptor("affine", origin.size, {"origin": origin, "directions": D, "gram": G}, None)
    object.__setattr__(S, "projector", lambda q: project_affine(S, q))
    return S


def project_affine(S, q):
    o = S.params["origin"]
    D = S.params["directions"]
    q = np.asarray(q, dtype=float)
    if D.shape[0] == 0:
        return ProjectionResult.single(o.copy(), q)
    coef = np.linalg.solve(S.params["gram"], D @ (q - o))
    p = o + coef @ D
    return ProjectionResult.single(p, q)


def coordinate_axis(dim=2, axis=0):
    e = np.zeros(dim)
    e[axis] = 1.0
    return affine_set(np.zeros(dim), [e])


def support_set(N, support):
    """Signals in C^N (interleaved) vanishing outside the index set `support`."""
    mask = np.zeros(2 * N, dtype=bool)
    for t in support:
        if not 0 <= t < N:
            raise ValueError(f"support index {t} outside 0..{N - 1}")
        mask[2 * t: 2 * t + 2] = True

    def proj(q):
        return ProjectionResult.single(np.where(mask, q, 0.0), q)

    return SetDescriptor("support", 2 * N, {"N": N, "support": tuple(sorted(support))}, proj)


# ---------------------------------------------------------------------------
# magnitude / sphere products


@dataclass(frozen=True)
class MagnitudeSpec:
    m: tuple

    def __post_init__(self):
        m = tuple(float(v) for v in self.m)
        if any(v < 0 or not math.isfinite(v) for v in m):
            raise ValueError("magnitudes must be finite and >= 0")
        object.__setattr__(self, "m", m)

    @property
    def N(self):
        return len(self.m)

    @property
    def norm_m(self):
        return float(np.linalg.norm(self.m))


def project_sphere_product(spec, q):
    """Scale every complex pair of q to modulus m(w); pair (0,0) goes to (m(w), 0)."""
    m = np.asarray(spec.m)
    q = np.asarray(q, dtype=float)
    if q.size != 2 * m.size:
        raise ValueError(f"expected dimension {2 * m.size}, got {q.size}")
    pairs = q.reshape(-1, 2)
    rho = np.hypot(pairs[:, 0], pairs[:, 1])
    zero = rho == 0.0
    safe = np.where(zero, 1.0, rho)
    out = pairs * (m / safe)[:, None]
    out[zero] = np.column_stack([m[zero], np.zeros(zero.sum())])
    multivalued = bool(np.any(zero & (m > 0)))
    return ProjectionResult.single(out.reshape(-1), q, multivalued=multivalued)


def sphere_product_set(m):
    spec = m if isinstance(m, MagnitudeSpec) else MagnitudeSpec(tuple(m))
    return SetDescriptor("sphere-product", 2 * spec.N, {"spec": spec},
                         lambda q: project_sphere_product(spec, q))


def unit_circle():
    return sphere_product_set([1.0])


def sphere_set(center, radius=1.0):
    """Sphere {x : |x - center| = radius}; the center itself maps to center + radius e_1 (flagged)."""
    c = as_point(center)
    if not radius >= 0:
        raise ValueError("radius must be >= 0")

    def proj(q):
        v = q - c
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            e = np.zeros_like(c)
            e[0] = 1.0
            return ProjectionResult.single(c + radius * e, q, multivalued=radius > 0)
        return ProjectionResult.single(c + (radius / nv) * v, q)

    return SetDescriptor("custom", c.size, {"name": "sphere", "center": c, "radius": float(radius)}, proj)


def project_nonneg_real(q):
    q = np.asarray(q, dtype=float)
    out = np.zeros_like(q)
    out[0::2] = np.maximum(q[0::2], 0.0)
    return ProjectionResult.single(out, q)


def nonneg_real_set(N):
    return SetDescriptor("nonneg-real", 2 * N, {"N": N}, project_nonneg_real)


# ---------------------------------------------------------------------------
# sparsity-type sets (finite enumeration of ties)


def _keep_largest(values, k):
    """All index sets of size k holding the k largest `values` (ties enumerated)."""
    n = values.size
    if k >= n:
        return [tuple(range(n))]
    if k <= 0:
        return [()]
    order = np.argsort(-values, kind="stable")
    cut = values[order[k - 1]]
    if cut == 0.0:
        return [tuple(sorted(order[:k].tolist()))]
    slack = TIE_RTOL * max(cut, 1.0)
    above = [int(i) for i in range(n) if values[i] > cut + slack]
    tied = [int(i) for i in range(n) if abs(values[i] - cut) <= slack]
    need = k - len(above)
    return [tuple(sorted(above + list(c))) for c in itertools.combinations(tied, need)]


def project_sparsity(q, k):
    """Keep the k entries of largest modulus of an interleaved complex vector."""
    q = np.asarray(q, dtype=float)
    z = to_complex(q)
    N = z.size
    if not 0 <= k <= N:
        raise ValueError(f"sparsity level {k} outside 0..{N}")
    points = []
    for keep in _keep_largest(np.abs(z), k):
        x = np.zeros_like(z)
        idx = list(keep)
        x[idx] = z[idx]
        points.append(from_complex(x))
    return ProjectionResult(points=tuple(points), distance=distance(points[0], q),
                            multivalued=len(points) > 1)


def sparsity_set(N, k):
    return SetDescriptor("sparsity", 2 * N, {"N": N, "k": k}, lambda q: project_sparsity(q, k))


def _default_dft():
    from .phase import dft, idft
    return dft, idft


def project_sparse_phase(q, k, dft=None):
    """Make the spectrum real except at the k frequencies of largest |Im|.

    `dft` is a (forward, inverse) pair acting on interleaved points; the
    default is the unitary transform of :mod:`projlab.phase`.
    """
    fwd, inv = dft if dft is not None else _default_dft()
    q = np.asarray(q, dtype=float)
    yh = to_complex(fwd(q))
    N = yh.size
    if not 0 <= k <= N:
        raise ValueError(f"sparse-phase level {k} outside 0..{N}")
    points = []
    for keep in _keep_largest(np.abs(yh.imag), k):
        xh = yh.real.astype(complex)
        idx = list(keep)
        xh[idx] = yh[idx]
        points.append(inv(from_complex(xh)))
    return ProjectionResult(points=tuple(points), distance=distance(points[0], q),
                            multivalued=len(points) > 1)


def sparse_phase_set(N, k, dft=None):
    return SetDescriptor("sparse-phase", 2 * N, {"N": N, "k": k},
                         lambda q: project_sparse_phase(q, k, dft))


# ---------------------------------------------------------------------------
# matrices


def _as_matrix(q, shape):
    q = np.asarray(q, dtype=float)
    return q.reshape(shape) if q.ndim == 1 else q


def low_rank_truncations(M, r):
    """Every r-truncated SVD of M, plus the truncation distance.

    With sigma_{k} = ... = sigma_r = ... = sigma_l (1-based) tied at the cut,
    there are C(l-k+1, r-k+1) truncations.
    """
    from .core import svd_small

    M = np.asarray(M, dtype=float)
    if r < 0:
        raise ValueError("rank bound must be >= 0")
    U, S, V = svd_small(M)
    s = np.diag(S) if S.size else np.zeros(0)
    p = s.size
    tail = math.sqrt(float(np.sum(s[r:] ** 2))) if r < p else 0.0
    if r >= p:
        return [M.copy()], 0.0
    if r == 0:
        return [np.zeros_like(M)], tail
    keep_sets = _keep_largest(s, r)
    mats = []
    for keep in keep_sets:
        idx = list(keep)
        mats.append((U[:, idx] * s[idx]) @ V[:, idx].T)
    return mats, tail


def project_low_rank(q, r, shape=None):
    M = _as_matrix(q, shape) if shape is not None else np.asarray(q, dtype=float)
    mats, tail = low_rank_truncations(M, r)
    points = tuple(R.reshape(-1) for R in mats)
    return ProjectionResult(points=points, distance=tail, multivalued=len(points) > 1)


def low_rank_set(shape, r):
    shape = tuple(shape)
    return SetDescriptor("low-rank", shape[0] * shape[1], {"shape": shape, "r": r},
                         lambda q: project_low_rank(q, r, shape))


def project_toeplitz(q, shape=None):
    """Replace every diagonal of q by its arithmetic mean."""
    M = _as_matrix(q, shape) if shape is not None else np.asarray(q, dtype=float)
    n, m = M.shape
    off = (np.arange(m)[None, :] - np.arange(n)[:, None]) + (n - 1)
    sums = np.bincount(off.ravel(), weights=M.ravel(), minlength=n + m - 1)
    counts = np.bincount(off.ravel(), minlength=n + m - 1)
    T = (sums / counts)[off]
    flat = T.reshape(-1)
    return ProjectionResult.single(flat, M.reshape(-1))


def toeplitz_set(shape):
    shape = tuple(shape)
    return SetDescriptor("toeplitz", shape[0] * shape[1], {"shape": shape},
                         lambda q: project_toeplitz(q, shape))


# ---------------------------------------------------------------------------
# boxes and finite unions of intervals


def _nearest_in_union(x, intervals):
    best, best_d = None, math.inf
    for lo, hi in intervals:
        c = min(max(x, lo), hi)
        d = abs(c - x)
        if d < best_d:
            best, best_d = c, d
    return best


def interval_union_set(intervals):
    """Product over coordinates of finite unions of closed intervals.

    `intervals[i]` is a list of (lo, hi) pairs (lo may be -inf, hi may be +inf).
    """
    ivs = tuple(tuple((float(lo), float(hi)) for lo, hi in coord) for coord in intervals)
    for coord in ivs:
        if not coord or any(lo > hi for lo, hi in coord):
            raise ValueError("every coordinate needs at least one nonempty interval")

    def proj(q):
        p = np.array([_nearest_in_union(float(x), iv) for x, iv in zip(q, ivs)])
        return ProjectionResult.single(p, q)

    return SetDescriptor("box-product", len(ivs), {"intervals": ivs}, proj)


def box_set(lo, hi):
    return interval_union_set([[(a, b)] for a, b in zip(lo, hi)])


# ---------------------------------------------------------------------------
# cylinder mantle and epigraph


def project_cylinder(q, h_lo=0.0, h_hi=1.0):
    """Nearest point on {x1^2 + x2^2 = 1, h_lo <= x3 <= h_hi}."""
    q = np.asarray(q, dtype=float)
    rho = math.hypot(q[0], q[1])
    h = min(max(q[2], h_lo), h_hi)
    if rho == 0.0:
        return ProjectionResult.single(np.array([1.0, 0.0, h]), q, multivalued=True)
    return ProjectionResult.single(np.array([q[0] / rho, q[1] / rho, h]), q)


def cylinder_set(h_lo=0.0, h_hi=1.0):
    return SetDescriptor("cylinder", 3, {"h_lo": h_lo, "h_hi": h_hi},
                         lambda q: project_cylinder(q, h_lo, h_hi))


def circle_F():
    """The circle {(cos t, sin t, 0)}: the cylinder mantle at height 0."""
    return cylinder_set(0.0, 0.0)


def _expand_bracket(g, lo, hi):
    while g(lo) > 0:
        lo -= 2 * (hi - lo)
    while g(hi) < 0:
        hi += 2 * (hi - lo)
    return lo, hi


def _foot_parabola(q1, q2, a0, a2):
    """Root u of u - q1 + phi'(u)(phi(u) - q2) = 0 for phi(u) = a0 + a2 u^2/2."""
    c3 = 0.5 * a2 * a2
    c1 = 1.0 + a2 * (a0 - q2)

    def g(u):
        return (c3 * u * u + c1) * u - q1

    def cost(u):
        return (u - q1) ** 2 + (a0 + 0.5 * a2 * u * u - q2) ** 2

    if c1 < 0:
        roots = np.roots([c3, 0.0, c1, -q1])
        real = [float(r.real) for r in roots if abs(r.imag) <= 1e-9 * max(1.0, abs(r))]
        u = min(real, key=cost)
        lo, hi = u - 1e-6 * max(1.0, abs(u)), u + 1e-6 * max(1.0, abs(u))
        if g(lo) > 0 or g(hi) < 0:
            return u
    else:
        lo, hi = _expand_bracket(g, min(q1, 0.0) - 1.0, max(q1, 0.0) + 1.0)
        u = q1 / (c1 + c3 * q1 * q1)
        if not lo < u < hi:
            u = 0.5 * (lo + hi)
    # safeguarded Newton on the bracket
    for _ in range(200):
        gu = g(u)
        if gu == 0.0:
            break
        if gu > 0:
            hi = u
        else:
            lo = u
        du = 3 * c3 * u * u + c1
        un = u - gu / du if du > 0 else 0.5 * (lo + hi)
        if not lo < un < hi:
            un = 0.5 * (lo + hi)
        if abs(un - u) <= 2e-16 * abs(u) or hi - lo <= 2e-16 * max(abs(lo), abs(hi)):
            u = un
            break
        u = un
    return u


def project_epigraph_quadratic(q, a0=1.0, a2=1.0):
    """Nearest point of epi(phi), phi(u) = a0 + (a2/2) u^2."""
    if not a2 > 0:
        raise ValueError("epigraph curvature a2 must be > 0")
    q = np.asarray(q, dtype=float)
    q1, q2 = float(q[0]), float(q[1])
    if q2 >= a0 + 0.5 * a2 * q1 * q1:
        return ProjectionResult(points=(q.copy(),), distance=0.0)
    u = _foot_parabola(q1, q2, a0, a2)
    p = np.array([u, a0 + 0.5 * a2 * u * u])
    return ProjectionResult(points=(p,), distance=math.hypot(u - q1, p[1] - q2))


def epigraph_quadratic_set(a0=1.0, a2=1.0):
    return SetDescriptor("epigraph-quadratic", 2, {"a0": a0, "a2": a2},
                         lambda q: project_epigraph_quadratic(q, a0, a2))


# ---------------------------------------------------------------------------
# parameterized curves


@dataclass(frozen=True, eq=False)
class ParamCurve:
    """A smooth curve t -> map(t) on [t_min, t_max].

    `map` must be vectorized: an array of n parameters gives an (n, dim)
    array.  `jet`, if given, returns (C(t), C'(t), C''(t)) for scalar t;
    otherwise derivatives come from central differences.
    """

    map: Callable
    t_min: float
    t_max: float
    grid_step: float = 1e-3
    refine_iters: int = 60
    extra_points: tuple = ()
    jet: Callable | None = None
    name: str = "curve"

    def __post_init__(self):
        if not self.grid_step > 0:
            raise ValueError("grid_step must be > 0")
        if not (math.isfinite(self.t_min) and math.isfinite(self.t_max)) or self.t_max <= self.t_min:
            raise ValueError("empty or unbounded scan range")

    def __call__(self, t):
        return np.asarray(self.map(np.atleast_1d(np.asarray(t, dtype=float))), dtype=float).reshape(-1, self.dim)[0]

    @cached_property
    def dim(self):
        return int(np.asarray(self.map(np.array([self.t_min]))).reshape(1, -1).shape[1])

    @cached_property
    def _grid(self):
        n = int(math.ceil((self.t_max - self.t_min) / self.grid_step)) + 1
        ts = np.linspace(self.t_min, self.t_max, n)
        pts = np.asarray(self.map(ts), dtype=float).reshape(n, -1)
        if not np.all(np.isfinite(pts)):
            raise ValueError(f"curve {self.name} is not finite on its scan range")
        seg = float(np.max(np.linalg.norm(np.diff(pts, axis=0), axis=1))) if n > 1 else 0.0
        extra = np.asarray(self.extra_points, dtype=float).reshape(-1, pts.shape[1])
        # blocks of grid points with bounding balls, for exact pruning of the scan
        nb = -(-n // _BLOCK)
        pad = np.concatenate([pts, np.repeat(pts[-1:], nb * _BLOCK - n, axis=0)])
        blocks = pad.reshape(nb, _BLOCK, -1)
        centers = blocks.mean(axis=1)
        radii = np.max(np.linalg.norm(blocks - centers[:, None, :], axis=2), axis=1)
        return ts, pts, seg, extra, centers, radii

    def jet_at(self, t):
        if self.jet is not None:
            return self.jet(t)
        h = 1e-4 * max(1.0, abs(t))
        c = np.asarray(self.map(np.array([t - h, t, t + h])), dtype=float).reshape(3, -1)
        return c[1], (c[2] - c[0]) / (2 * h), (c[2] - 2 * c[1] + c[0]) / (h * h)


def _refine(C, q, t0, lo, hi):
    """Safeguarded Newton on the stationarity of |C(t) - q|^2 within [lo, hi]."""

    def dphi(t):
        c, d1, d2 = C.jet_at(t)
        r = c - q
        return float(r @ d1), float(d1 @ d1 + r @ d2)

    glo, _ = dphi(lo)
    ghi, _ = dphi(hi)
    if glo >= 0 or ghi <= 0:
        # no interior stationary point bracketed: best of endpoints and start
        cands = [lo, hi, t0]
        return min(cands, key=lambda t: float(np.sum((C.jet_at(t)[0] - q) ** 2)))
    t = t0 if lo < t0 < hi else 0.5 * (lo + hi)
    for _ in range(C.refine_iters):
        g, h = dphi(t)
        if g == 0.0:
            break
        if g > 0:
            hi = t
        else:
            lo = t
        if h > 0 and abs(g / h) <= 4e-16 * max(1.0, abs(t)):
            break
        tn = t - g / h if h > 0 else 0.5 * (lo + hi)
        if not lo < tn < hi:
            tn = 0.5 * (lo + hi)
        t = tn
    return t


def project_param_curve(C, q, max_candidates=8):
    """Global grid scan over the parameter domain followed by local refinement."""
    q = np.asarray(q, dtype=float)
    ts, pts, seg, extra, centers, radii = C._grid
    n = ts.size
    cq = centers - q
    dc = np.sqrt(np.einsum("ij,ij->i", cq, cq))
    upper = float(np.min(dc + radii))
    active = np.flatnonzero(dc - radii <= upper + seg)
    idx = (active[:, None] * _BLOCK + np.arange(_BLOCK)).ravel()
    idx = idx[idx < n]
    diff = pts[idx] - q
    d2 = np.einsum("ij,ij->i", diff, diff)
    j0 = int(np.argmin(d2))
    dmin = math.sqrt(d2[j0])
    # local minima of the sampled profile within reach of the sampled minimum;
    # grid neighbours outside the active blocks are farther than that reach
    near = np.flatnonzero(d2 <= (dmin + seg) ** 2)
    prev_ok = (near > 0) & (idx[np.maximum(near - 1, 0)] == idx[near] - 1)
    next_ok = (near < idx.size - 1) & (idx[np.minimum(near + 1, idx.size - 1)] == idx[near] + 1)
    left = np.where(prev_ok, d2[np.maximum(near - 1, 0)], np.inf)
    right = np.where(next_ok, d2[np.minimum(near + 1, idx.size - 1)], np.inf)
    keep = near[(d2[near] <= left) & (d2[near] <= right)]
    if keep.size == 0:
        keep = np.array([j0])
    keep = keep[np.argsort(d2[keep], kind="stable")][:max_candidates]
    cand = idx[keep]
    found = []
    for i in cand:
        lo = ts[max(i - 1, 0)]
        hi = ts[min(i + 1, ts.size - 1)]
        t = _refine(C, q, ts[i], lo, hi)
        p = C.jet_at(t)[0]
        e = p - q
        found.append((math.sqrt(float(e @ e)), float(t), p))
    found.sort(key=lambda f: f[0])
    best_d = found[0][0]
    if extra.size:
        de = np.linalg.norm(extra - q, axis=1)
        j = int(np.argmin(de))
        if de[j] < best_d:
            return ProjectionResult(points=(extra[j].copy(),), distance=float(de[j]), params=(None,))
    # distinct local minima at the same distance are a genuine tie
    slack = TIE_RTOL * max(1.0, best_d)
    points, params = [found[0][2]], [found[0][1]]
    for d, t, p in found[1:]:
        if d <= best_d + slack and all(np.linalg.norm(p - u) > 1e-8 * max(1.0, best_d) for u in points):
            points.append(p)
            params.append(t)
    return ProjectionResult(points=tuple(points), distance=best_d, multivalued=len(points) > 1,
                            params=tuple(params))


def warm_local_project(C, q, t_prev, max_iter=200):
    """Descent on t -> |q - C(t)|^2 started at t_prev; never increases the distance."""
    q = np.asarray(q, dtype=float)
    t = min(max(float(t_prev), C.t_min), C.t_max)

    def phi(s):
        r = C(s) - q
        return float(r @ r)

    f = phi(t)
    max_step = 50 * C.grid_step
    for _ in range(max_iter):
        c, d1, d2 = C.jet_at(t)
        r = c - q
        g = float(r @ d1)
        h = float(d1 @ d1 + r @ d2)
        if g == 0.0:
            break
        step = -g / h if h > 0 else -math.copysign(max_step, g)
        step = max(-max_step, min(max_step, step))
        accepted = False
        for _ in range(60):
            tn = min(max(t + step, C.t_min), C.t_max)
            fn = phi(tn)
            if fn <= f:
                accepted = True
                break
            step *= 0.5
        if not accepted or tn == t:
            break
        done = abs(tn - t) <= 4e-16 * max(1.0, abs(t))
        t, f = tn, fn
        if done:
            break
    return C(t), t


def param_curve_set(C):
    def proj(q):
        return project_param_curve(C, q)

    def local(q, t_prev):
        return warm_local_project(C, q, t_prev)

    return SetDescriptor("param-curve", C.dim, {"curve": C}, proj, local)


# ---------------------------------------------------------------------------
# unions and products


def union_set(members, name="union"):
    """Union of sets of equal dimension; nearest member wins."""
    members = tuple(members)
    dims = {S.dimension for S in members}
    if len(dims) != 1:
        raise ValueError("union members must share a dimension")

    def proj(q):
        results = [S.projector(q) for S in members]
        dmin = min(r.distance for r in results)
        slack = TIE_RTOL * max(1.0, dmin)
        points, params = [], []
        for idx, r in enumerate(results):
            if r.distance <= dmin + slack:
                for j, p in enumerate(r.points):
                    points.append(p)
                    params.append((idx, None if r.params is None else r.params[j]))
        if len(points) > 1:
            # several members meeting at the same point is not a genuine tie
            uniq = [points[0]]
            keep = [0]
            for j, p in enumerate(points[1:], 1):
                if all(np.linalg.norm(p - u) > 1e-12 * max(1.0, dmin) for u in uniq):
                    uniq.append(p)
                    keep.append(j)
            points = uniq
            params = [params[j] for j in keep]
        return ProjectionResult(points=tuple(points), distance=dmin,
                                multivalued=len(points) > 1 or any(r.multivalued for r in results
                                                                   if r.distance <= dmin + slack),
                                params=tuple(params))

    return SetDescriptor("union", dims.pop(), {"members": members, "name": name}, proj)


def diagonal_set(n, m):
    """{(x, ..., x)} in (R^n)^m; projection replicates the mean block."""

    def proj(q):
        x = np.asarray(q, dtype=float).reshape(m, n).mean(axis=0)
        return ProjectionResult.single(np.tile(x, m), q)

    return SetDescriptor("affine", n * m, {"diagonal": True, "n": n, "m": m}, proj)


def product_set(components):
    components = tuple(components)
    if not components:
        raise ValueError("product of zero sets")
    dims = [S.dimension for S in components]
    cuts = np.cumsum([0] + dims)

    def proj(q):
        parts, mv = [], False
        for S, a, b in zip(components, cuts[:-1], cuts[1:]):
            r = S.project(q[a:b])
            parts.append(r.point)
            mv = mv or r.multivalued
        return ProjectionResult.single(np.concatenate(parts), q, multivalued=mv)

    params = {"components": components}
    if len(set(dims)) == 1:
        params["diagonal"] = diagonal_set(dims[0], len(components))
    return SetDescriptor("product", int(cuts[-1]), params, proj)


def custom_set(dimension, projector, name="custom", **params):
    """Wrap an arbitrary projector q -> ProjectionResult."""
    return SetDescriptor("custom", dimension, dict(params, name=name), projector)


# ---------------------------------------------------------------------------
# spirals, the cylinder and power curves

SPIRAL_T_MAX = 40.0


def _spiral_map(sign):
    def f(t):
        t = np.asarray(t, dtype=float)
        e = np.exp(-t)
        rad = 1.0 + sign * e
        out = np.empty((t.size, 3))
        out[:, 0] = rad * np.cos(t)
        out[:, 1] = rad * np.sin(t)
        out[:, 2] = np.sqrt(e)
        return out

    return f


def _spiral_jet(sign):
    def jet(t):
        e = math.exp(-t)
        c, s = math.cos(t), math.sin(t)
        rad = 1.0 + sign * e
        drad = -sign * e
        h = math.sqrt(e)
        p = np.array([rad * c, rad * s, h])
        d1 = np.array([drad * c - rad * s, drad * s + rad * c, -0.5 * h])
        d2 = np.array([
            -drad * c - 2 * drad * s - rad * c,
            -drad * s + 2 * drad * c - rad * s,
            0.25 * h,
        ])
        return p, d1, d2

    return jet


def spiral_curve(sign=+1, t_max=SPIRAL_T_MAX, grid_step=1e-3):
    """a(t) = ((1 + sign e^-t) cos t, (1 + sign e^-t) sin t, e^{-t/2}), t >= 0."""
    name = "spiral" if sign > 0 else "inner-spiral"
    return ParamCurve(_spiral_map(sign), 0.0, t_max, grid_step=grid_step,
                      jet=_spiral_jet(sign), name=name)


def spiral_point(t, sign=+1):
    return _spiral_map(sign)(np.array([t]))[0]


def cylinder_point(t):
    """b(t) = (cos t, sin t, e^{-t/2}), the mantle shadow of the spirals."""
    return np.array([math.cos(t), math.sin(t), math.exp(-0.5 * t)])


def spiral_set(t_max=SPIRAL_T_MAX, grid_step=1e-3):
    """Logarithmic spiral together with its limit circle F."""
    C = spiral_curve(+1, t_max, grid_step)
    S = union_set([param_curve_set(C), circle_F()], name="spiral")
    object.__setattr__(S, "local_projector", lambda q, t: warm_local_project(C, q, t))
    S.params["curve"] = C
    return S


def double_spiral_set(t_max=SPIRAL_T_MAX, grid_step=1e-3):
    """Outer spiral (member 0), inner spiral (member 1) and circle F (member 2)."""
    outer = param_curve_set(spiral_curve(+1, t_max, grid_step))
    inner = param_curve_set(spiral_curve(-1, t_max, grid_step))
    return union_set([outer, inner, circle_F()], name="double-spiral")


def power_curve(alpha, x_max=1.0, grid_step=1e-4, offset=0.0, quad=0.0):
    """{(x, |x|^alpha + quad x^2 / 2 + offset) : |x| <= x_max}."""

    def f(t):
        t = np.asarray(t, dtype=float)
        return np.column_stack([t, np.abs(t) ** alpha + 0.5 * quad * t * t + offset])

    def jet(t):
        a = abs(t)
        sg = math.copysign(1.0, t) if t else 0.0
        d1 = alpha * a ** (alpha - 1) * sg if a else 0.0
        d2 = alpha * (alpha - 1) * a ** (alpha - 2) if a else 0.0
        p = np.array([t, a ** alpha + 0.5 * quad * t * t + offset])
        return p, np.array([1.0, d1 + quad * t]), np.array([0.0, d2 + quad])

    return ParamCurve(f, -x_max, x_max, grid_step=grid_step, jet=jet, name=f"|x|^{alpha}")
