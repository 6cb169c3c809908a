"""Phase retrieval: unitary DFT, magnitude and prior sets, Gerchberg-Saxton,
and the two-pixel counterexamples lifted from the spiral sets in R^3.

Signals of length N are interleaved points of R^{2N}.  The transform is
x^(w) = N^{-1/2} sum_t exp(2 pi i t w / N) x(t); for N = 2 it is the real
involution [[1, 1], [1, -1]] / sqrt(2), so forward and inverse coincide.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .core import ProjectionResult, TiePolicy, Tolerances, as_point, from_complex, to_complex
from .engine import run_alternating, run_douglas_rachford
from .sets import (
    MagnitudeSpec, SetDescriptor, cylinder_set, double_spiral_set, nonneg_real_set,
    project_param_curve, project_sphere_product, sparse_phase_set,
    sparsity_set, spiral_curve, spiral_point, spiral_set, sphere_product_set, support_set,
)


def dft(x):
    """Unitary DFT with kernel exp(+2 pi i t w / N) / sqrt(N), on interleaved points."""
    return from_complex(np.fft.ifft(to_complex(np.asarray(x, dtype=float)), norm="ortho"))


def idft(x):
    return from_complex(np.fft.fft(to_complex(np.asarray(x, dtype=float)), norm="ortho"))


# ---------------------------------------------------------------------------
# magnitude set and priors


def magnitude_set(m):
    """B = {x : |x^(w)| = m(w)}, projected through the DFT."""
    spec = m if isinstance(m, MagnitudeSpec) else MagnitudeSpec(tuple(m))

    def proj(q):
        r = project_sphere_product(spec, dft(q))
        p = idft(r.point)
        return ProjectionResult(points=(p,), distance=float(np.linalg.norm(p - q)),
                                multivalued=r.multivalued)

    return SetDescriptor("sphere-product", 2 * spec.N, {"spec": spec, "domain": "fourier"}, proj)


PRIOR_KINDS = ("second-plane", "support", "nonneg-real", "sparsity", "sparse-phase",
               "lifted-spiral", "lifted-double-spiral")


@dataclass(frozen=True)
class PriorSpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in PRIOR_KINDS:
            raise ValueError(f"unknown prior {self.kind!r}; expected one of {PRIOR_KINDS}")


def prior_set(prior, N):
    """The prior set A in C^N (interleaved) described by `prior`."""
    k, p = prior.kind, prior.params
    if k == "second-plane":
        mt = MagnitudeSpec(tuple(p["m_tilde"]))
        if mt.N != N:
            raise ValueError(f"m_tilde has length {mt.N}, expected {N}")
        return sphere_product_set(mt)
    if k == "support":
        return support_set(N, p["support"])
    if k == "nonneg-real":
        return nonneg_real_set(N)
    if k == "sparsity":
        return sparsity_set(N, int(p["k"]))
    if k == "sparse-phase":
        return sparse_phase_set(N, int(p["k"]), (dft, idft))
    if N != 2:
        raise ValueError("lifted priors live in C^2")
    return lifted_projector("A_spiral" if k == "lifted-spiral" else "A_double")


def better_than_zero(x0, m):
    """Whether dist(x0, B) < ||m||: a start within reach of the magnitude set."""
    spec = m if isinstance(m, MagnitudeSpec) else MagnitudeSpec(tuple(m))
    return magnitude_set(spec).project(x0).distance < spec.norm_m


def gs_run(m, prior, x0, tol=Tolerances(), policy=TiePolicy()):
    """Gerchberg-Saxton error reduction x+ in P_A(P_B(x)).

    trace.a holds the prior-side iterates x_k, trace.b the magnitude-side
    y_k.  trace.info["better_than_zero"] reports dist(x0, B) < ||m||.
    """
    spec = m if isinstance(m, MagnitudeSpec) else MagnitudeSpec(tuple(m))
    if prior.kind == "second-plane":
        mt = float(np.linalg.norm(prior.params["m_tilde"]))
        if abs(mt - spec.norm_m) > 1e-12 * max(1.0, spec.norm_m):
            raise ValueError("second-plane prior needs ||m_tilde|| = ||m||")
    A = prior_set(prior, spec.N)
    B = magnitude_set(spec)
    x0 = as_point(x0, 2 * spec.N)
    if A.project(x0).distance > tol.tol_proj:
        raise ValueError("starting signal violates the prior")
    trace = run_alternating(A, B, x0, tol, policy)
    trace.info["better_than_zero"] = bool(B.project(x0).distance < spec.norm_m)
    return trace


# ---------------------------------------------------------------------------
# two-pixel lift


@dataclass(frozen=True)
class LiftMaps:
    """Maps between C^2 (interleaved R^4) and R^3 for the two-pixel problem."""

    N: int = 2

    def __post_init__(self):
        if self.N != 2:
            raise ValueError("the lift is defined for two pixels only")

    @staticmethod
    def forward(x):
        """(x(0), x(1)) -> (Re x(0), Im x(0), Re x(1))."""
        x = np.asarray(x, dtype=float)
        return x[:3].copy()

    @staticmethod
    def inclusion(p):
        """(p1, p2, p3) -> (p1 + i p2, p3 + 0i)."""
        p = np.asarray(p, dtype=float)
        return np.array([p[0], p[1], p[2], 0.0])

    f = staticmethod(dft)
    f_inv = staticmethod(idft)

    def shadow(self, x):
        """R^3 shadow P(f'(x)) of a lifted point."""
        return self.forward(self.f_inv(x))

    def lift(self, p):
        """f(P'(p)) for p in R^3."""
        return self.f(self.inclusion(p))


def _r3_set(which):
    if which == "A_spiral":
        return spiral_set()
    if which == "A_double":
        return double_spiral_set()
    if which == "B_cyl":
        return cylinder_set()
    raise ValueError(f"unknown lifted set {which!r}")


def lifted_projector(which, maps=LiftMaps(), base=None):
    """Projector f o P' o P_set o P o f' on C^2 for one of the R^3 sets.

    `base` may supply an already built R^3 SetDescriptor.
    """
    S3 = _r3_set(which) if base is None else base

    def proj(q):
        r = S3.projector(maps.shadow(q))
        points = tuple(maps.lift(p) for p in r.points)
        return ProjectionResult(points=points, distance=float(np.linalg.norm(points[0] - q)),
                                multivalued=r.multivalued, chosen_index=r.chosen_index,
                                params=r.params)

    return SetDescriptor("lifted", 4, {"which": which, "base": S3}, proj)


def gs_counterexample_run(t0, iters, tol=None):
    """Lifted GS between the spiral prior and the magnitude set, next to the
    R^3 alternating run between spiral and cylinder, both from a(t0).

    Returns (lifted_trace, r3_trace); lifted_trace.info["shadow_error"] is
    the per-iterate distance between the R^3 shadow and the direct run.
    """
    if not t0 > 0:
        raise ValueError("t0 must be > 0")
    tol = Tolerances(max_iter=int(iters)) if tol is None else tol
    maps = LiftMaps()
    A3, B3 = spiral_set(), cylinder_set()
    a0 = spiral_point(t0)
    r3 = run_alternating(A3, B3, a0, tol)
    lifted = run_alternating(lifted_projector("A_spiral", maps, A3), lifted_projector("B_cyl", maps, B3),
                             maps.lift(a0), tol)
    n = min(len(lifted), len(r3)) + 1
    sa = np.array([maps.shadow(x) for x in lifted.a[:n]])
    sb = np.array([maps.shadow(y) for y in lifted.b[:n]])
    err = np.maximum(np.linalg.norm(sa - r3.a[:n], axis=1), np.linalg.norm(sb - r3.b[:n], axis=1))
    lifted.info["shadow_error"] = err
    return lifted, r3


def hio_counterexample_run(t0, iters, tol=None):
    """Douglas-Rachford between the lifted double spiral and the magnitude set from the lift of a_-(t0).

    info carries the alternating-pattern check: even iterates (counting the
    start as 0) on the inner-spiral lift, odd ones on the cylinder lift, the
    inner-spiral parameters t_k, and the worst membership error.
    """
    if not t0 > 0:
        raise ValueError("t0 must be > 0")
    tol = Tolerances(max_iter=int(iters)) if tol is None else tol
    maps = LiftMaps()
    A3, B3 = double_spiral_set(), cylinder_set()
    x0 = maps.lift(spiral_point(t0, sign=-1))
    tr = run_douglas_rachford(lifted_projector("A_double", maps, A3), lifted_projector("B_cyl", maps, B3),
                              x0, tol)
    inner = spiral_curve(-1)
    shadows = np.array([maps.shadow(x) for x in tr.x])
    ts, err_a, err_b = [], 0.0, 0.0
    for j, p in enumerate(shadows):
        if j % 2 == 0:
            r = project_param_curve(inner, p)
            ts.append(r.param)
            err_a = max(err_a, r.distance)
        else:
            err_b = max(err_b, B3.project(p).distance)
    # the lift itself must be exact: the fourth coordinate of f'(x) stays 0
    lift_err = float(np.max(np.abs([maps.f_inv(x)[3] for x in tr.x])))
    t = np.array(ts, dtype=float)
    dt = np.diff(t)
    tr.info.update(t=t, pattern_error_inner=err_a, pattern_error_cylinder=err_b, lift_error=lift_err,
                   increasing=bool(np.all(dt > 0)), shadows=shadows)
    return tr


# ---------------------------------------------------------------------------
# CSV I/O


def write_signal_csv(path, x):
    z = to_complex(np.asarray(x, dtype=float))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "re", "im"])
        for t, v in enumerate(z):
            w.writerow([t, repr(float(v.real)), repr(float(v.imag))])


def _rows(path):
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                yield [float(c) for c in row]
            except ValueError:
                continue  # header


def read_signal_csv(path):
    rows = sorted(_rows(path), key=lambda r: r[0])
    if [int(r[0]) for r in rows] != list(range(len(rows))):
        raise ValueError(f"{path}: indices must be 0..N-1")
    return from_complex(np.array([r[1] + 1j * r[2] for r in rows]))


def write_magnitude_csv(path, m):
    spec = m if isinstance(m, MagnitudeSpec) else MagnitudeSpec(tuple(m))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["omega", "m"])
        for k, v in enumerate(spec.m):
            w.writerow([k, repr(v)])


def read_magnitude_csv(path):
    rows = sorted(_rows(path), key=lambda r: r[0])
    if [int(r[0]) for r in rows] != list(range(len(rows))):
        raise ValueError(f"{path}: frequencies must be 0..N-1")
    return MagnitudeSpec(tuple(r[1] for r in rows))


__all__ = [
    "LiftMaps", "PriorSpec", "better_than_zero", "dft", "gs_counterexample_run", "gs_run",
    "hio_counterexample_run", "idft", "lifted_projector", "magnitude_set", "prior_set",
    "read_magnitude_csv", "read_signal_csv", "write_magnitude_csv", "write_signal_csv",
]
