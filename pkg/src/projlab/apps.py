"""Gaussian EM and Cadzow structured low-rank approximation, both as
alternating projections.

EM: with v_ji = c_ji x_i the E-step projects v onto B = {z : sum_i z_ji = y_j}
and the M-step projects z onto A = {Gamma x : x in Omega}.  The noise
variance cancels from both steps and is not modelled.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ProjectionResult, TiePolicy, Tolerances, as_point, svd_small
from .engine import run_alternating
from .sets import SetDescriptor, custom_set, low_rank_set, toeplitz_set

# ---------------------------------------------------------------------------
# EM


@dataclass(frozen=True, eq=False)
class EMProblem:
    C: np.ndarray
    y: np.ndarray
    Omega: SetDescriptor | None = None  # None means R^n

    def __post_init__(self):
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if not (np.all(np.isfinite(C)) and np.all(np.isfinite(y))):
            raise ValueError("C and y must be finite")
        if C.shape[0] != y.size:
            raise ValueError(f"C has {C.shape[0]} rows but y has {y.size} entries")
        if self.Omega is not None and self.Omega.dimension != C.shape[1]:
            raise ValueError("Omega dimension must equal the number of columns of C")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "y", y)

    @property
    def m(self):
        return self.C.shape[0]

    @property
    def n(self):
        return self.C.shape[1]

    def gamma(self, x):
        """Gamma x = (c_ji x_i), flattened row-major."""
        return (self.C * np.asarray(x, dtype=float)[None, :]).reshape(-1)


@dataclass
class EMState:
    x: np.ndarray
    z: np.ndarray
    v: np.ndarray
    spread: float = 0.0


def _project_rowsum(p, q):
    Z = np.asarray(q, dtype=float).reshape(p.m, p.n)
    return (Z + ((p.y - Z.sum(axis=1)) / p.n)[:, None]).reshape(-1)


def em_e_step(p, x):
    """z_ji = y_j / n + c_ji x_i - (1/n) sum_i' c_ji' x_i'."""
    x = as_point(x, p.n)
    V = p.C * x[None, :]
    return (p.y / p.n)[:, None] + V - (V.sum(axis=1) / p.n)[:, None]


def _unconstrained(p, Z):
    w = np.sum(p.C ** 2, axis=0)
    num = np.sum(p.C * Z, axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        xh = np.where(w > 0, num / np.where(w > 0, w, 1.0), 0.0)
    return xh, w


def em_m_step(p, z):
    """argmin over x in Omega of sum_ji (z_ji - c_ji x_i)^2."""
    Z = np.asarray(z, dtype=float).reshape(p.m, p.n)
    xh, w = _unconstrained(p, Z)
    Om = p.Omega
    if Om is None:
        if np.any(w == 0):
            raise ValueError(f"coordinates {np.flatnonzero(w == 0).tolist()} are undetermined")
        return xh
    ivs = Om.params.get("intervals") if Om.family == "box-product" else None
    if ivs is not None:
        for i in np.flatnonzero(w == 0):
            if any(np.isinf(lo) or np.isinf(hi) for lo, hi in ivs[i]):
                raise ValueError(f"coordinate {i} is undetermined (zero column, unbounded Omega_i)")
        # per-coordinate nearest point; zero columns take the point nearest 0
        return Om.project(xh).point
    if np.any(w == 0):
        raise ValueError(f"coordinates {np.flatnonzero(w == 0).tolist()} are undetermined")
    if np.ptp(w) > 1e-12 * w.max():
        raise NotImplementedError("a general Omega needs equal column norms of C")
    return Om.project(xh).point


def em_sets(p):
    """(A, B) = (Gamma(Omega), {z : row sums = y}) as set descriptors on R^{m n}."""

    def proj_a(q):
        x = em_m_step(p, q)
        return ProjectionResult.single(p.gamma(x), q, param=x)

    def proj_b(q):
        return ProjectionResult.single(_project_rowsum(p, q), q)

    A = custom_set(p.m * p.n, proj_a, name="Gamma(Omega)")
    B = custom_set(p.m * p.n, proj_b, name="row-sum")
    return A, B


def theorem_spread(p, x, z):
    """max_j (max_i - min_i) of z_ji - c_ji x_i; zero at an EM limit."""
    D = np.asarray(z, dtype=float).reshape(p.m, p.n) - p.C * np.asarray(x)[None, :]
    return float(np.max(np.ptp(D, axis=1)))


def em_run(p, x0, tol=Tolerances(), policy=TiePolicy()):
    """EM iterations as alternating projections.

    trace.a is the sequence v^(t) = Gamma x^(t), trace.b the completed data
    z^(t) (flattened); trace.info["x"] holds the parameter estimates.
    """
    x0 = as_point(x0, p.n)
    if p.Omega is not None and p.Omega.project(x0).distance > tol.tol_proj:
        raise ValueError("x0 must lie in Omega")
    A, B = em_sets(p)
    xs = [x0]
    trace = run_alternating(A, B, p.gamma(x0), tol, policy, on_a=lambda k, r: xs.append(r.param))
    x = xs[-1]
    z = trace.b[-1]
    state = EMState(x=x, z=z.reshape(p.m, p.n), v=p.gamma(x).reshape(p.m, p.n),
                    spread=theorem_spread(p, x, z))
    trace.info["x"] = np.array(xs)
    trace.info["spread"] = state.spread
    return trace, state


# ---------------------------------------------------------------------------
# Cadzow


@dataclass(frozen=True, eq=False)
class CadzowProblem:
    structure: SetDescriptor
    shape: tuple
    r: int
    S0: np.ndarray

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("rank bound must be >= 0")
        shape = tuple(int(s) for s in self.shape)
        S0 = np.asarray(self.S0, dtype=float).reshape(shape)
        if self.structure.dimension != shape[0] * shape[1]:
            raise ValueError("structure dimension does not match the matrix shape")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "S0", S0)


class CadzowDivergence(RuntimeError):
    def __init__(self, trace):
        super().__init__(f"Cadzow iterates diverged after {len(trace)} steps")
        self.trace = trace


def cadzow_run(p, tol=Tolerances(), policy=TiePolicy()):
    """S_k in A, R_k in P_B(S_k), S_{k+1} in P_A(R_k) with B the rank-<=r matrices.

    trace.a holds the structured iterates S_k, trace.b the truncations R_k
    (both flattened row-major).
    """
    return run_alternating(p.structure, low_rank_set(p.shape, p.r), p.S0.reshape(-1), tol, policy)


def trajectory_matrix(signal, window):
    """(L - window + 1) x window Toeplitz matrix T[i, j] = s[i - j + window - 1]."""
    s = np.asarray(signal, dtype=float).reshape(-1)
    L = s.size
    if not 1 <= window <= L:
        raise ValueError(f"window must lie in 1..{L}")
    i = np.arange(L - window + 1)[:, None]
    j = np.arange(window)[None, :]
    return s[i - j + window - 1]


def signal_from_trajectory(T):
    """Diagonal means of T, ordered as in trajectory_matrix."""
    T = np.asarray(T, dtype=float)
    n, w = T.shape
    off = (np.arange(n)[:, None] - np.arange(w)[None, :]) + (w - 1)
    return np.bincount(off.ravel(), weights=T.ravel()) / np.bincount(off.ravel())


def cadzow_denoise(signal, window, r, tol=Tolerances(tol_step=1e-12, max_iter=10**4), return_info=False):
    """Cadzow de-noising: alternate Toeplitz structure and rank-r truncation
    starting from the trajectory matrix, then read the signal off the diagonals.

    With return_info=True also returns a dict holding the trace and the final
    singular values, including sigma_{r+1}.
    """
    T = trajectory_matrix(signal, window)
    p = CadzowProblem(toeplitz_set(T.shape), T.shape, int(r), T)
    trace = cadzow_run(p, tol)
    if trace.stop_reason == "diverged":
        raise CadzowDivergence(trace)
    S = trace.a[-1].reshape(T.shape)
    out = signal_from_trajectory(S)
    if not return_info:
        return out
    s = np.diag(svd_small(S)[1]) if max(T.shape) <= 64 else np.linalg.svd(S, compute_uv=False)
    tail = float(s[r]) if r < s.size else 0.0
    return out, {"trace": trace, "singular_values": s, "sigma_tail": tail}


__all__ = [
    "CadzowDivergence", "CadzowProblem", "EMProblem", "EMState", "cadzow_denoise", "cadzow_run",
    "em_e_step", "em_m_step", "em_run", "em_sets", "signal_from_trajectory", "theorem_spread",
    "trajectory_matrix",
]
