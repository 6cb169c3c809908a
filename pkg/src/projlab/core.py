"""Numeric primitives shared by every other module.

Points are plain 1-D float arrays.  A complex signal of length N lives in
R^{2N} with real and imaginary parts interleaved: (Re x0, Im x0, Re x1, ...).
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field, replace

import numpy as np

TIE_MODES = ("first", "lowest-lex", "seeded-random")


def as_point(x, dim=None):
    """Coerce `x` to a finite 1-D float array, optionally checking its dimension."""
    p = np.array(x, dtype=float).reshape(-1)
    if p.size == 0:
        raise ValueError("a point needs dimension >= 1")
    if dim is not None and p.size != dim:
        raise ValueError(f"expected dimension {dim}, got {p.size}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point has non-finite entries")
    return p


def distance(x, y):
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.size} vs {y.size}")
    return float(np.linalg.norm(x - y))


def to_complex(p):
    """Interleaved real point -> complex vector."""
    p = np.asarray(p, dtype=float)
    if p.size % 2:
        raise ValueError("interleaved complex point needs even dimension")
    return p[0::2] + 1j * p[1::2]


def from_complex(z):
    """Complex vector -> interleaved real point."""
    z = np.asarray(z, dtype=complex).reshape(-1)
    out = np.empty(2 * z.size)
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


@dataclass(frozen=True)
class Tolerances:
    tol_proj: float = 1e-10
    tol_step: float = 1e-12
    max_iter: int = 10**6

    def __post_init__(self):
        if not (self.tol_proj > 0 and self.tol_step > 0):
            raise ValueError("tolerances must be positive")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class TiePolicy:
    mode: str = "first"
    seed: int = 0

    def __post_init__(self):
        if self.mode not in TIE_MODES:
            raise ValueError(f"unknown tie mode {self.mode!r}; expected one of {TIE_MODES}")


@dataclass(frozen=True)
class ProjectionResult:
    """All (or a representative of the) nearest points of a query.

    `params` optionally carries a per-point parameter, e.g. the curve
    parameter t of a point on a parameterized curve.
    """

    points: tuple
    distance: float
    multivalued: bool = False
    chosen_index: int = 0
    params: tuple | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.points) == 0:
            raise ValueError("projection result must list at least one point")
        if not 0 <= self.chosen_index < len(self.points):
            raise ValueError("chosen_index out of range")

    @property
    def point(self):
        return self.points[self.chosen_index]

    @property
    def param(self):
        return None if self.params is None else self.params[self.chosen_index]

    @classmethod
    def single(cls, p, q, multivalued=False, param=None):
        p = np.asarray(p, dtype=float)
        return cls(
            points=(p,),
            distance=distance(p, q),
            multivalued=multivalued,
            params=None if param is None else (param,),
        )


def _choose_index(points, policy):
    n = len(points)
    if n == 1 or policy.mode == "first":
        return 0
    if policy.mode == "lowest-lex":
        keys = [tuple(np.asarray(p, dtype=float).tolist()) for p in points]
        return min(range(n), key=keys.__getitem__)
    # seeded-random: the draw depends on the seed and on the candidate bytes only
    digest = zlib.crc32(b"".join(np.ascontiguousarray(p, dtype=float).tobytes() for p in points))
    rng = np.random.default_rng([int(policy.seed) & 0xFFFFFFFF, digest])
    return int(rng.integers(n))


def resolve(result, policy=TiePolicy()):
    """Return `result` with chosen_index set according to `policy`."""
    return replace(result, chosen_index=_choose_index(result.points, policy))


def select(result, policy=TiePolicy()):
    """Pick one nearest point out of a (possibly multi-valued) projection."""
    return resolve(result, policy).point


def svd_small(M):
    """Full SVD of a small dense real matrix, returned as (U, S, V) with M = U S V^T.

    S is the square-padded diagonal-compatible (n x m) matrix of singular values.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("svd_small expects a 2-D matrix")
    if max(M.shape) > 64:
        raise ValueError(f"svd_small handles dimensions <= 64, got {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    n, m = M.shape
    if not np.any(M):
        return np.eye(n), np.zeros((n, m)), np.eye(m)
    U, s, Vt = np.linalg.svd(M, full_matrices=True)
    S = np.zeros((n, m))
    S[: s.size, : s.size] = np.diag(s)
    return U, S, Vt.T
