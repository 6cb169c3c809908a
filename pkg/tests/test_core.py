import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from projlab.core import (
    ProjectionResult, TiePolicy, Tolerances, as_point, distance, from_complex, resolve, select,
    svd_small, to_complex,
)


def test_distance_examples():
    assert distance([0, 0], [3, 4]) == 5.0
    x = np.array([0.3, -2.0, 7.0])
    assert distance(x, x) == 0.0
    assert distance([1, 0, 0], [0, 1, 0]) == pytest.approx(math.sqrt(2), abs=1e-15)


def test_distance_dimension_mismatch():
    with pytest.raises(ValueError):
        distance([1, 2], [1, 2, 3])


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=6), st.data())
def test_distance_symmetric_and_matches_sum_of_squares(xs, data):
    ys = data.draw(st.lists(st.floats(-1e6, 1e6), min_size=len(xs), max_size=len(xs)))
    d = distance(xs, ys)
    assert d == distance(ys, xs)
    assert d == pytest.approx(math.sqrt(sum((a - b) ** 2 for a, b in zip(xs, ys))), rel=1e-12, abs=1e-12)
    if list(xs) == list(ys):
        assert d == 0


def test_as_point_rejects_nonfinite_and_empty():
    with pytest.raises(ValueError):
        as_point([1.0, float("nan")])
    with pytest.raises(ValueError):
        as_point([])
    with pytest.raises(ValueError):
        as_point([1.0, 2.0], dim=3)


def test_complex_interleaving_round_trip():
    z = np.array([1 + 2j, -3.5 + 0j, 0 - 1j])
    p = from_complex(z)
    assert p.tolist() == [1, 2, -3.5, 0, 0, -1]
    assert np.array_equal(to_complex(p), z)


def test_tolerances_validation():
    t = Tolerances()
    assert (t.tol_proj, t.tol_step, t.max_iter) == (1e-10, 1e-12, 10**6)
    with pytest.raises(ValueError):
        Tolerances(tol_step=0)
    with pytest.raises(ValueError):
        Tolerances(max_iter=0)


def _tied():
    return ProjectionResult(points=(np.array([2.0, 0.0]), np.array([0.0, 2.0])), distance=math.sqrt(2),
                            multivalued=True)


def test_select_examples():
    r = _tied()
    assert select(r, TiePolicy("first")).tolist() == [2.0, 0.0]
    assert select(r, TiePolicy("lowest-lex")).tolist() == [0.0, 2.0]
    single = ProjectionResult.single([1.0, 1.0], [0.0, 0.0])
    for mode in ("first", "lowest-lex", "seeded-random"):
        assert select(single, TiePolicy(mode, 3)).tolist() == [1.0, 1.0]


def test_select_sets_chosen_index_and_is_pure():
    r = _tied()
    assert resolve(r, TiePolicy("lowest-lex")).chosen_index == 1
    for seed in range(20):
        pol = TiePolicy("seeded-random", seed)
        picks = {tuple(select(r, pol)) for _ in range(5)}
        assert len(picks) == 1


def test_seeded_random_uses_both_candidates():
    r = _tied()
    picks = {tuple(select(r, TiePolicy("seeded-random", s))) for s in range(64)}
    assert len(picks) == 2


def test_unknown_tie_mode():
    with pytest.raises(ValueError):
        TiePolicy("random")


def test_projection_result_invariants():
    with pytest.raises(ValueError):
        ProjectionResult(points=(), distance=0.0)
    with pytest.raises(ValueError):
        ProjectionResult(points=(np.zeros(2),), distance=0.0, chosen_index=1)


def test_svd_small_examples(rng):
    U, S, V = svd_small(np.diag([3.0, 1.0]))
    assert np.allclose(np.diag(S), [3.0, 1.0])
    U, S, V = svd_small(np.zeros((2, 2)))
    assert np.array_equal(S, np.zeros((2, 2)))
    assert np.array_equal(U, np.eye(2)) and np.array_equal(V, np.eye(2))

    M = rng.standard_normal((5, 5))
    U, S, V = svd_small(M)
    assert np.linalg.norm(U @ S @ V.T - M) <= 1e-10 * max(1.0, np.linalg.norm(M))
    assert np.allclose(U.T @ U, np.eye(5), atol=1e-10)
    assert np.allclose(V.T @ V, np.eye(5), atol=1e-10)
    s = np.diag(S)
    assert np.all(np.diff(s) <= 0) and np.all(s >= 0)


def test_svd_small_rectangular_and_errors(rng):
    M = rng.standard_normal((3, 6))
    U, S, V = svd_small(M)
    assert S.shape == (3, 6)
    assert np.linalg.norm(U @ S @ V.T - M) <= 1e-10 * np.linalg.norm(M)
    with pytest.raises(ValueError):
        svd_small(np.array([[1.0, np.inf]]))
    with pytest.raises(ValueError):
        svd_small(np.zeros((65, 2)))


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.integers(0, 2**31 - 1))
def test_svd_small_reconstruction_property(n, m, seed):
    M = np.random.default_rng(seed).standard_normal((n, m))
    U, S, V = svd_small(M)
    assert np.linalg.norm(U @ S @ V.T - M) <= 1e-10 * max(1.0, np.linalg.norm(M))
