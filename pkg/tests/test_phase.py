import math

import numpy as np
import pytest

from projlab.core import Tolerances, from_complex, to_complex
from projlab.phase import (
    LiftMaps, PriorSpec, better_than_zero, dft, gs_counterexample_run, gs_run, hio_counterexample_run, idft,
    lifted_projector, magnitude_set, prior_set, read_magnitude_csv, read_signal_csv, write_magnitude_csv,
    write_signal_csv,
)
from projlab.sets import cylinder_set, double_spiral_set, spiral_point, spiral_set


def test_dft_two_pixels_is_real_involution():
    x = from_complex([1 + 2j, 3 - 1j])
    H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    assert np.allclose(to_complex(dft(x)), H @ to_complex(x), atol=1e-15)
    assert np.allclose(dft(dft(x)), x, atol=1e-15)
    assert np.allclose(idft(x), dft(x), atol=1e-15)


def test_dft_kernel_sign_and_unitarity(rng):
    e1 = from_complex([0, 1, 0, 0])
    w = np.arange(4)
    assert np.allclose(to_complex(dft(e1)), np.exp(2j * np.pi * w / 4) / 2)
    x = rng.standard_normal(16)
    assert np.linalg.norm(dft(x)) == pytest.approx(np.linalg.norm(x))
    assert np.allclose(idft(dft(x)), x, atol=1e-14)


def test_magnitude_set_projection(rng):
    m = np.array([1.0, 0.5, 2.0, 0.0])
    B = magnitude_set(m)
    q = rng.standard_normal(8)
    p = B.project(q).point
    assert np.allclose(np.abs(to_complex(dft(p))), m, atol=1e-14)
    # phases of the transform are kept
    zq, zp = to_complex(dft(q)), to_complex(dft(p))
    nz = m > 0
    assert np.allclose(np.angle(zp[nz]), np.angle(zq[nz]), atol=1e-12)
    assert np.allclose(B.project(p).point, p, atol=1e-14)


def test_prior_set_kinds():
    N = 3
    for kind, params in [("support", {"support": [0]}), ("nonneg-real", {}), ("sparsity", {"k": 1}),
                         ("sparse-phase", {"k": 1}), ("second-plane", {"m_tilde": [1, 1, 1]})]:
        assert prior_set(PriorSpec(kind, params), N).dimension == 2 * N
    with pytest.raises(ValueError):
        PriorSpec("positivity")
    with pytest.raises(ValueError):
        prior_set(PriorSpec("lifted-spiral"), 3)
    with pytest.raises(ValueError):
        prior_set(PriorSpec("second-plane", {"m_tilde": [1, 1]}), 3)
    assert prior_set(PriorSpec("lifted-double-spiral"), 2).family == "lifted"


def test_gs_support_prior_monotone_and_flags(rng):
    x_true = from_complex([1.0 + 0.5j, -0.7j, 0, 0, 0, 0])
    m = np.abs(to_complex(dft(x_true)))
    prior = PriorSpec("support", {"support": [0, 1]})
    x0 = prior_set(prior, 6).project(x_true + 0.05 * rng.standard_normal(12)).point
    tr = gs_run(m, prior, x0, Tolerances(max_iter=2000))
    assert np.all(np.diff(tr.r) <= 1e-12)
    assert tr.info["better_than_zero"]
    assert better_than_zero(x0, m)
    assert not better_than_zero(np.zeros(12), m)


def test_gs_input_checks():
    with pytest.raises(ValueError):
        gs_run([1.0, 1.0], PriorSpec("second-plane", {"m_tilde": [1.0, 2.0]}), [1, 0, 1, 0])
    with pytest.raises(ValueError):
        gs_run([1.0, 1.0], PriorSpec("support", {"support": [0]}), [1, 0, 1, 0])


def test_lift_maps_round_trip(rng):
    L = LiftMaps()
    for _ in range(10):
        p = rng.standard_normal(3)
        assert np.allclose(L.shadow(L.lift(p)), p, atol=1e-15)
    with pytest.raises(ValueError):
        LiftMaps(3)


@pytest.mark.parametrize("which,S3", [("A_spiral", spiral_set), ("A_double", double_spiral_set),
                                      ("B_cyl", cylinder_set)])
def test_lifted_projector_is_conjugated(which, S3, rng):
    L = LiftMaps()
    P = lifted_projector(which)
    S = S3()
    for _ in range(5):
        p = np.array([rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0, 1)])
        got = L.shadow(P.project(L.lift(p)).point)
        assert np.allclose(got, S.project(p).point, atol=1e-12)
    with pytest.raises(ValueError):
        lifted_projector("C")


def test_gs_counterexample_short_run():
    lifted, r3 = gs_counterexample_run(1.0, 200)
    assert np.max(lifted.info["shadow_error"]) <= 1e-10
    assert np.all(np.diff(lifted.r) <= 1e-12)
    assert np.allclose(LiftMaps().shadow(lifted.a[0]), spiral_point(1.0))
    with pytest.raises(ValueError):
        gs_counterexample_run(0.0, 10)


def test_hio_counterexample_short_run():
    tr = hio_counterexample_run(1.0, 200)
    assert tr.info["pattern_error_inner"] <= 1e-8
    assert tr.info["pattern_error_cylinder"] <= 1e-8
    assert tr.info["lift_error"] <= 1e-12
    assert tr.info["increasing"]
    t = tr.info["t"]
    assert t[0] == pytest.approx(1.0, abs=1e-9) and np.diff(t)[-1] < np.diff(t)[0]


def test_signal_and_magnitude_csv(tmp_path):
    x = from_complex([1.5 - 2j, 0.1 + 1e-17j, -3.0])
    write_signal_csv(tmp_path / "x.csv", x)
    assert np.array_equal(read_signal_csv(tmp_path / "x.csv"), x)
    write_magnitude_csv(tmp_path / "m.csv", [1.0, 0.25])
    assert read_magnitude_csv(tmp_path / "m.csv").m == (1.0, 0.25)
    (tmp_path / "bad.csv").write_text("index,re,im\n0,1,0\n2,1,0\n")
    with pytest.raises(ValueError):
        read_signal_csv(tmp_path / "bad.csv")
