"""
Phase retrieval
===============

Gerchberg-Saxton error reduction with a known modulus in the second
plane, then the two-pixel lift of the spiral counterexamples.
"""

# %%
import numpy as np

from projlab import Tolerances
from projlab.core import from_complex, to_complex
from projlab.phase import (
    LiftMaps, PriorSpec, dft, gs_counterexample_run, gs_run, hio_counterexample_run, prior_set,
)

rng = np.random.default_rng(7)
N = 4
x_true = from_complex(rng.standard_normal(N) + 1j * rng.standard_normal(N))
m = np.abs(to_complex(dft(x_true)))
m_tilde = np.abs(to_complex(x_true))
prior = PriorSpec("second-plane", {"m_tilde": m_tilde.tolist()})

# %% start from the prior projection of a perturbed signal
x0 = prior_set(prior, N).project(x_true + 0.3 * rng.standard_normal(2 * N)).point
tr = gs_run(m, prior, x0, Tolerances(max_iter=10**5))
x, y = to_complex(tr.a[-1]), to_complex(tr.b[-1])
print(f"{tr.stop_reason} after {len(tr)}; better than zero: {tr.info['better_than_zero']}")
print("| |x*| - m~ |  :", np.max(np.abs(np.abs(x) - m_tilde)))
print("| |y^*| - m |  :", np.max(np.abs(np.abs(to_complex(dft(tr.b[-1]))) - m)))
print("x* = m~ y*/|y*|:", np.max(np.abs(x - m_tilde * y / np.abs(y))))

# %% two pixels: GS on the lifted spiral shadows the R^3 iteration exactly
lifted, r3 = gs_counterexample_run(1.0, 2000)
print("max shadow error:", float(np.max(lifted.info["shadow_error"])))
print("shadow of the last iterate:", LiftMaps().shadow(lifted.a[-1]))

# %% Douglas-Rachford on the double spiral hops between the inner spiral and the cylinder
dr = hio_counterexample_run(1.0, 2000)
t = dr.info["t"]
print(f"t_k: {t[0]:.3f} -> {t[-1]:.3f}, strictly increasing: {dr.info['increasing']}")
print(f"pattern errors {dr.info['pattern_error_inner']:.1e}, {dr.info['pattern_error_cylinder']:.1e}")
