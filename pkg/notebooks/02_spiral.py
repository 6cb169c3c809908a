"""
A spiral that never converges
=============================

The spiral a(t) = ((1 + e^-t) cos t, (1 + e^-t) sin t, e^{-t/2})
winds onto the circle F at the bottom of the cylinder.  Steps and
distances go to zero while the iterates keep turning, so every point of F
is an accumulation point.  In finite time
the turning slows down dramatically: after k blocks the parameter has
grown only logarithmically.
"""

# %%
import math

import numpy as np

from projlab import Tolerances, run_alternating, run_local_alternating
from projlab import diagnostics as dg
from projlab.sets import cylinder_point, cylinder_set, spiral_curve, spiral_point, spiral_set

A, B = spiral_set(), cylinder_set()

# %% the projection of a(t) onto the spiral lands strictly inside its bracket
for t in (1.0, 3.0, 6.0):
    tau = A.project(cylinder_point(t)).param[1]
    print(f"t = {t}: tau = {tau:.6f} in ({t}, {t - 2 * math.log(1 - math.exp(-t / 2)):.6f})")

# %% ten thousand blocks from a(1)
tr = run_alternating(A, B, spiral_point(1.0), Tolerances(max_iter=10**4))
t_of_a = np.arctan2(tr.a[:, 1], tr.a[:, 0])
print(f"r_K = {tr.r[-1]:.3e}, last step = {tr.step_a[-1]:.3e}")
print(f"winding of b_k so far: {dg.winding_angle(tr.b):.3f} rad")
for K in (10, 100, 1000, 10000):
    print(f"  K = {K:5d}: angle swept {dg.winding_angle(tr.b[:K + 1]):.3f}")

# %% the warm-started local iteration follows the same path
loc = run_local_alternating(spiral_curve(), B, spiral_point(1.0), 1.0, Tolerances(max_iter=2000))
print("max |r_local - r_global| over 2000 blocks:", float(np.max(np.abs(loc.r - tr.r[:2000]))))
print("global fallbacks:", loc.info["certificate"].count("global"))
