"""
Gap and tangency on a parabola
==============================

Alternating projections between the x-axis and the epigraph of
1 + a x^2/2 versus a x^2/2: a positive gap gives R-linear convergence,
tangency slows it down to a power law.
"""

# %%
import numpy as np

from projlab import Tolerances, run_alternating
from projlab import diagnostics as dg
from projlab.sets import coordinate_axis, epigraph_quadratic_set

axis = coordinate_axis()

# %% gap r* = 1: the distance settles at 1 and the b_k approach (0, 1) geometrically
tr = run_alternating(axis, epigraph_quadratic_set(1.0, 1.0), [1.0, 0.0])
gap = dg.estimate_gap(tr)
fit = dg.fit_angle_exponent(tr, gap)
rate = dg.fit_rate(tr.b, window=50)
print(f"{tr.stop_reason} after {len(tr)} blocks, r* = {gap.r_star:.12f}")
print(f"angle exponent omega = {fit.omega:.3f}, theta = {fit.theta:.3f}")
print(f"observed rate: {rate.kind}, q = {rate.q:.4f}; predicted: {dg.predicted_rate(0.75, gap.r_star).kind}")

# %% the three- and four-point estimates at the fitted constants
three = dg.check_three_point(tr, fit.gamma / 4, fit.gamma, gap.r_star)
four = dg.check_four_point(tr, three.ell_used, gap.r_star)
print(f"ell = {three.ell_used:.4f}: {len(three.violations)} + {len(four.violations)} violations")

# %% tangency: x_{k+1} + x_{k+1}^3 / 2 = x_k, so x_k ~ k^(-1/2)
tr = run_alternating(axis, epigraph_quadratic_set(0.0, 1.0), [1.0, 0.0], Tolerances(max_iter=10**5))
rate = dg.fit_rate(tr.b, drop_tail=0.99)
k = np.array([10, 100, 1000, 10000])
print(f"{rate.kind}, rho = {rate.rho:.3f} (r^2 = {rate.r_squared:.4f})")
print("sqrt(k) x_k:", np.round(np.sqrt(k) * tr.a[k, 0], 4))
