"""
EM and Cadzow
=============

Both are alternating projections in disguise.  EM alternates the
row-sum constraint of the data with the parameter set, Cadzow
alternates a matrix structure with a rank bound.
"""

# %%
import numpy as np

from projlab import Tolerances
from projlab.apps import EMProblem, cadzow_denoise, em_run
from projlab.config import run_config
from projlab.engine import run_averaged
from projlab.presets import preset
from projlab.sets import interval_union_set

# %% one observation y = x1 + x2 = 4 with x_i in {0} U [1, 2]
omega = interval_union_set([[(0, 0), (1, 2)], [(0, 0), (1, 2)]])
p = EMProblem([[1.0, 1.0]], [4.0], omega)
for x0 in ([0.0, 0.0], [0.0, 1.0]):
    tr, st = em_run(p, x0)
    print(f"x0 = {x0}: x* = {np.round(st.x, 10)}, {len(tr)} steps, spread {st.spread:.1e}")

# %% averaged projections are EM with c = (1, 1), y = 0 and Omega = C1 x (-C2)
C1, C2 = [(-5.0, 5.0), (7.0, 8.0)], [(-9.0, -8.0), (3.0, 3.5)]
avg = run_averaged([interval_union_set([C1]), interval_union_set([C2])], [0.2])
em, _ = em_run(EMProblem([[1.0, 1.0]], [0.0], interval_union_set([C1, [(-b, -a) for a, b in C2]])),
               [0.2, -3.0])
n = min(len(em), len(avg) - 1)
print("averaged vs EM:", float(np.max(np.abs(em.b[:n + 1, 0] - avg.info["x"][1:n + 2, 0]))))

# %% Cadzow on a line of 2x2 matrices: slow convergence to the rank-one point
tr, summary, _ = run_config(preset("cadzow-ex2"))
print("rate:", summary["diagnostics"]["rate"]["kind"], round(summary["diagnostics"]["rate"]["rho"], 3))

# %% escape: S11 grows, but only like (4k)^(1/4)
tr, _, _ = run_config(preset("cadzow-escape"))
s11 = tr.a[:, 0]
for k in (1, 10, 100, 1000, 10000):
    print(f"k = {k:5d}: S11 = {s11[k]:.4f}, (4k)^(1/4) = {(4 * k) ** 0.25:.4f}")

# %% de-noising a sinusoid
rng = np.random.default_rng(0)
t = np.arange(64)
clean = np.sin(0.3 * t)
out, info = cadzow_denoise(clean + 0.2 * rng.standard_normal(64), 32, 2, Tolerances(max_iter=10**4), True)
print(f"sigma_3 = {info['sigma_tail']:.1e}; error {np.linalg.norm(out - clean):.3f}")
