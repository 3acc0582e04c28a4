"""Averaged projections are alternating projections in a product space.

Projecting onto C_1 x ... x C_m and onto the diagonal, then reading off
the first block, gives exactly the averaged iteration x <- mean_i P_i(x).
"""
# %%
import numpy as np

from projkit import AffineSubspace, HalfSpace, StopRule, averaged_projections

rng = np.random.default_rng(0)
sets = [HalfSpace(rng.normal(size=3), 0.5), AffineSubspace(np.zeros(3), rng.normal(size=(2, 3))),
        HalfSpace(rng.normal(size=3), -0.2)]
x0 = np.array([3.0, -2.0, 1.0])
trace = averaged_projections(sets, x0, StopRule(max_iter=2000))
base = trace.extras["base_iters"]

x = x0.copy()
worst = 0.0
for k in range(1, len(base)):
    x = np.stack([S.project(x) for S in sets]).sum(axis=0) / len(sets)
    worst = max(worst, np.abs(x - base[k]).max())
print(trace.status, "after", trace.n_steps, "steps; limit", base[-1])
print("largest difference to the direct recursion:", worst)
