"""Linear convergence when two sets meet at an angle.

A narrow cone sits inside the mouth of a disc sector.  The sets are not
convex, but they meet at the origin at a positive angle, and alternating
projections approach it at a geometric rate.
"""
# %%
import numpy as np

from projkit import estimate_separability, example, fit_rate, run_gallery

spec = example("packman")
print(spec.description)
(trace, verdict), = run_gallery(["packman"])
print(verdict.line())
print("steps:", trace.n_steps, " limit:", trace.limit)

# %% Per-projection contraction and the angle at which the sets meet
fit = fit_rate(trace, "linear", limit=[0.0, 0.0])
print(f"q per projection = {fit.q_factor:.6f}  (r^2 = {fit.r_squared:.6f})")
for est in estimate_separability(trace, [0.0, 0.5, 1.0]):
    print(f"omega={est.omega:4.2f}  gamma_hat={est.gamma_hat:.6f}  blocks={est.blocks_used}")

# %% The first few iterates
for k in range(5):
    print(k, np.round(trace.b_iters[k], 6))
