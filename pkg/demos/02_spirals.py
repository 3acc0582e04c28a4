"""Spirals: two ways alternating projections can behave on non-convex sets.

Discrete spirals built on equally spaced rays converge linearly.  The
continuous spiral that winds onto the unit circle never converges: the gap
between the iterates goes to zero while the iterates keep turning.
"""
# %%
import math

import numpy as np

from projkit import HolderParams, estimate_separability, example, holder_probe, run_gallery
from projkit.gallery import unwrapped_winding

(trace, verdict), = run_gallery(["discrete_spiral_8"])
print(verdict.line())
print("a_4 (one full tour):", trace.a_iters[4 - trace.a_offset])
print("gamma_hat at omega=0:", estimate_separability(trace, [0.0])[0].gamma_hat,
      " vs 1 + sqrt(2)/2 =", 1 + math.sqrt(2) / 2)

# %% The irrational-angle variant
(trace, verdict), = run_gallery(["discrete_spiral_irrational"])
print(verdict.line())

# %% The spiral around the circle stalls
(trace, verdict), = run_gallery(["spiral_circle"])
print(verdict.line())
print("final gap:", trace.gaps[-1], " total winding (rad):", verdict.detail["winding_total"])
# gap falls like exp(-phi); turning 4 pi below gap 1e-3 would need ~1e8 iterations
print("winding while gap < 1e-3:", verdict.detail["winding_below_gap"])

# %% The Hölder condition fails near the circle
A, B = example("spiral_circle").build()
rep = holder_probe(A, B, [1.0, 0.0], HolderParams(0.0, 0.1, neighborhood_radius=0.05))
print(len(rep.violations), "violations; first cos(beta) =", rep.violations[0].cos_beta)

# %% In three dimensions: a spiral descending onto a cylinder
(trace, verdict), = run_gallery(["spiral_cylinder"])
print(verdict.line(), " winding:", round(verdict.detail["winding_total"], 3))
print("gaps monotone:", bool(np.all(np.diff(trace.gaps) <= 0)))
