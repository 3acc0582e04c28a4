"""Tangential intersections converge sublinearly.

The epigraph of t^2 touches the lower halfplane at the origin.  The gap
decays like k^(-1/2), the power rate predicted for separability exponent
omega = 1.  For exp(-1/x^2) the contact is flat to infinite order and
the iterates barely move.
"""
# %%
import numpy as np

from projkit import fit_rate, predicted_rate, run_gallery
from projkit.gallery import late_separability

(trace, verdict), = run_gallery(["parabola_tangent"])
fit = fit_rate(trace, "power", limit=[0.0, 0.0])
print(verdict.line())
print(f"rho_hat = {fit.rho_hat:.4f}, predicted rho(1) = {predicted_rate(1.0)}")

# the scalar recurrence: x_{k+1} solves t + 2 t^3 = x_k
x = 0.5
for _ in range(trace.n_steps):
    x = np.roots([2.0, 0.0, 1.0, -x])
    x = float(x[np.isreal(x)].real[0])
print("2-D run x =", trace.limit[0], " scalar recurrence x =", x)

# %% A flat contact
(trace, verdict), = run_gallery(["flat_tangent"])
print(verdict.line())
print("x after", trace.n_steps, "steps:", trace.limit[0])
for est in late_separability(trace, omega_grid=[0.0, 1.0, 1.5]):
    print(f"late window: omega={est.omega}  gamma_hat={est.gamma_hat:.3g}")
