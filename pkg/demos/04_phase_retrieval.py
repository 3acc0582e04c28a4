"""Gerchberg-Saxton error reduction as alternating projections.

B holds the signals whose unitary DFT has a given modulus, A the signals
supported on the first three samples.  Started near a solution, the
iteration locks on to it.
"""
# %%
import numpy as np

from projkit import StopRule, SupportSet, dft, gerchberg_saxton
from projkit.fourier import to_real

rng = np.random.default_rng(7)
n = 8
mask = np.zeros(n, bool)
mask[:3] = True
z = np.zeros(n, complex)
z[:3] = rng.normal(size=3) + 1j * rng.normal(size=3)
x_true = to_real(z)
amplitude = np.abs(dft(z))

x0 = x_true + 0.05 * rng.normal(size=2 * n)
trace = gerchberg_saxton(amplitude, SupportSet(mask), x0, StopRule(max_iter=500))
res = trace.extras["residuals"]
print(trace.status, "after", trace.n_steps, "steps")
print("Fourier residual: start", res[0], " end", res[-1])
print("distance to the true signal:", np.linalg.norm(trace.limit - x_true))
