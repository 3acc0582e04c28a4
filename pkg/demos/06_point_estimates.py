"""Three- and four-point estimates on a measured trace.

With gamma estimated from the trace and c = gamma/4, the constant
ell = min(1/2, 1 - sqrt(2c/gamma), c/(2+c)) makes both estimates hold on
every building block of the packman run.
"""
# %%
from projkit import estimate_separability, four_point_check, run_gallery, three_point_check

(trace, _), = run_gallery(["packman"])
gamma = estimate_separability(trace, [0.0])[0].gamma_hat
rep3 = three_point_check(trace, gamma, gamma / 4)
rep4 = four_point_check(trace, rep3.ell)
print(f"gamma_hat = {gamma:.5f}, ell = {rep3.ell:.5f}")
print(f"three-point: {len(rep3.violations)} violations in {rep3.checked} blocks, "
      f"worst relative excess {rep3.max_excess:.3g}")
print(f"four-point:  {len(rep4.violations)} violations in {rep4.checked} quadruples")
