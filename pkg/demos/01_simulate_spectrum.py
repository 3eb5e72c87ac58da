"""Cavity supermodes versus what an 8-pixel detector sees.

Run: python3 demos/01_simulate_spectrum.py
"""

import numpy as np

from spopo import gaussian as g
from spopo import model as m
from spopo.reconstruction import gram_schmidt_supermodes

spec = m.realistic_spec()
lam0, rho, _ = m.analytic_eigenvalues(spec)
print(f"Lambda_0 = {lam0:.2f}, eigenvalue ratio = {rho:.4f}")

run = m.simulate(spec)
sm = run.supermodes
vx, vp = m.supermode_variances(sm.lambdas, sm.lambda0, run.settings.pump_ratio, run.settings.loss)
cavity_db = 10 * np.log10(np.minimum(vx, vp))
print(f"cavity: {np.sum(cavity_db < 0)} squeezed supermodes, first five {np.round(cavity_db[:5], 2)} dB")

widths = sm.rms_widths()[:5]
print("width ratios", np.round(widths / widths[0], 3), "vs sqrt(2k+1)", np.round(np.sqrt(2 * np.arange(5) + 1), 3))

spectrum = gram_schmidt_supermodes(run.cov_pixels).spectrum
for k, (sq, q) in enumerate(zip(spectrum.squeezing_db, spectrum.quadrature)):
    print(f"  pixel mode {k + 1}: {sq:6.2f} dB ({q})")
print(f"{spectrum.n_squeezed()} pixel modes below -0.5 dB, purity {g.purity(run.cov_pixels):.3f}")
