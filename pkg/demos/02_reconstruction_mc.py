"""Band variances in, covariance and error bars out.

A simulated state is turned into the per-band variance records a homodyne
experiment would produce, reassembled, and resampled to get error bars.

Run: python3 demos/02_reconstruction_mc.py [n_draws]
"""

import sys

import numpy as np

from spopo import model as m
from spopo import reconstruction as rc

n_draws = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
run = m.simulate(m.realistic_spec())

mset = rc.generate_measurements(run.cov_pixels, run.pixels.band_powers, sigma=0.02)
print(f"{len(mset.records)} records for {mset.n_bands} bands")

cov = rc.assemble_covariance(mset)
print("reassembly error", np.max(np.abs(cov - run.cov_pixels)))

cx, cp = rc.correlation_matrix(cov)
np.set_printoptions(precision=2, suppress=True)
print("x correlations\n", cx)
print("p correlations\n", cp)

mc = rc.monte_carlo_spectrum(mset, n_draws, seed=2, workers=2)
for row in mc.spectrum.rows():
    print(row)
