"""Is every way of cutting the comb in two an entangled cut?

Compares the simulated 8-band state against a single squeezed mode spread
over the same bands.

Run: python3 demos/03_ppt_bipartitions.py
"""

import numpy as np

from spopo import entanglement as ent
from spopo import model as m
from spopo.reconstruction import gram_schmidt_supermodes

r = m.pump_ratio_for_squeezing(-6.0)
run = m.simulate(m.realistic_spec(), m.SimulationSettings(pump_ratio=r, loss=0.0))
summary = ent.ppt_all(run.cov_pixels)

gs = gram_schmidt_supermodes(run.cov_pixels)
n = len(gs.spectrum)
ref = ent.single_mode_reference(gs.cov_supermodes[0, 0], gs.cov_supermodes[n, n], run.pixels.band_powers)

print(f"{summary.n_entangled}/{summary.n_partitions} bipartitions entangled")
print(f"{'cut':<22}{'full':>10}{'reference':>12}")
for res in summary.results[:5] + summary.results[-5:]:
    print(f"{res.bipartition.key:<22}{res.min_eig:10.4f}{ent.ppt_min_eigenvalue(ref, res.bipartition):12.4f}")
ref_mean = np.mean([ent.ppt_min_eigenvalue(ref, p.bipartition) for p in summary.results])
print(f"means: full {summary.values.mean():.4f}, single mode {ref_mean:.4f}")
