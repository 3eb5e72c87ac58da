"""Nullifier table for the six-node graphs at two squeezing levels.

Each row is the optimized basis for one graph; values below 1 beat shot
noise.  Takes a couple of minutes.

Run: python3 demos/04_cluster_table.py
"""

import numpy as np

from spopo import cluster as cl
from spopo import gaussian as g
from spopo import model as m

spec = m.realistic_spec()
lam0, _, lams = m.analytic_eigenvalues(spec, 6)

for max_db, target in ((-2.34, 0.84), (-6.48, 0.69)):
    r, loss = m.tune_pump_and_loss(lams, lam0, max_db, target)
    cov = m.supermode_covariance(lams, lam0, r, loss)
    print(f"\nmax squeezing {max_db} dB, purity {g.purity(cov):.2f} (pump {r:.3f}, loss {loss:.3f})")
    for name in cl.TABLE_GRAPHS:
        res = cl.optimize_cluster_basis(cov, cl.graph_library(name), cl.ESConfig(seed=1))
        vals = ", ".join(f"{v:.2f}" for v in res.report.variances)
        print(f"  {name:<30} {{{vals}}}  mean {np.mean(res.report.variances):.3f}")
