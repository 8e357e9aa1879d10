"""Log-log slope of A_emp / B against the dilation factor R."""
import numpy as np

from hglk.besov import japanese_weight
from hglk.evolve import rescaled_commutator_norms, rescaling_scan
from hglk.grid import Grid
from hglk.suites import rescaling_build

L0, n0, a = 16.0, 32, 0.75
base = Grid(n0, L0)
norms = rescaled_commutator_norms(rescaling_build(L0), base, [1, 2, 4, 8], a)
w = np.asarray(japanese_weight(base, a).samples)
inv_l2 = float(np.sqrt(base.spacing * np.sum(w**-2.0)))
for p in (1.5, 2.0, 2.5, 3.0):
    rows, slope = rescaling_scan(norms, inv_l2, p)
    print(f"p={p}: slope {slope:+.3f}  expected {-1 + (p - 1) / 2:+.3f}  "
          + " ".join(f"R={r.R}:{r.ratio:.3e}" for r in rows))
