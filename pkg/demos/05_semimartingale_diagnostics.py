"""Numerical evidence behind the semimartingale classification."""

import numpy as np

from smfbm import ProcessSpec, cond_l2_lower_bound, cond_l2_sum, l2_mixed_partial_probe, markov_defect
from smfbm import quasi_mart_sum, semimart_verdict
from smfbm.diagnostics import loglog_slope

# The process is not Markov unless H = 1/2.
for h in (0.3, 0.5, 0.7):
    print(f"Markov defect at (1,2,3), H={h}: {markov_defect(1, 2, 3, ProcessSpec.smfbm(1, 1, h)):+.6f}")

# One-step conditional sums grow like n**(3/2 - 2H) for 1/2 < H < 3/4.
ns = [2**k for k in range(10, 17)]
for h in (0.55, 0.6, 0.7, 0.9):
    sums = [quasi_mart_sum(1.0, n, (1, 1), h)[0] for n in ns]
    print(f"H={h}: slope {loglog_slope(ns, sums):+.3f}, predicted {1.5 - 2 * h:+.2f}")

# At H = 3/4 the full-past conditional sums stay above a slowly growing bound.
for n in (64, 256, 512):
    res = cond_l2_sum(1.0, n, (1, 1), 0.75)
    print(f"n={n}: sum {res.total:.4f} >= bound {cond_l2_lower_bound(1.0, n, (1, 1)).sum():.4f}, "
          f"lambda_max {res.lambda_max:.2e} <= {res.lambda_max_bound:.2e}")

# The mixed partial of the fractional covariance is square integrable only for H > 3/4.
for h in (0.6, 0.7, 0.8, 0.9):
    est, conv = l2_mixed_partial_probe(1.0, (1, 1), h)
    print(f"H={h}: last estimates {np.round(est[-3:], 5)}, converged={conv}")

for h in (0.3, 0.5, 0.6, 0.75, 0.8):
    v = semimart_verdict((1, 1), h)
    print(f"H={h}: semimartingale={v.is_semimartingale} ({v.regime.value})")
