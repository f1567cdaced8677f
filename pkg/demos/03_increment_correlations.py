"""How increments of the sub-mixed process correlate, compared with the mixed process."""

import numpy as np

from smfbm import IncrementWindow, IntervalPair, adjacent_corr_pair, cov_gap, incr_corr, lag_cov, lag_cov_asymptote
from smfbm import nonoverlap_cov_mfbm, nonoverlap_cov_smfbm

# Correlation between [0, 1] and [2, 3] changes sign with H - 1/2.
w = IncrementWindow(0.0, 2.0, 1.0)
for h in (0.2, 0.4, 0.5, 0.6, 0.8):
    print(f"H={h}: rho={incr_corr(w, (1, 1), h):+.5f}")

# A larger Brownian weight dilutes the correlation.
print("|rho| along a:", [round(abs(incr_corr(w, (a, 1), 0.7)), 5) for a in (0, 0.5, 1, 2, 4)])

# On disjoint intervals the sub-mixed covariance is pulled toward zero
# relative to the mixed one; the gap has the opposite sign to H - 1/2.
pair = IntervalPair(0, 1, 1, 2)
print(" H      R         C         D")
for h in np.linspace(0.1, 0.9, 9):
    print(f"{h:.1f} {nonoverlap_cov_mfbm(pair, (1, 1), h):+.5f} {nonoverlap_cov_smfbm(pair, (1, 1), h):+.5f} "
          f"{cov_gap(pair, (1, 1), h):+.5f}")

# Adjacent increments: the sub-mixed correlation never exceeds the mixed one.
for u in (0, 1, 5):
    rs, rm = adjacent_corr_pair(u, 1.0, (1, 1), 0.7)
    print(f"u={u}: smfbm {rs:.5f} <= mfbm {rm:.5f}")

# Unit increments n apart decay like n**(2H-3), so they are summable.
for n in (10, 1000, 100000):
    c = lag_cov(1, n, (0, 1), 0.7)
    print(f"n={n:>6}: C={c:.3e}  ratio to asymptote {c / lag_cov_asymptote(1, n, (0, 1), 0.7):.6f}")
