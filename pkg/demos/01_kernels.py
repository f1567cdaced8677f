"""Covariance kernels of the four process families and how they relate."""

import numpy as np

from smfbm import ProcessSpec, TimeGrid, cov_matrix, fbm_cov, mfbm_cov, rescale_params, sfbm_cov, smfbm_cov, smfbm_var

np.set_printoptions(precision=4, suppress=True)

# Start with a single pair of times. The sub-fractional covariance sits
# below the fractional one for H > 1/2.
s, t = 1.0, 2.0
for h in (0.3, 0.5, 0.7):
    print(f"H={h}: fbm {fbm_cov(s, t, h):.4f}  sfbm {sfbm_cov(s, t, h):.4f}")

# Mixing in a Brownian part adds a**2 min(s, t) to either kernel.
print("mfbm  (1,1), H=0.7:", mfbm_cov(s, t, (1, 1), 0.7))
print("smfbm (1,1), H=0.7:", smfbm_cov(s, t, (1, 1), 0.7))

# The sfBm is the even part of a two-sided fBm, so its kernel is an
# average of four fBm covariances.
four = 0.5 * sum(fbm_cov(x, y, 0.7) for x in (s, -s) for y in (t, -t))
print("four-term check:", four, sfbm_cov(s, t, 0.7))

# Variances grow like a**2 t + b**2 (2 - 2**(2H-1)) t**2H.
ts = np.array([0.25, 1.0, 4.0])
print("variances, H=0.75:", smfbm_var(ts, (1, 1), 0.75))

# On a grid, the covariance matrix is symmetric and positive semidefinite.
grid = TimeGrid.uniform(0, 1, 8)
C = cov_matrix(ProcessSpec.smfbm(1, 1, 0.7), grid).entries
print("smallest eigenvalue:", np.linalg.eigvalsh(C).min())

# Stretching time by h is the same as changing the weights.
h = 4.0
a, b = rescale_params((1, 1), 0.7, h)
lhs = cov_matrix(ProcessSpec.smfbm(1, 1, 0.7), grid.scaled(h)).entries
rhs = cov_matrix(ProcessSpec.smfbm(a, b, 0.7), grid).entries
print(f"weights after scaling by {h}: ({a:.4f}, {b:.4f}); max mismatch {np.abs(lhs - rhs).max():.2e}")
