"""Expected quadratic variation along refining partitions, and a Monte Carlo check."""

import numpy as np

from smfbm import ProcessSpec, SamplerConfig, TimeGrid, expected_qv, qv_limit_class, realized_qv, sample
from smfbm.diagnostics import loglog_slope

ns = [2**k for k in range(4, 17, 2)]
for h in (0.3, 0.5, 0.8):
    a_n = [expected_qv(1.0, n, (1, 1), h) for n in ns]
    print(f"H={h} ({qv_limit_class((1, 1), h).value}):", " ".join(f"{x:.4f}" for x in a_n))

# For H > 1/2 the fractional part's contribution vanishes like n**(1-2H).
ns = [2**k for k in range(8, 17)]
gaps = [expected_qv(1.0, n, (1, 1), 0.8) - 1.0 for n in ns]
print(f"fitted exponent {loglog_slope(ns, gaps):.3f} vs 1-2H = {1 - 1.6:.1f}")

# The sampled sum of squared increments averages to the same numbers.
grid = TimeGrid.uniform(0.0, 1.0, 256)
ens = sample(SamplerConfig(ProcessSpec.smfbm(1, 1, 0.7), grid, 3000, seed=5))
est = realized_qv(ens)
print(f"realized {est.value:.4f} +/- {est.std_error:.4f}, expected {expected_qv(1.0, 256, (1, 1), 0.7):.4f}")
