"""Monte Carlo estimators matching the analytic formulas.

All estimators are deterministic reductions of a :class:`PathEnsemble`.
"""

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError

__all__ = ["EstimateWithError", "empirical_cov", "empirical_incr_corr", "realized_qv"]


@dataclass(frozen=True)
class EstimateWithError:
    value: float
    std_error: float
    n_samples: int

    def within(self, target, k=5.0):
        """True if ``|value - target| <= k * std_error``."""
        return abs(self.value - target) <= k * self.std_error


def _need_paths(ensemble):
    if ensemble.n_paths < 2:
        raise DomainError("estimators need at least 2 paths")


def _mean_and_se(x):
    n = x.size
    mean = float(np.mean(x))
    se = float(np.std(x, ddof=1) / math.sqrt(n))
    return mean, se


def empirical_cov(ensemble, i, j):
    """Mean of ``X_i X_j`` across paths.

    No mean subtraction: the processes are centred by construction. The
    standard error is the sample standard deviation of the products over
    ``sqrt(n_paths)``.
    """
    _need_paths(ensemble)
    m = ensemble.values.shape[1]
    for idx in (i, j):
        if not 0 <= idx < m:
            raise DomainError(f"grid index {idx} out of range 0..{m - 1}")
    prod = ensemble.values[:, i] * ensemble.values[:, j]
    value, se = _mean_and_se(prod)
    return EstimateWithError(value, se, ensemble.n_paths)


def empirical_incr_corr(ensemble, window):
    """Pearson correlation of ``X_{t+h} - X_t`` and ``X_{s+h} - X_s``.

    The four endpoints must be grid points (no interpolation). The standard
    error is ``1 / sqrt(n_paths - 3)``, the standard error of
    ``atanh(rho_hat)``; it bounds the delta-method error of ``rho_hat``
    itself, ``(1 - rho**2) / sqrt(n_paths - 3)``, from above.
    """
    _need_paths(ensemble)
    n = ensemble.n_paths
    if n < 4:
        raise DomainError("correlation needs at least 4 paths")
    g = ensemble.grid
    s, t, h = window.s, window.t, window.h
    i0, i1 = g.index_of(s), g.index_of(s + h)
    k0, k1 = g.index_of(t), g.index_of(t + h)
    x = ensemble.values[:, k1] - ensemble.values[:, k0]
    y = ensemble.values[:, i1] - ensemble.values[:, i0]
    rho = float(np.corrcoef(x, y)[0, 1])
    return EstimateWithError(rho, 1.0 / math.sqrt(n - 3), n)


def realized_qv(ensemble):
    """Path average of the sum of squared increments.

    The grid must be uniform and start at 0; the expectation is then
    :func:`smfbm.diagnostics.expected_qv` with ``T`` the last grid point and
    ``n`` the number of intervals.
    """
    _need_paths(ensemble)
    g = ensemble.grid
    if g.points[0] != 0.0 or not g.is_uniform():
        raise DomainError("realized_qv needs a uniform grid starting at 0")
    qv = np.sum(np.diff(ensemble.values, axis=1) ** 2, axis=1)
    value, se = _mean_and_se(qv)
    return EstimateWithError(value, se, ensemble.n_paths)
