"""Second moments and correlations of smfBm increments.

Also holds the quantities used to compare the sub-mixed process with the
mixed one (``mfbm``): covariances of increments over non-overlapping
intervals, their gap, lag covariances of unit increments and the correlation
of adjacent increments.

Several closed forms are differences of nearly equal powers. They are written
in terms of the centred second difference of ``x**(2H)`` (see
:func:`smfbm._numerics.second_difference`), which keeps them accurate far
from the origin.
"""

from dataclasses import dataclass

import numpy as np

from ._numerics import as_output, pow2h, second_difference
from .exceptions import DomainError
from .kernels import validate_coeffs, validate_hurst

__all__ = [
    "IncrementWindow",
    "IntervalPair",
    "incr_second_moment",
    "incr_bounds",
    "incr_gamma",
    "incr_alpha",
    "incr_corr",
    "nonoverlap_cov_mfbm",
    "nonoverlap_cov_smfbm",
    "cov_gap",
    "lag_cov",
    "lag_cov_asymptote",
    "adjacent_corr_pair",
    "adjacent_shape_functions",
]


@dataclass(frozen=True)
class IncrementWindow:
    """Two increments of common lag ``h``: ``[s, s+h]`` and ``[t, t+h]``.

    Requires ``0 <= s <= t`` and ``0 < h <= t - s``; touching windows
    (``h == t - s``) are allowed. The fields may be equal-shape arrays,
    describing a batch of windows.
    """

    s: float
    t: float
    h: float

    def __post_init__(self):
        s, t, h = (np.asarray(x, dtype=float) for x in (self.s, self.t, self.h))
        if not np.all((0.0 <= s) & (s <= t) & (0.0 < h) & (h <= t - s)):
            raise DomainError(f"invalid increment window (s={s}, t={t}, h={h}); need 0 <= s <= t and 0 < h <= t - s")
        for name, val in zip("sth", (s, t, h)):
            object.__setattr__(self, name, as_output(val))


@dataclass(frozen=True)
class IntervalPair:
    """Non-overlapping intervals ``[u, v]`` and ``[s, t]`` with ``0 <= u < v <= s < t``."""

    u: float
    v: float
    s: float
    t: float

    def __post_init__(self):
        u, v, s, t = (float(x) for x in (self.u, self.v, self.s, self.t))
        if not (0.0 <= u < v <= s < t):
            raise DomainError(f"invalid interval pair ({u}, {v}, {s}, {t}); need 0 <= u < v <= s < t")
        for name, val in zip("uvst", (u, v, s, t)):
            object.__setattr__(self, name, val)


def _check_ordered(s, t):
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s < 0) or np.any(s > t):
        raise DomainError("increments need 0 <= s <= t")
    return s, t


def _sfbm_increment_moment(s, t, hurst):
    # (t-s)^{2H} - 2^{2H-1} D2((t+s)/2, (t-s)/2)
    half_sum = 0.5 * (s + t)
    half_gap = 0.5 * (t - s)
    return pow2h(t - s, hurst) - 2.0 ** (2.0 * hurst - 1.0) * np.asarray(
        second_difference(half_sum, half_gap, hurst, lower=s)
    )


def incr_second_moment(s, t, coeffs, hurst):
    """``E (S_t - S_s)**2`` for ``0 <= s <= t``.

    Closed form ``a**2 (t-s) + b**2 (-2**(2H-1) (t**2H + s**2H) + (t+s)**2H + (t-s)**2H)``.
    """
    s, t = _check_ordered(s, t)
    a, b = coeffs
    out = a * a * (t - s) + b * b * _sfbm_increment_moment(s, t, hurst)
    return as_output(out)


def _gamma_nu(hurst):
    hurst = np.asarray(hurst, dtype=float)
    c = 2.0 - 2.0 ** (2.0 * hurst - 1.0)
    gamma = np.where(hurst > 0.5, c, 1.0)
    nu = np.where(hurst >= 0.5, 1.0, c)
    return gamma, nu


def incr_bounds(s, t, coeffs, hurst):
    """Lower and upper bounds on the increment second moment.

    Returns ``(a**2 (t-s) + b**2 g (t-s)**2H, a**2 (t-s) + b**2 n (t-s)**2H)``
    where ``g = 2 - 2**(2H-1)`` if ``H > 1/2`` else 1 and
    ``n = 1`` if ``H >= 1/2`` else ``2 - 2**(2H-1)``. Both collapse to
    ``(a**2 + b**2)(t - s)`` at ``H = 1/2``.
    """
    s, t = _check_ordered(s, t)
    a, b = coeffs
    gamma, nu = _gamma_nu(hurst)
    d = t - s
    d2h = pow2h(d, hurst)
    lower = a * a * d + b * b * gamma * d2h
    upper = a * a * d + b * b * nu * d2h
    return as_output(lower), as_output(upper)


def _window_arrays(s, t, h):
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    h = np.asarray(h, dtype=float)
    if np.any(s < 0) or np.any(s > t) or np.any(h <= 0) or np.any(h > t - s):
        raise DomainError("need 0 <= s <= t and 0 < h <= t - s")
    return s, t, h


def incr_gamma(s, t, h, hurst):
    """Numerator of the increment correlation (twice the sfBm covariance).

    ``(t-s+h)**2H - 2(t-s)**2H + (t-s-h)**2H - (t+s)**2H + 2(t+s+h)**2H - (t+s+2h)**2H``,
    evaluated as ``D2(t-s, h) - D2(t+s+h, h)``.
    """
    s, t, h = _window_arrays(s, t, h)
    out = np.asarray(second_difference(t - s, h, hurst)) - np.asarray(second_difference(t + s + h, h, hurst))
    return as_output(out)


def incr_alpha(s, h, hurst):
    """``-2**2H ((s+h)**2H + s**2H) + 2 (2s+h)**2H + 2 h**2H``.

    Twice the second moment of an sfBm increment over ``[s, s + h]``.
    """
    s = np.asarray(s, dtype=float)
    h = np.asarray(h, dtype=float)
    if np.any(h <= 0):
        raise DomainError("lag h must be positive")
    if np.any(s < 0):
        raise DomainError("s must be nonnegative")
    out = 2.0 * pow2h(h, hurst) - 2.0 ** (2.0 * hurst) * np.asarray(second_difference(s + 0.5 * h, 0.5 * h, hurst, lower=s))
    return as_output(out)


def incr_corr(window, coeffs, hurst, full_output=False):
    """Correlation of ``S_{t+h} - S_t`` and ``S_{s+h} - S_s``.

    Parameters
    ----------
    window : IncrementWindow
    coeffs : (a, b)
    hurst : float
    full_output : bool
        If True also return a dict of diagnostics. Its ``"pure_brownian"``
        flag is set when ``b == 0``; the correlation is then 0 because
        disjoint Brownian increments are independent.

    Returns
    -------
    rho : float
    info : dict, only if ``full_output``
    """
    a, b = (np.asarray(x, dtype=float) for x in validate_coeffs(coeffs))
    hurst = validate_hurst(hurst)
    s, t, h = window.s, window.t, window.h
    brownian = b == 0
    gamma = np.asarray(incr_gamma(s, t, h, hurst))
    alpha_s = np.asarray(incr_alpha(s, h, hurst))
    alpha_t = np.asarray(incr_alpha(t, h, hurst))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = 2.0 * (a * a) / (b * b) * h
        rho = gamma / np.sqrt((ratio + alpha_s) * (ratio + alpha_t))
    rho = as_output(np.where(brownian, 0.0, rho))
    if full_output:
        info = {
            "pure_brownian": as_output(brownian) if brownian.ndim else bool(brownian),
            "gamma": as_output(np.where(brownian, 0.0, gamma)),
            "alpha_s": as_output(alpha_s),
            "alpha_t": as_output(alpha_t),
        }
        return rho, info
    return rho


def _pair(p):
    return p.u, p.v, p.s, p.t


def nonoverlap_cov_mfbm(pair, coeffs, hurst):
    """Covariance of mfBm increments over ``[u, v]`` and ``[s, t]``."""
    u, v, s, t = _pair(pair)
    b = coeffs[1]
    P = lambda x: pow2h(x, hurst)  # noqa: E731
    out = 0.5 * b * b * ((P(t - u) + P(s - v)) - (P(t - v) + P(s - u)))
    return float(out)


def nonoverlap_cov_smfbm(pair, coeffs, hurst):
    """Covariance of smfBm increments over ``[u, v]`` and ``[s, t]``.

    The eight-term closed form regrouped as
    ``b**2/2 (D2(t, u) - D2(t, v) - D2(s, u) + D2(s, v))``.
    """
    u, v, s, t = _pair(pair)
    b = coeffs[1]
    d = lambda x, y: float(second_difference(x, y, hurst))  # noqa: E731
    out = 0.5 * b * b * ((d(t, u) - d(t, v)) - (d(s, u) - d(s, v)))
    return float(out)


def cov_gap(pair, coeffs, hurst):
    """Difference between the smfBm and mfBm non-overlapping covariances.

    ``b**2/2 ((t+u)**2H - (t+v)**2H + (s+v)**2H - (s+u)**2H)``; negative for
    ``H > 1/2``, positive for ``H < 1/2``.
    """
    u, v, s, t = _pair(pair)
    b = coeffs[1]
    P = lambda x: pow2h(x, hurst)  # noqa: E731
    out = 0.5 * b * b * ((P(t + u) - P(t + v)) + (P(s + v) - P(s + u)))
    return float(out)


def lag_cov(p, n, coeffs, hurst):
    """Covariance of unit increments ``[p, p+1]`` and ``[p+n, p+n+1]``.

    Vectorized over ``n``. Equal to
    ``b**2/2 (D2(n, 1) - D2(2p+n+1, 1))``; the second-difference form keeps
    full relative accuracy at large ``n``, where the value decays like
    ``n**(2H-3)``.
    """
    n = np.asarray(n, dtype=float)
    if p < 0 or np.any(n < 1):
        raise DomainError("lag_cov needs p >= 0 and n >= 1")
    b = coeffs[1]
    out = 0.5 * b * b * (
        np.asarray(second_difference(n, 1.0, hurst)) - np.asarray(second_difference(2.0 * p + n + 1.0, 1.0, hurst))
    )
    return as_output(out)


def lag_cov_asymptote(p, n, coeffs, hurst):
    """Leading term ``2(1-H) H (2H-1) (2p+1) b**2 n**(2H-3)`` of :func:`lag_cov`."""
    b = coeffs[1]
    n = np.asarray(n, dtype=float)
    out = 2.0 * (1.0 - hurst) * hurst * (2.0 * hurst - 1.0) * (2 * p + 1) * b * b * n ** (2.0 * hurst - 3.0)
    return as_output(out)


def adjacent_shape_functions(x, hurst):
    """The functions ``A, B, C`` of ``x = 2u/r`` for adjacent increments.

    With ``r`` the common length,
    ``Cov = b**2/2 r**2H A(x)``, ``Var[u, u+r] = (2 a**2 r + b**2 r**2H B(x)) / 2``
    and ``Var[u+r, u+2r] = (2 a**2 r + b**2 r**2H C(x)) / 2``.
    """
    x = np.asarray(x, dtype=float)
    P = lambda y: pow2h(y, hurst)  # noqa: E731
    A = 2.0 * P(x + 2.0) + (2.0 ** (2.0 * hurst) - 2.0) - P(x + 3.0) - P(x + 1.0)
    B = 2.0 - P(x) - P(x + 2.0) + 2.0 * P(x + 1.0)
    C = 2.0 - P(x + 2.0) - P(x + 4.0) + 2.0 * P(x + 3.0)
    return as_output(A), as_output(B), as_output(C)


def adjacent_corr_pair(u, r, coeffs, hurst):
    """Correlations of the adjacent increments ``[u, u+r]`` and ``[u+r, u+2r]``.

    Returns
    -------
    rho_smfbm, rho_mfbm : float
        For the sub-mixed and the mixed process respectively. At
        ``H = 1/2`` both are 0.
    """
    if not r > 0:
        raise DomainError(f"interval length r must be positive, got {r}")
    if u < 0:
        raise DomainError(f"u must be nonnegative, got {u}")
    a, b = coeffs
    if b == 0:
        raise DomainError("adjacent_corr_pair needs b != 0")
    if hurst == 0.5:
        return 0.0, 0.0
    r2h = r ** (2.0 * hurst)
    rho_mfbm = b * b * (2.0 ** (2.0 * hurst - 1.0) - 1.0) * r2h / (a * a * r + b * b * r2h)
    cov = nonoverlap_cov_smfbm(IntervalPair(u, u + r, u + r, u + 2.0 * r), coeffs, hurst)
    v1 = incr_second_moment(u, u + r, coeffs, hurst)
    v2 = incr_second_moment(u + r, u + 2.0 * r, coeffs, hurst)
    rho_smfbm = cov / np.sqrt(v1 * v2)
    return float(rho_smfbm), float(rho_mfbm)
