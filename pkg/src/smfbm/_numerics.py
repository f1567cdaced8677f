"""Low-level power and finite-difference helpers shared by the kernels.

Everything here works elementwise on numpy arrays and returns a plain
``float`` when all inputs are scalars.
"""

import numpy as np

# Below this ratio h/x the binomial series is used for second differences.
_SERIES_CUTOFF = 0.2
_SERIES_TERMS = 16


def as_output(x):
    """Return a python float for 0-d results, the array otherwise."""
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def pow2h(x, hurst):
    """``x ** (2H)`` for ``x >= 0`` with ``0 ** (2H) == 0``."""
    return np.asarray(x, dtype=float) ** (2.0 * hurst)


def _binomial_even_coefficients(p, terms):
    # binom(p, 2k) for k = 1..terms; p may be an array
    coeffs = []
    c = 1.0
    m = 0
    for _ in range(terms):
        for _ in range(2):
            m += 1
            c = c * (p - m + 1) / m
        coeffs.append(c)
    return coeffs


def second_difference(x, h, hurst, lower=None):
    """Centred second difference of ``y -> y**(2H)``.

    Computes ``(x + h)**(2H) - 2 x**(2H) + (x - h)**(2H)`` for
    ``0 <= h <= x``. When ``h / x`` is small the three terms nearly cancel;
    there the value is summed from the binomial series
    ``2 x**(2H) * sum_k binom(2H, 2k) (h/x)**(2k)``, whose terms all share one
    sign, so the relative accuracy stays near machine precision.

    ``lower`` optionally supplies ``x - h`` exactly; callers that build
    ``x`` and ``h`` from endpoints pass the endpoint so that rounding in
    ``x - h`` cannot wipe out a tiny value.
    """
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    p = 2.0 * np.asarray(hurst, dtype=float)
    x, h, p = np.broadcast_arrays(x, h, p)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(x > 0, h / np.where(x > 0, x, 1.0), 1.0)
    lo = np.maximum(x - h, 0.0) if lower is None else np.asarray(lower, dtype=float)
    direct = (x + h) ** p - 2.0 * x**p + lo**p

    # y -> y is linear: its second difference is exactly 0
    direct = np.where(p == 1.0, 0.0, direct)
    small = r < _SERIES_CUTOFF
    if not np.any(small):
        return as_output(direct)
    coeffs = _binomial_even_coefficients(p, _SERIES_TERMS)
    r2 = r * r
    acc = np.zeros_like(r2)
    for c in coeffs[::-1]:
        acc = (acc + c) * r2
    series = 2.0 * x**p * acc
    return as_output(np.where(small, series, direct))
