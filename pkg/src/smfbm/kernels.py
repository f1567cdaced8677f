"""Covariance kernels of Brownian motion and its fractional relatives.

Five process families are supported, all centred Gaussian and pinned at the
origin:

* ``bm``     Brownian motion,
* ``fbm``    fractional Brownian motion ``B^H``,
* ``sfbm``   sub-fractional Brownian motion ``(B^H_t + B^H_{-t}) / sqrt(2)``,
* ``mfbm``   mixed fractional Brownian motion ``a B + b B^H``,
* ``smfbm``  sub-mixed fractional Brownian motion ``a xi + b xi^H`` where
  ``xi`` is a Brownian motion and ``xi^H`` an independent sfBm.

Kernel functions are vectorized over ``s`` and ``t`` and do not validate the
Hurst index or the mixing weights; that happens once when a
:class:`ProcessSpec` is built.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from ._numerics import as_output, pow2h, second_difference
from .exceptions import DomainError

__all__ = [
    "ProcessKind",
    "MixCoeffs",
    "ProcessSpec",
    "TimeGrid",
    "CovarianceMatrix",
    "fbm_cov",
    "sfbm_cov",
    "mfbm_cov",
    "smfbm_cov",
    "smfbm_var",
    "cov_matrix",
    "rescale_params",
    "validate_hurst",
    "validate_coeffs",
]


class ProcessKind(str, Enum):
    BM = "bm"
    FBM = "fbm"
    SFBM = "sfbm"
    MFBM = "mfbm"
    SMFBM = "smfbm"


class MixCoeffs(NamedTuple):
    """Weights ``a`` (Brownian part) and ``b`` (fractional part)."""

    a: float
    b: float


def _scalar_or_array(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def validate_hurst(hurst):
    """Check ``0 < H < 1``; arrays are checked elementwise."""
    hurst = _scalar_or_array(hurst)
    if not np.all((hurst > 0.0) & (hurst < 1.0)):
        raise DomainError(f"Hurst index must lie in (0, 1), got {hurst}")
    return hurst


def validate_coeffs(coeffs):
    """Check the mixing weights; ``a`` and ``b`` may be arrays."""
    a, b = (_scalar_or_array(v) for v in coeffs)
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise DomainError(f"mixing weights must be finite, got ({a}, {b})")
    if np.any((np.asarray(a) == 0.0) & (np.asarray(b) == 0.0)):
        raise DomainError("(a,b) must not be (0,0)")
    return MixCoeffs(a, b)


def _check_nonnegative(*times):
    for x in times:
        if np.any(np.asarray(x) < 0):
            raise DomainError("times must be nonnegative for this kernel")


def fbm_cov(s, t, hurst):
    """Covariance of fractional Brownian motion at times ``s`` and ``t``.

    ``s`` and ``t`` may be negative (the two-sided process is needed to build
    the sub-fractional motion).
    """
    hurst = validate_hurst(hurst)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    out = 0.5 * (pow2h(np.abs(t), hurst) + pow2h(np.abs(s), hurst) - pow2h(np.abs(t - s), hurst))
    return as_output(out)


def sfbm_cov(s, t, hurst):
    """Covariance of sub-fractional Brownian motion, ``s, t >= 0``.

    Evaluated as ``m**(2H) - D2(M, m) / 2`` with ``m = min(s, t)``,
    ``M = max(s, t)`` and ``D2`` the centred second difference of
    ``x**(2H)``. This equals ``s**2H + t**2H - ((s+t)**2H + |t-s|**2H) / 2``
    but does not lose the small ``m**(2H)`` against two large cancelling
    ``M**(2H)`` terms when ``m << M``.
    """
    _check_nonnegative(s, t)
    hurst = validate_hurst(hurst)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    lo = np.minimum(s, t)
    hi = np.maximum(s, t)
    out = pow2h(lo, hurst) - 0.5 * np.asarray(second_difference(hi, lo, hurst))
    return as_output(out)


def mfbm_cov(s, t, coeffs, hurst):
    """Covariance of the mixed fractional Brownian motion ``a B + b B^H``."""
    _check_nonnegative(s, t)
    a, b = validate_coeffs(coeffs)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    out = a * a * np.minimum(s, t) + b * b * np.asarray(fbm_cov(s, t, hurst))
    return as_output(out)


def smfbm_cov(s, t, coeffs, hurst):
    """Covariance of the sub-mixed fractional Brownian motion.

    ``a**2 min(s, t) + b**2 sfbm_cov(s, t, H)``.
    """
    _check_nonnegative(s, t)
    a, b = validate_coeffs(coeffs)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    out = a * a * np.minimum(s, t) + b * b * np.asarray(sfbm_cov(s, t, hurst))
    return as_output(out)


def smfbm_var(t, coeffs, hurst):
    """Variance ``a**2 t + b**2 (2 - 2**(2H-1)) t**(2H)``."""
    _check_nonnegative(t)
    a, b = validate_coeffs(coeffs)
    hurst = validate_hurst(hurst)
    t = np.asarray(t, dtype=float)
    out = a * a * t + b * b * (2.0 - 2.0 ** (2.0 * hurst - 1.0)) * pow2h(t, hurst)
    return as_output(out)


def rescale_params(coeffs, hurst, h):
    """Mixing weights of the time-dilated process.

    ``{S_{ht}(a, b)}`` has the law of ``{S_t(a h**(1/2), b h**H)}``, so
    sampling on a grid scaled by ``h`` is the same as using these weights on
    the original grid.
    """
    if not h > 0:
        raise DomainError(f"scale factor must be positive, got {h}")
    a, b = coeffs
    return MixCoeffs(a * np.sqrt(h), b * h**hurst)


@dataclass(frozen=True)
class ProcessSpec:
    """Process family and parameters; decides which kernel applies.

    Use :meth:`from_kind` when the weights or Hurst index should be filled in
    from the family (e.g. ``bm`` forces ``H = 1/2`` and ``(a, b) = (1, 0)``).
    The plain constructor checks consistency instead of overriding.
    """

    kind: ProcessKind
    coeffs: MixCoeffs = MixCoeffs(0.0, 1.0)
    hurst: float = 0.5

    def __post_init__(self):
        kind = ProcessKind(self.kind)
        coeffs = validate_coeffs(self.coeffs)
        hurst = validate_hurst(self.hurst)
        if kind is ProcessKind.BM:
            if hurst != 0.5 or coeffs != (1.0, 0.0):
                raise DomainError("bm requires hurst=0.5 and (a,b)=(1,0)")
        elif kind in (ProcessKind.FBM, ProcessKind.SFBM):
            if coeffs != (0.0, 1.0):
                raise DomainError(f"{kind.value} requires (a,b)=(0,1)")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "hurst", hurst)

    @classmethod
    def from_kind(cls, kind, a=1.0, b=1.0, hurst=0.5):
        kind = ProcessKind(kind)
        if kind is ProcessKind.BM:
            return cls(kind, MixCoeffs(1.0, 0.0), 0.5)
        if kind in (ProcessKind.FBM, ProcessKind.SFBM):
            return cls(kind, MixCoeffs(0.0, 1.0), hurst)
        return cls(kind, MixCoeffs(a, b), hurst)

    @classmethod
    def smfbm(cls, a, b, hurst):
        return cls(ProcessKind.SMFBM, MixCoeffs(a, b), hurst)

    @classmethod
    def mfbm(cls, a, b, hurst):
        return cls(ProcessKind.MFBM, MixCoeffs(a, b), hurst)

    @property
    def a(self):
        return self.coeffs.a

    @property
    def b(self):
        return self.coeffs.b

    def covariance(self, s, t):
        """Kernel value(s) of this process at ``(s, t)``."""
        kind = self.kind
        if kind is ProcessKind.BM:
            _check_nonnegative(s, t)
            return as_output(np.minimum(np.asarray(s, float), np.asarray(t, float)))
        if kind is ProcessKind.FBM:
            _check_nonnegative(s, t)
            return fbm_cov(s, t, self.hurst)
        if kind is ProcessKind.SFBM:
            return sfbm_cov(s, t, self.hurst)
        if kind is ProcessKind.MFBM:
            return mfbm_cov(s, t, self.coeffs, self.hurst)
        return smfbm_cov(s, t, self.coeffs, self.hurst)

    def to_dict(self):
        return {"kind": self.kind.value, "a": self.a, "b": self.b, "hurst": self.hurst}


@dataclass(frozen=True, eq=False)
class TimeGrid:
    """Strictly increasing, nonnegative time points."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1)
        if pts.size < 1:
            raise DomainError("a time grid needs at least one point")
        if not np.all(np.isfinite(pts)):
            raise DomainError("grid points must be finite")
        if pts[0] < 0:
            raise DomainError("grid points must be nonnegative")
        if np.any(np.diff(pts) <= 0):
            raise DomainError("grid points must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, start, end, count):
        """``count`` equal intervals on ``[start, end]`` (``count + 1`` points)."""
        count = int(count)
        if count < 1:
            raise DomainError("count must be at least 1")
        return cls(np.linspace(start, end, count + 1))

    def __len__(self):
        return self.points.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.points, dtype=dtype)

    def scaled(self, h):
        return TimeGrid(self.points * h)

    def is_uniform(self, rtol=1e-9):
        if self.points.size < 2:
            return False
        steps = np.diff(self.points)
        return bool(np.allclose(steps, steps[0], rtol=rtol, atol=0.0))

    def index_of(self, t, rtol=1e-12):
        """Index of grid point ``t``; raises :class:`DomainError` if absent."""
        idx = int(np.argmin(np.abs(self.points - t)))
        if not np.isclose(self.points[idx], t, rtol=rtol, atol=1e-14):
            raise DomainError(f"time {t} is not a grid point")
        return idx


@dataclass
class CovarianceMatrix:
    grid: TimeGrid
    entries: np.ndarray
    jitter_applied: float = 0.0
    spec: ProcessSpec | None = field(default=None)


def cov_matrix(spec, grid):
    """Dense covariance matrix of ``spec`` over ``grid``.

    The upper triangle is evaluated and mirrored, so the result is exactly
    symmetric.
    """
    pts = grid.points
    n = pts.size
    iu, ju = np.triu_indices(n)
    vals = np.asarray(spec.covariance(pts[iu], pts[ju]), dtype=float)
    out = np.empty((n, n))
    out[iu, ju] = vals
    out[ju, iu] = vals
    return CovarianceMatrix(grid=grid, entries=out, spec=spec)
