"""Semimartingale diagnostics for the sub-mixed fractional Brownian motion.

The functions here compute the analytic quantities that decide whether
``S^H(a, b)`` is a semimartingale:

* the Markov defect of the covariance (zero for Gaussian Markov processes),
* the expected quadratic variation ``A_n`` on a uniform partition,
* the one-step quasi-martingale sum ``I_n`` and its ``u_j / v_j`` ratios,
* the conditional-expectation sum obtained by conditioning each increment on
  the whole past, with the eigenvalue and lower bounds used at ``H = 3/4``,
* a quadrature probe of the square-integrability of the mixed second
  derivative of the fractional part's covariance,
* the final classification.

Divergence can only be observed as a trend, so the "diverges" claims are
checked by fitting log-log slopes over dyadic ladders of ``n``.
"""

import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np
from scipy.linalg import lapack

from ._numerics import pow2h, second_difference
from .exceptions import DomainError, SingularSystemError
from .increments import incr_second_moment

__all__ = [
    "QvLimit",
    "Regime",
    "QvReport",
    "SemimartVerdict",
    "CondL2Result",
    "DiagnosticsReport",
    "markov_defect",
    "expected_qv",
    "expected_qv_bruteforce",
    "qv_ladder",
    "qv_limit_class",
    "quasimart_uv",
    "quasi_mart_sum",
    "increment_cov_matrix",
    "cond_l2_sum",
    "cond_l2_lower_bound",
    "lemma29_gap",
    "lemma7_f",
    "l2_mixed_partial_probe",
    "semimart_verdict",
    "loglog_slope",
]


class QvLimit(str, Enum):
    DIVERGES = "diverges"
    FINITE_AB = "finite_ab"
    FINITE_A = "finite_a"


class Regime(str, Enum):
    PURE_BM = "pure_bm"
    BROWNIAN_H_HALF = "brownian_H_half"
    ROUGH_NOT_WEAK_SEMIMART = "rough_not_weak_semimart"
    INTERMEDIATE_NOT_QUASIMART = "intermediate_not_quasimart"
    SMOOTH_SEMIMART = "smooth_semimart"
    SFBM_NOT_SEMIMART = "sfbm_not_semimart"


CITATIONS = {
    Regime.PURE_BM: ["b = 0: the process is a times a Brownian motion"],
    Regime.BROWNIAN_H_HALF: ["H = 1/2: the process is a Brownian motion with variance (a^2 + b^2) t"],
    Regime.ROUGH_NOT_WEAK_SEMIMART: [
        "Corollary 23: for H < 1/2 the expected quadratic variation diverges (Lemma 22), "
        "which rules out weak semimartingality"
    ],
    Regime.INTERMEDIATE_NOT_QUASIMART: [
        "Proposition 27: one-step conditional sums diverge for 1/2 < H < 3/4, so no quasi-martingale",
        "Proposition 28: full-past conditional sums diverge at H = 3/4, so no quasi-martingale",
        "Lemma 26: without the quasi-martingale property there is no weak semimartingale",
    ],
    Regime.SMOOTH_SEMIMART: [
        "Proposition 24: for H > 3/4 and a != 0 the mixed partial of the fractional covariance is "
        "square integrable, giving a semimartingale with the law of a times a Brownian motion"
    ],
    Regime.SFBM_NOT_SEMIMART: [
        "a = 0, H > 3/4: Proposition 24 needs a != 0; a scaled sfBm has vanishing quadratic variation "
        "(Lemma 22) without being constant, so it is not a semimartingale"
    ],
}


def markov_defect(s, t, u, spec):
    """``Cov(S_s, S_u) Var(S_t) - Cov(S_s, S_t) Cov(S_t, S_u)`` for ``0 < s < t < u``.

    A centred Gaussian process with positive variances can only be Markov if
    this vanishes for every such triple.
    """
    if not 0 < s < t < u:
        raise DomainError(f"need 0 < s < t < u, got ({s}, {t}, {u})")
    k = spec.covariance
    return float(k(s, u) * k(t, t) - k(s, t) * k(t, u))


def expected_qv(T, n, coeffs, hurst):
    """Expected quadratic variation ``A_n`` over ``{jT/n, j = 0..n}``.

    ``A_n = a**2 T + b**2 T**2H n**(1-2H)
    + 2**2H b**2 (T/n)**2H sum_j (((2j-1)/2)**2H - (j**2H + (j-1)**2H)/2)``.
    Each summand equals ``-D2(j - 1/2, 1/2) / 2``.
    """
    if not T > 0:
        raise DomainError("horizon T must be positive")
    n = int(n)
    if n < 1:
        raise DomainError("n must be at least 1")
    a, b = coeffs
    j = np.arange(1, n + 1, dtype=float)
    f = -0.5 * np.asarray(second_difference(j - 0.5, 0.5, hurst))
    tail = 2.0 ** (2.0 * hurst) * b * b * (T / n) ** (2.0 * hurst) * math.fsum(f)
    return a * a * T + b * b * T ** (2.0 * hurst) * n ** (1.0 - 2.0 * hurst) + tail


def expected_qv_bruteforce(T, n, coeffs, hurst):
    """``A_n`` as an explicit sum of increment second moments."""
    grid = np.arange(n + 1) * (T / n)
    return math.fsum(np.asarray(incr_second_moment(grid[:-1], grid[1:], coeffs, hurst), dtype=float).ravel())


def qv_limit_class(coeffs, hurst):
    """Limit behaviour of ``A_n`` as ``n`` grows."""
    b = coeffs[1]
    if b == 0 or hurst == 0.5:
        return QvLimit.FINITE_AB
    if hurst < 0.5:
        return QvLimit.DIVERGES
    return QvLimit.FINITE_A


@dataclass
class QvReport:
    horizon: float
    n_values: list
    a_n: list
    limit_class: QvLimit


def qv_ladder(T, n_values, coeffs, hurst):
    """:func:`expected_qv` over several partition sizes."""
    a_n = [expected_qv(T, n, coeffs, hurst) for n in n_values]
    return QvReport(float(T), [int(n) for n in n_values], a_n, qv_limit_class(coeffs, hurst))


def _check_b(coeffs):
    if coeffs[1] == 0:
        raise DomainError("this diagnostic assumes b != 0")


def quasimart_uv(j, T, coeffs, hurst):
    """The ratios ``u_j / v_j`` with

    ``u_j = 2**2H (2 j**2H + 1) - 2 - (2j+1)**2H - (2j-1)**2H`` and
    ``v_j = sqrt(a**2 T + b**2 T**2H (-2**(2H-1)(j**2H + (j-1)**2H) + (2j-1)**2H + 1))``.

    They tend to ``(2**2H - 2) / sqrt(a**2 T + b**2 T**2H)``.
    """
    a, b = coeffs
    j = np.asarray(j, dtype=float)
    u = (2.0 ** (2.0 * hurst) - 2.0) - np.asarray(second_difference(2.0 * j, 1.0, hurst))
    bracket = 1.0 - 2.0 ** (2.0 * hurst - 1.0) * np.asarray(second_difference(j - 0.5, 0.5, hurst))
    v = np.sqrt(a * a * T + b * b * T ** (2.0 * hurst) * bracket)
    return u / v


def quasi_mart_sum(T, n, coeffs, hurst):
    """``I_n = sum_{j=1}^{n-1} Cov(D_{j+1}, D_j) / sqrt(Var D_j)`` on ``{jT/n}``.

    Returns
    -------
    I_n : float
    uv_terms : ndarray
        ``u_j / v_j`` for ``j = 1 .. n-1``.
    """
    if not T > 0:
        raise DomainError("horizon T must be positive")
    n = int(n)
    if n < 2:
        raise DomainError("n must be at least 2")
    _check_b(coeffs)
    a, b = coeffs
    j = np.arange(1, n, dtype=float)
    step2h = (T / n) ** (2.0 * hurst)
    u = (2.0 ** (2.0 * hurst) - 2.0) - np.asarray(second_difference(2.0 * j, 1.0, hurst))
    cov_next = 0.5 * b * b * step2h * u
    bracket = 1.0 - 2.0 ** (2.0 * hurst - 1.0) * np.asarray(second_difference(j - 0.5, 0.5, hurst))
    var = a * a * T / n + b * b * step2h * bracket
    total = math.fsum(cov_next / np.sqrt(var))
    return total, quasimart_uv(j, T, coeffs, hurst)


def increment_cov_matrix(T, n, coeffs, hurst):
    """Covariance matrix of the ``n`` increments of ``S`` over ``{jT/n}``.

    Built in index space: for ``i != k``,
    ``Cov(D_i, D_k) = b**2/2 (T/n)**2H (D2(|k-i|, 1) - D2(k+i-1, 1))``, and
    ``Var D_i = a**2 T/n + b**2/2 (T/n)**2H (2 - D2(2i-1, 1))``.
    """
    a, b = coeffs
    idx = np.arange(1, n + 1, dtype=float)
    I, K = np.meshgrid(idx, idx, indexing="ij")
    lag = np.abs(K - I)
    step2h = (T / n) ** (2.0 * hurst)
    A = np.asarray(second_difference(np.maximum(lag, 1.0), 1.0, hurst)) - np.asarray(
        second_difference(K + I - 1.0, 1.0, hurst)
    )
    np.fill_diagonal(A, 2.0 - np.asarray(second_difference(2.0 * idx - 1.0, 1.0, hurst)))
    A *= 0.5 * b * b * step2h
    A[np.diag_indices(n)] += a * a * T / n
    return A


@dataclass
class CondL2Result:
    total: float
    per_j: np.ndarray
    lambda_max: float
    lambda_max_bound: float | None
    lambda_max_bound_ok: bool | None


def cond_l2_sum(T, n, coeffs, hurst, max_n=1024):
    """Sum over ``j`` of ``|| E(D_{j+1} | D_j, ..., D_1) ||_2``.

    For a Gaussian vector the conditional mean is ``b^T (D_1..D_j)`` with
    ``A_j b = m_j``, where ``A_j`` is the covariance of the first ``j``
    increments and ``m_j`` their covariances with ``D_{j+1}``; its L2 norm is
    ``sqrt(m_j^T A_j^{-1} m_j)``.

    One Cholesky factorization of the ``n x n`` increment covariance serves
    every ``j``: the leading ``j x j`` block of the factor ``L`` factors
    ``A_j``, and row ``j + 1`` of ``L`` restricted to the first ``j`` columns
    is exactly ``L_j^{-1} m_j``. Hence ``per_j[j-1] = ||L[j, :j]||``.

    Returns
    -------
    CondL2Result
        ``per_j`` holds the terms for ``j = 1 .. n-1``. ``lambda_max`` is the
        largest eigenvalue of ``A_{n-1}`` (which dominates every ``A_j``).
        At ``H = 3/4`` it is compared with the row-sum bound
        ``a**2 T/n + 5/(2n) b**2 T**(3/2)``; for other ``H`` that bound does
        not apply and ``lambda_max_bound_ok`` is None.
    """
    if not T > 0:
        raise DomainError("horizon T must be positive")
    n = int(n)
    if n < 2:
        raise DomainError("n must be at least 2")
    if n > max_n:
        raise DomainError(f"n={n} exceeds the configured cap max_n={max_n}")
    _check_b(coeffs)
    a, b = coeffs
    A = increment_cov_matrix(T, n, coeffs, hurst)
    L, info = lapack.dpotrf(A, lower=1, clean=1)
    if info > 0:
        raise SingularSystemError(
            f"increment covariance is numerically singular at j={info} (n={n}, H={hurst})", index=int(info)
        )
    per_j = np.array([np.sqrt(np.dot(L[j, :j], L[j, :j])) for j in range(1, n)])
    lam = float(np.linalg.eigvalsh(A[: n - 1, : n - 1])[-1])
    if hurst == 0.75:
        bound = a * a * T / n + 2.5 / n * b * b * T**1.5
        ok = lam <= bound
    else:
        bound, ok = None, None
    return CondL2Result(math.fsum(per_j), per_j, lam, bound, ok)


def cond_l2_lower_bound(T, n, coeffs):
    """Per-``j`` lower bounds on the conditional norms at ``H = 3/4``.

    ``sqrt(beta) / n * sqrt(ln(2j-1) + 2 arccos((j-1)/j) - pi)`` for
    ``j = 1 .. n-1``, with ``alpha = 2 / (T (2 a**2 + 5 b**2 sqrt(T)))`` and
    ``beta = 9 alpha T**3 b**4 / 64``. The ``j = 1`` term is exactly 0.
    """
    a, b = coeffs
    alpha = 2.0 / (T * (2.0 * a * a + 5.0 * b * b * math.sqrt(T)))
    beta = alpha * 9.0 * T**3 * b**4 / 64.0
    j = np.arange(1, n, dtype=float)
    inner = np.log(2.0 * j - 1.0) + 2.0 * np.arccos((j - 1.0) / j) - math.pi
    inner[0] = 0.0
    return math.sqrt(beta) / n * np.sqrt(np.maximum(inner, 0.0))


def lemma29_gap(j, k):
    """``f1(k)``, ``f2(k)`` and the lower bound on their difference.

    ``f1 = (j-k+2)**1.5 - 2 (j-k+1)**1.5 + (j-k)**1.5``,
    ``f2 = (j+k+1)**1.5 - 2 (j+k)**1.5 + (j+k-1)**1.5``,
    ``bound = 3/4 ((j-k+1)**-0.5 - (j+k-1)**-0.5)``; with
    ``0 <= bound <= f1 - f2``.
    """
    if not (isinstance(j, (int, np.integer)) and isinstance(k, (int, np.integer))) or not 1 <= k <= j:
        raise DomainError(f"need integers 1 <= k <= j, got j={j}, k={k}")
    f1 = float(second_difference(j - k + 1, 1, 0.75))
    f2 = float(second_difference(j + k, 1, 0.75))
    bound = 0.75 * ((j - k + 1) ** -0.5 - (j + k - 1) ** -0.5)
    return f1, f2, bound


def lemma7_f(x, s, hurst):
    """``-2**(2H-1)((x+s)**2H + s**2H) + (x+2s)**2H - (1-2**(2H-1)) x**2H``.

    Zero at ``x = 0``; negative and decreasing for ``H < 1/2``, positive and
    increasing for ``H > 1/2``.
    """
    x = np.asarray(x, dtype=float)
    c = 2.0 ** (2.0 * hurst - 1.0)
    out = -c * (pow2h(x + s, hurst) + s ** (2.0 * hurst)) + pow2h(x + 2.0 * s, hurst) - (1.0 - c) * pow2h(x, hurst)
    return float(out) if out.ndim == 0 else out


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(24)


def _band_panel(d0, d1, T, p):
    # Integral of (d**p - sigma**p)**2 over d in [d0, d1], sigma in [d, 2T - d].
    # sigma = d exp(x) turns the inner integrand into d**(2p+1) e**x (1 - e**(p x))**2,
    # integrated on unit-length panels in x.
    half = 0.5 * (d1 - d0)
    d = half * _GL_NODES + 0.5 * (d1 + d0)
    wd = half * _GL_WEIGHTS
    total = 0.0
    for di, wi in zip(d, wd):
        span = math.log((2.0 * T - di) / di)
        if span <= 0:
            continue
        pieces = max(1, math.ceil(span))
        edges = np.linspace(0.0, span, pieces + 1)
        hx = 0.5 * np.diff(edges)
        x = hx[:, None] * _GL_NODES[None, :] + 0.5 * (edges[1:] + edges[:-1])[:, None]
        wx = hx[:, None] * _GL_WEIGHTS[None, :]
        ex = np.exp(x)
        vals = di ** (2.0 * p + 1.0) * ex * (1.0 - ex**p) ** 2
        total += wi * math.fsum((wx * vals).ravel())
    return total


def l2_mixed_partial_probe(T, coeffs, hurst, levels=32, tol=0.01):
    """Probe whether ``d^2 R / ds dt`` is square integrable on ``[0, T]^2``.

    ``R(s, t)`` is the covariance of ``(b/a) xi^H``, whose mixed partial is
    ``(b/a)**2 H (2H-1) (|t-s|**(2H-2) - (s+t)**(2H-2))`` off the diagonal.
    ``estimates[k]`` integrates its square over ``[0, T]^2`` minus the band
    ``|t - s| <= T 2**-(k+3)``.

    The quadrature works in the coordinates ``d = |t - s|``,
    ``sigma = s + t`` (Jacobian 1/2, two mirror-image triangles), on dyadic
    panels ``d in [T 2**-(i+1), T 2**-i]`` with fixed 24-point Gauss-Legendre
    rules, and a log-scaled Gauss-Legendre rule in ``sigma``. The panel
    schedule is fixed, so results are reproducible.

    Returns
    -------
    estimates : list of float
        One per level, non-decreasing.
    converged : bool
        Whether the last two estimates differ by less than ``tol`` relative.
        Expected exactly when ``H > 3/4``.
    """
    a, b = coeffs
    if a == 0:
        raise DomainError("the probe needs a != 0 (the ratio b/a appears)")
    if levels < 3:
        raise DomainError("levels must be at least 3")
    if not T > 0:
        raise DomainError("horizon T must be positive")
    scale = ((b / a) ** 2 * hurst * (2.0 * hurst - 1.0)) ** 2
    if scale == 0.0:
        return [0.0] * levels, True
    p = 2.0 * hurst - 2.0
    estimates = []
    acc = 0.0
    panel = 0
    for k in range(levels):
        width = T * 2.0 ** -(k + 3)
        while T * 2.0**-panel > width:
            acc += _band_panel(T * 2.0 ** -(panel + 1), T * 2.0**-panel, T, p)
            panel += 1
        estimates.append(scale * acc)
    last, prev = estimates[-1], estimates[-2]
    converged = bool(last > 0 and abs(last - prev) < tol * abs(last))
    return estimates, converged


@dataclass
class SemimartVerdict:
    is_semimartingale: bool
    regime: Regime
    citations: list = field(default_factory=list)


def semimart_verdict(coeffs, hurst):
    """Classify ``S^H(a, b)``: a semimartingale iff ``b = 0`` or ``H = 1/2`` or ``H > 3/4``.

    ``H = 3/4`` falls on the non-semimartingale side. The case ``a = 0``,
    ``H > 3/4`` (a scaled sfBm) is reported separately as not a
    semimartingale, since the equivalence-in-law argument needs ``a != 0``.
    """
    a, b = coeffs
    if b == 0:
        regime = Regime.PURE_BM
    elif hurst == 0.5:
        regime = Regime.BROWNIAN_H_HALF
    elif hurst < 0.5:
        regime = Regime.ROUGH_NOT_WEAK_SEMIMART
    elif hurst <= 0.75:
        regime = Regime.INTERMEDIATE_NOT_QUASIMART
    elif a == 0:
        regime = Regime.SFBM_NOT_SEMIMART
    else:
        regime = Regime.SMOOTH_SEMIMART
    is_semi = regime in (Regime.PURE_BM, Regime.BROWNIAN_H_HALF, Regime.SMOOTH_SEMIMART)
    return SemimartVerdict(is_semi, regime, list(CITATIONS[regime]))


def loglog_slope(x, y):
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.log(np.asarray(x, dtype=float))
    y = np.log(np.asarray(y, dtype=float))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def _jsonable(obj):
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "__dataclass_fields__"):
        return _jsonable(asdict(obj))
    return obj


@dataclass
class DiagnosticsReport:
    """Result of one diagnostic run, serializable to JSON."""

    spec: dict
    operation: str
    inputs: dict
    outputs: dict
    trend_fits: dict = field(default_factory=dict)
    verdict: SemimartVerdict | None = None
    citations: list = field(default_factory=list)

    def to_dict(self):
        return {
            "spec": _jsonable(self.spec),
            "operation": self.operation,
            "inputs": _jsonable(self.inputs),
            "outputs": _jsonable(self.outputs),
            "trend_fits": _jsonable(self.trend_fits),
            "verdict": _jsonable(self.verdict),
            "citations": list(self.citations),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        verdict = d.get("verdict")
        if verdict is not None:
            verdict = SemimartVerdict(verdict["is_semimartingale"], Regime(verdict["regime"]), verdict["citations"])
        return cls(d["spec"], d["operation"], d["inputs"], d["outputs"], d["trend_fits"], verdict, d["citations"])
