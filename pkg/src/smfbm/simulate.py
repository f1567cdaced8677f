"""Exact Gaussian path sampling over arbitrary time grids.

Two independent routes are provided:

``direct``
    factorize the process covariance on the grid and map standard normal
    vectors through the factor.
``constructive``
    simulate a two-sided fBm (and, independently, a two-sided Bm) on the
    mirrored grid ``{-t_k} U {t_k}`` from the fBm covariance, fold each into
    its sub-fractional version ``(X_t + X_{-t}) / sqrt(2)`` and combine
    ``a xi + b xi^H``.

Both routes have the same law; comparing them is a check on the kernels.

Random numbers come from numpy's counter-based Philox generator. Path ``i``
of a run with seed ``s`` draws from the stream keyed by
``s + 2**64 * i``, so every path is reproducible on its own and results do
not depend on how paths are split across threads.
"""

import json
import csv
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import linalg

from .exceptions import DomainError, FactorizationError
from .kernels import CovarianceMatrix, ProcessKind, ProcessSpec, TimeGrid, cov_matrix, fbm_cov

__all__ = [
    "GRID_CAP",
    "SamplerConfig",
    "PathEnsemble",
    "CholeskyFactor",
    "factorize",
    "path_generator",
    "sample",
    "sample_direct",
    "sample_constructive",
    "implied_covariance",
]

GRID_CAP = 4096
BLOCK_SIZE = 256
_MAX_JITTER_RETRIES = 6


@dataclass(frozen=True)
class SamplerConfig:
    spec: ProcessSpec
    grid: TimeGrid
    n_paths: int
    seed: int
    method: str = "direct"

    def __post_init__(self):
        if int(self.n_paths) < 1:
            raise DomainError(f"n_paths must be at least 1, got {self.n_paths}")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.method not in ("direct", "constructive"):
            raise DomainError(f"unknown sampling method {self.method!r}")
        if len(self.grid) > GRID_CAP:
            raise DomainError(
                f"grid has {len(self.grid)} points; the cap is {GRID_CAP} "
                "(dense factorization is cubic in the grid size, use a coarser grid)"
            )
        object.__setattr__(self, "n_paths", int(self.n_paths))
        object.__setattr__(self, "seed", int(self.seed))


class CholeskyFactor(NamedTuple):
    lower: np.ndarray
    jitter: float


def factorize(cov, spec=None):
    """Lower Cholesky factor of ``cov.entries + jitter I``.

    Tries ``jitter = 0`` first, then ``1e-14 * mean(diag)`` growing tenfold
    per retry, for at most six retries. Rows at ``t = 0`` must have been
    removed by the caller.

    Raises
    ------
    FactorizationError
        If the matrix is not factorizable at the largest jitter.
    """
    entries = np.asarray(cov.entries, dtype=float)
    n = entries.shape[0]
    if n == 0:
        return CholeskyFactor(np.zeros((0, 0)), 0.0)
    scale = float(np.mean(np.diag(entries)))
    jitter = 0.0
    for attempt in range(_MAX_JITTER_RETRIES + 1):
        if attempt > 0:
            jitter = 1e-14 * scale * 10.0 ** (attempt - 1)
        try:
            L = linalg.cholesky(entries + jitter * np.eye(n), lower=True, check_finite=True)
        except linalg.LinAlgError:
            continue
        cov.jitter_applied = jitter
        return CholeskyFactor(L, jitter)
    spec = spec if spec is not None else cov.spec
    raise FactorizationError(
        f"covariance not factorizable with jitter up to {jitter:.3g} "
        f"(spec={spec.to_dict() if spec is not None else None}, "
        f"grid=[{cov.grid.points[0]!r} .. {cov.grid.points[-1]!r}] with {len(cov.grid)} points)"
    )


def path_generator(seed, path_index):
    """Generator for path ``path_index`` of a run seeded with ``seed``."""
    return np.random.Generator(np.random.Philox(key=int(seed) + (int(path_index) << 64)))


def _draw_normals(seed, start, stop, width):
    z = np.empty((stop - start, width))
    for row, i in enumerate(range(start, stop)):
        z[row] = path_generator(seed, i).standard_normal(width)
    return z


def _run_blocks(n_paths, threads, block_fn):
    starts = list(range(0, n_paths, BLOCK_SIZE))
    spans = [(s, min(s + BLOCK_SIZE, n_paths)) for s in starts]
    threads = max(1, int(threads or 1))
    if threads == 1 or len(spans) == 1:
        parts = [block_fn(a, b) for a, b in spans]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda ab: block_fn(*ab), spans))
    return np.vstack(parts)


@dataclass
class PathEnsemble:
    """Sampled paths: ``values[i, k]`` is path ``i`` at ``grid.points[k]``."""

    config: SamplerConfig
    values: np.ndarray
    jitter: float = 0.0
    diag_ratio: float = 1.0
    extra: dict = field(default_factory=dict)

    @property
    def grid(self):
        return self.config.grid

    @property
    def n_paths(self):
        return self.values.shape[0]

    def metadata(self):
        cfg = self.config
        return {
            "spec": cfg.spec.to_dict(),
            "seed": cfg.seed,
            "method": cfg.method,
            "jitter": self.jitter,
            "n_paths": cfg.n_paths,
            "grid": [float(t) for t in cfg.grid.points],
            "diag_ratio": self.diag_ratio,
            "rng": "numpy Philox4x64, key = seed + 2**64 * path_index",
        }

    def write_csv(self, path):
        """Header ``path_id,t_0,...``; one row per path, round-trip float repr."""
        m = len(self.grid)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["path_id"] + [f"t_{k}" for k in range(m)])
            for i, row in enumerate(self.values):
                w.writerow([i] + [repr(float(v)) for v in row])

    def write_metadata(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(self.metadata(), indent=2) + "\n")


def _split_origin(grid):
    pts = grid.points
    has_zero = pts[0] == 0.0
    return has_zero, (pts[1:] if has_zero else pts)


def _with_origin(values, has_zero):
    if not has_zero:
        return values
    out = np.zeros((values.shape[0], values.shape[1] + 1))
    out[:, 1:] = values
    return out


def _diag_ratio(L):
    if L.size == 0:
        return 1.0
    d = np.diag(L)
    return float((d.min() / d.max()) ** 2)


def _default_threads(threads):
    if threads is None:
        threads = int(os.environ.get("SMFBM_THREADS", "1") or 1)
    return threads


def sample_direct(cfg, threads=None):
    """Sample ``cfg.n_paths`` paths as ``L z`` with ``L L^T`` the grid covariance."""
    if cfg.method != "direct":
        raise DomainError("sample_direct needs method='direct'")
    threads = _default_threads(threads)
    has_zero, pos = _split_origin(cfg.grid)
    m = pos.size
    if m == 0:
        return PathEnsemble(cfg, np.zeros((cfg.n_paths, len(cfg.grid))))
    cov = cov_matrix(cfg.spec, TimeGrid(pos))
    L, jitter = factorize(cov, cfg.spec)
    LT = np.ascontiguousarray(L.T)

    def block(start, stop):
        return _draw_normals(cfg.seed, start, stop, m) @ LT

    values = _with_origin(_run_blocks(cfg.n_paths, threads, block), has_zero)
    return PathEnsemble(cfg, values, jitter=jitter, diag_ratio=_diag_ratio(L))


def _mirrored_fbm_factor(pos, hurst, spec):
    # Points ordered (-t_m, ..., -t_1, t_1, ..., t_m).
    pts = np.concatenate([-pos[::-1], pos])
    S, T = np.meshgrid(pts, pts, indexing="ij")
    K = np.asarray(fbm_cov(S, T, hurst))
    K = 0.5 * (K + K.T)
    # grid field only carries the positive half for error messages
    cov = CovarianceMatrix(TimeGrid(pos), K, spec=spec)
    return factorize(cov, spec)


def _fold_matrix(m):
    # Maps the mirrored vector to (X_t + X_{-t}) / sqrt(2) at t_1..t_m.
    F = np.zeros((m, 2 * m))
    k = np.arange(m)
    F[k, m + k] = 1.0
    F[k, m - 1 - k] = 1.0
    return F / np.sqrt(2.0)


def _component_factors(spec, pos):
    """Linear maps from each component's normals to the path values."""
    m = pos.size
    a, b = spec.coeffs
    kind = spec.kind
    if kind in (ProcessKind.FBM, ProcessKind.MFBM):
        # Independent one-sided components: a B + b B^H.
        grid = TimeGrid(pos)
        Lb, jb = factorize(CovarianceMatrix(grid, np.minimum.outer(pos, pos)), spec)
        S, T = np.meshgrid(pos, pos, indexing="ij")
        Lf, jf = factorize(CovarianceMatrix(grid, np.asarray(fbm_cov(S, T, spec.hurst)), spec=spec), spec)
        return a * Lb, b * Lf, max(jb, jf)
    F = _fold_matrix(m)
    Lb, jb = _mirrored_fbm_factor(pos, 0.5, spec)
    Lf, jf = _mirrored_fbm_factor(pos, spec.hurst, spec)
    return a * (F @ Lb), b * (F @ Lf), max(jb, jf)


def implied_covariance(spec, grid):
    """Covariance of the constructive sampler's output, computed exactly.

    Pushes the fBm covariance through the mirroring and folding maps; it must
    agree with :func:`smfbm.kernels.cov_matrix` on the same grid.
    """
    has_zero, pos = _split_origin(grid)
    n = len(grid)
    out = np.zeros((n, n))
    if pos.size == 0:
        return out
    m = pos.size
    a, b = spec.coeffs
    kind = spec.kind
    if kind in (ProcessKind.FBM, ProcessKind.MFBM):
        S, T = np.meshgrid(pos, pos, indexing="ij")
        C = a * a * np.minimum(S, T) + b * b * np.asarray(fbm_cov(S, T, spec.hurst))
    else:
        pts = np.concatenate([-pos[::-1], pos])
        S, T = np.meshgrid(pts, pts, indexing="ij")
        F = _fold_matrix(m)
        Kb = np.asarray(fbm_cov(S, T, 0.5))
        Kf = np.asarray(fbm_cov(S, T, spec.hurst))
        C = a * a * (F @ Kb @ F.T) + b * b * (F @ Kf @ F.T)
    off = 1 if has_zero else 0
    out[off:, off:] = C
    return out


def sample_constructive(cfg, threads=None):
    """Sample paths by building the process from independent fBm and Bm parts.

    Each path consumes ``2 m`` normals for the Brownian component followed by
    ``2 m`` for the fractional one (``m`` positive grid points; one-sided
    kinds use ``m`` each).
    """
    if cfg.method != "constructive":
        raise DomainError("sample_constructive needs method='constructive'")
    threads = _default_threads(threads)
    has_zero, pos = _split_origin(cfg.grid)
    if pos.size == 0:
        return PathEnsemble(cfg, np.zeros((cfg.n_paths, len(cfg.grid))))
    Mb, Mf, jitter = _component_factors(cfg.spec, pos)
    wb = Mb.shape[1]
    W = np.ascontiguousarray(np.hstack([Mb, Mf]).T)

    def block(start, stop):
        return _draw_normals(cfg.seed, start, stop, W.shape[0]) @ W

    values = _with_origin(_run_blocks(cfg.n_paths, threads, block), has_zero)
    return PathEnsemble(cfg, values, jitter=jitter, extra={"normals_per_path": W.shape[0], "brownian_width": wb})


def sample(cfg, threads=None):
    """Dispatch on ``cfg.method``."""
    if cfg.method == "direct":
        return sample_direct(cfg, threads)
    return sample_constructive(cfg, threads)
