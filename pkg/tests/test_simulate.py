import json

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from smfbm import DomainError, FactorizationError, ProcessSpec, SamplerConfig, TimeGrid, cov_matrix, sample
from smfbm.kernels import CovarianceMatrix
from smfbm.simulate import (
    GRID_CAP,
    factorize,
    implied_covariance,
    path_generator,
    sample_constructive,
    sample_direct,
)

GRID = TimeGrid.uniform(0.0, 1.0, 15)


def _cfg(spec, n=500, seed=11, method="direct", grid=GRID):
    return SamplerConfig(spec, grid, n, seed, method)


class TestFactorize:
    def test_trivial(self):
        L, j = factorize(CovarianceMatrix(TimeGrid([1.0]), np.array([[1.0]])))
        assert_allclose(L, [[1.0]])
        assert j == 0.0

    def test_two_by_two(self):
        L, _ = factorize(CovarianceMatrix(TimeGrid([1.0, 2.0]), np.array([[2.0, 1.0], [1.0, 2.0]])))
        assert_allclose(L, [[np.sqrt(2), 0], [1 / np.sqrt(2), np.sqrt(1.5)]], rtol=1e-15)

    def test_no_jitter_on_64_points(self):
        cov = cov_matrix(ProcessSpec.smfbm(1, 1, 0.7), TimeGrid.uniform(1 / 64, 1, 63))
        L, j = factorize(cov)
        assert j == 0.0
        assert_allclose(L @ L.T, cov.entries, rtol=1e-12, atol=1e-15)

    def test_jitter_escalation(self):
        # rank-deficient but PSD: needs a small jitter
        v = np.array([1.0, 2.0, 3.0])
        cov = CovarianceMatrix(TimeGrid([1.0, 2.0, 3.0]), np.outer(v, v) + np.diag([1e-18, 0, 0]))
        L, j = factorize(cov)
        assert 0 < j <= 1e-8 * np.mean(v * v)
        assert cov.jitter_applied == j

    def test_failure_names_grid(self):
        cov = CovarianceMatrix(TimeGrid([1.0, 2.0]), np.array([[1.0, 0.0], [0.0, -1.0]]), spec=ProcessSpec.smfbm(1, 1, 0.7))
        with pytest.raises(FactorizationError, match="grid"):
            factorize(cov)


class TestConfig:
    def test_validation(self):
        spec = ProcessSpec.smfbm(1, 1, 0.7)
        with pytest.raises(DomainError):
            SamplerConfig(spec, GRID, 0, 1)
        with pytest.raises(DomainError):
            SamplerConfig(spec, GRID, 1, -1)
        with pytest.raises(DomainError):
            SamplerConfig(spec, GRID, 1, 2**64)
        with pytest.raises(DomainError):
            SamplerConfig(spec, GRID, 1, 1, "fft")

    def test_grid_cap(self):
        with pytest.raises(DomainError, match="cap"):
            SamplerConfig(ProcessSpec.smfbm(1, 1, 0.7), TimeGrid.uniform(0, 1, GRID_CAP), 1, 0)


class TestDeterminism:
    @pytest.mark.parametrize("method", ["direct", "constructive"])
    def test_rerun_and_threads(self, method):
        cfg = _cfg(ProcessSpec.smfbm(1, 1, 0.3), n=700, method=method)
        a = sample(cfg, threads=1).values
        b = sample(cfg, threads=1).values
        c = sample(cfg, threads=4).values
        assert_array_equal(a, b)
        assert_array_equal(a, c)

    def test_paths_independent_of_ensemble_size(self):
        spec = ProcessSpec.smfbm(1, 1, 0.7)
        small = sample(_cfg(spec, n=3)).values
        big = sample(_cfg(spec, n=300)).values
        assert_array_equal(small, big[:3])

    def test_single_path(self):
        cfg = _cfg(ProcessSpec.smfbm(1, 1, 0.7), n=1)
        assert_array_equal(sample(cfg).values, sample(cfg).values)

    def test_streams_differ(self):
        x = path_generator(5, 0).standard_normal(4)
        y = path_generator(5, 1).standard_normal(4)
        z = path_generator(6, 0).standard_normal(4)
        assert not np.array_equal(x, y) and not np.array_equal(x, z)

    def test_env_threads(self, monkeypatch):
        cfg = _cfg(ProcessSpec.smfbm(1, 1, 0.7), n=600)
        ref = sample(cfg, threads=1).values
        monkeypatch.setenv("SMFBM_THREADS", "3")
        assert_array_equal(sample(cfg).values, ref)


class TestPaths:
    @pytest.mark.parametrize("method", ["direct", "constructive"])
    def test_origin_pinned(self, method):
        ens = sample(_cfg(ProcessSpec.smfbm(1, 1, 0.7), method=method))
        assert np.all(ens.values[:, 0] == 0.0)
        assert ens.values.shape == (500, 16)

    def test_grid_without_origin(self):
        ens = sample(_cfg(ProcessSpec.smfbm(1, 1, 0.7), grid=TimeGrid([0.5, 1.0])))
        assert ens.values.shape == (500, 2)

    def test_origin_only_grid(self):
        ens = sample(_cfg(ProcessSpec.smfbm(1, 1, 0.7), n=4, grid=TimeGrid([0.0])))
        assert_array_equal(ens.values, np.zeros((4, 1)))

    def test_method_mismatch(self):
        cfg = _cfg(ProcessSpec.smfbm(1, 1, 0.7))
        with pytest.raises(DomainError):
            sample_constructive(cfg)
        with pytest.raises(DomainError):
            sample_direct(_cfg(ProcessSpec.smfbm(1, 1, 0.7), method="constructive"))

    def test_direct_brownian_variance(self):
        ens = sample(_cfg(ProcessSpec.smfbm(1, 1, 0.5), n=20000))
        x = ens.values[:, -1] ** 2
        se = x.std(ddof=1) / np.sqrt(x.size)
        assert abs(x.mean() - 2.0) <= 5 * se


class TestConstructive:
    @pytest.mark.parametrize(
        "spec",
        [
            ProcessSpec.smfbm(1, 1, 0.3),
            ProcessSpec.smfbm(0.5, 2, 0.8),
            ProcessSpec.from_kind("sfbm", hurst=0.65),
            ProcessSpec.from_kind("bm"),
            ProcessSpec.mfbm(1, 1, 0.7),
            ProcessSpec.from_kind("fbm", hurst=0.2),
        ],
    )
    def test_implied_covariance(self, spec):
        grid = TimeGrid([0.0, 0.1, 0.35, 1.0, 2.5])
        assert_allclose(implied_covariance(spec, grid), cov_matrix(spec, grid).entries, rtol=1e-10, atol=1e-14)

    def test_folded_brownian_variance(self):
        # (B_t + B_-t)/sqrt(2) is a Brownian motion
        grid = TimeGrid([0.5, 2.0])
        assert_allclose(np.diag(implied_covariance(ProcessSpec.from_kind("bm"), grid)), [0.5, 2.0], rtol=1e-14)

    def test_normals_layout(self):
        ens = sample(_cfg(ProcessSpec.smfbm(1, 1, 0.7), n=2, method="constructive"))
        m = len(GRID) - 1
        assert ens.extra == {"normals_per_path": 4 * m, "brownian_width": 2 * m}


class TestSerialization:
    def test_csv_and_metadata(self, tmp_path):
        ens = sample(_cfg(ProcessSpec.smfbm(1, 1, 0.7), n=3, grid=TimeGrid([0.0, 0.5, 1.0])))
        ens.write_csv(tmp_path / "p.csv")
        raw = (tmp_path / "p.csv").read_bytes()
        assert b"\r" not in raw
        lines = raw.decode().splitlines()
        assert lines[0] == "path_id,t_0,t_1,t_2"
        row = lines[2].split(",")
        assert row[0] == "1" and float(row[2]) == ens.values[1, 1]
        ens.write_metadata(tmp_path / "p.json")
        meta = json.loads((tmp_path / "p.json").read_text())
        for key in ("spec", "seed", "method", "jitter"):
            assert key in meta
        assert meta["spec"] == {"kind": "smfbm", "a": 1.0, "b": 1.0, "hurst": 0.7}
