import numpy as np
import pytest

from smfbm import (
    DomainError,
    EstimateWithError,
    IncrementWindow,
    ProcessSpec,
    SamplerConfig,
    TimeGrid,
    empirical_cov,
    empirical_incr_corr,
    expected_qv,
    incr_corr,
    realized_qv,
    sample,
)


def _ens(a, b, h, grid, n=20000, seed=2024):
    return sample(SamplerConfig(ProcessSpec.smfbm(a, b, h), grid, n, seed))


def test_within():
    e = EstimateWithError(1.0, 0.1, 100)
    assert e.within(1.45) and not e.within(1.6)


def test_cov_brownian():
    ens = _ens(1, 1, 0.5, TimeGrid([0.0, 1.0, 2.0]))
    e = empirical_cov(ens, 1, 2)
    assert e.within(2.0)
    z = empirical_cov(ens, 0, 0)
    assert z.value == 0.0 and z.std_error == 0.0


def test_cov_fractional():
    ens = _ens(1, 1, 0.7, TimeGrid([0.0, 1.0, 2.0]))
    assert empirical_cov(ens, 1, 2).within(1.81124746067274900734)


def test_cov_index_errors():
    ens = _ens(1, 1, 0.7, TimeGrid([0.0, 1.0]), n=10)
    with pytest.raises(DomainError):
        empirical_cov(ens, 0, 2)


def test_needs_two_paths():
    ens = _ens(1, 1, 0.7, TimeGrid([0.0, 1.0]), n=1)
    with pytest.raises(DomainError):
        empirical_cov(ens, 0, 1)


GRID3 = TimeGrid([0.0, 1.0, 2.0, 3.0])


@pytest.mark.parametrize("h, coeffs", [(0.5, (1, 1)), (0.7, (0, 1)), (0.3, (1, 1))])
def test_incr_corr(h, coeffs):
    ens = _ens(coeffs[0], coeffs[1], h, GRID3, n=20000)
    w = IncrementWindow(0, 2, 1)
    e = empirical_incr_corr(ens, w)
    assert e.std_error == pytest.approx(1 / np.sqrt(20000 - 3))
    assert e.within(incr_corr(w, coeffs, h))


def test_incr_corr_off_grid():
    ens = _ens(1, 1, 0.7, GRID3, n=10)
    with pytest.raises(DomainError):
        empirical_incr_corr(ens, IncrementWindow(0, 1.5, 1))


def test_realized_qv():
    grid = TimeGrid.uniform(0, 1, 256)
    ens = _ens(1, 1, 0.7, grid, n=4000)
    assert realized_qv(ens).within(expected_qv(1.0, 256, (1, 1), 0.7))


def test_realized_qv_pure_bm_and_half():
    grid = TimeGrid.uniform(0, 1, 16)
    assert realized_qv(_ens(2, 0, 0.7, grid, n=5000)).within(4.0)
    assert realized_qv(_ens(1, 1, 0.5, grid, n=5000)).within(2.0)


def test_realized_qv_grid_checks():
    with pytest.raises(DomainError):
        realized_qv(_ens(1, 1, 0.7, TimeGrid([0.0, 1.0, 3.0]), n=4))
    with pytest.raises(DomainError):
        realized_qv(_ens(1, 1, 0.7, TimeGrid([1.0, 2.0, 3.0]), n=4))


def test_deterministic():
    ens = _ens(1, 1, 0.7, GRID3, n=300)
    w = IncrementWindow(0, 2, 1)
    assert empirical_incr_corr(ens, w) == empirical_incr_corr(ens, w)
    assert realized_qv(ens) == realized_qv(ens)
