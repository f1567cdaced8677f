"""Sub-mixed fractional Brownian motion: kernels, increments, sampling and
semimartingale diagnostics."""

__version__ = "0.1.0"

from .exceptions import DomainError, FactorizationError, SingularSystemError
from .kernels import (
    CovarianceMatrix,
    MixCoeffs,
    ProcessKind,
    ProcessSpec,
    TimeGrid,
    cov_matrix,
    fbm_cov,
    mfbm_cov,
    rescale_params,
    sfbm_cov,
    smfbm_cov,
    smfbm_var,
)
from .increments import (
    IncrementWindow,
    IntervalPair,
    adjacent_corr_pair,
    cov_gap,
    incr_alpha,
    incr_bounds,
    incr_corr,
    incr_gamma,
    incr_second_moment,
    lag_cov,
    lag_cov_asymptote,
    nonoverlap_cov_mfbm,
    nonoverlap_cov_smfbm,
)
from .diagnostics import (
    CondL2Result,
    DiagnosticsReport,
    QvLimit,
    Regime,
    SemimartVerdict,
    cond_l2_lower_bound,
    cond_l2_sum,
    expected_qv,
    l2_mixed_partial_probe,
    markov_defect,
    qv_limit_class,
    quasi_mart_sum,
    semimart_verdict,
)
from .simulate import PathEnsemble, SamplerConfig, sample
from .estimators import EstimateWithError, empirical_cov, empirical_incr_corr, realized_qv
