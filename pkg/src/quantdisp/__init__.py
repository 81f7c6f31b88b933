"""Joint asymptotics of quantile and dispersion estimators for iid samples."""

__version__ = "0.1.0"

from .distributions import (  # noqa: E402
    Distribution,
    DistributionSummary,
    MomentUnavailable,
    NumericError,
    abs_partial_expectation,
    custom,
    gaussian,
    median_abs_deviation,
    moment_exists,
    partial_expectation,
    quantile,
    standardized_moment,
    student,
    summarize,
)
from .estimators import (  # noqa: E402
    MAD,
    MEDIAN_AD,
    VARIANCE,
    Dispersion,
    abs_central_moment,
    abs_moment,
    dispersion_estimate,
    loc_scale_quantile,
    parse_dispersion,
    sample_mad,
    sample_median,
    sample_median_ad,
    sample_quantile,
    sample_variance,
)
from .asymptotics import (  # noqa: E402
    AsymptoticResult,
    ConditionReport,
    ConditionViolated,
    EstimatorPairSpec,
    QuantileKind,
    TauSpec,
    TransformSpec,
    asymptotic_hist_abs_moment,
    asymptotic_hist_dispersion,
    asymptotic_hist_medianad,
    asymptotic_locscale_dispersion,
    asymptotic_locscale_medianad,
    asymptotic_pair,
    delta_method,
    scale_for_sample_sizes,
    tau,
    validate_conditions,
    vector_asymptotics,
)
from .montecarlo import (  # noqa: E402
    DegenerateSeries,
    SimulationConfig,
    SimulationSummary,
    empirical_covariance,
    fisher_ci,
    pearson_correlation,
    run_experiment,
    simulate_series,
)
