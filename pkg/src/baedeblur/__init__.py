"""Deblurring under simultaneous multiplicative and additive noise.

The library embeds the multiplicative part of the measurement model
``y = n * (A x) + eta`` into an approximate additive Gaussian error,
which keeps inference linear: one symmetric positive-definite solve gives
the MAP field, and the same matrix inverts to the Laplace posterior
covariance used for pointwise credible bands.
"""

from .blur import ForwardOperator, gaussian_kernel
from .config import ConfigError, ExperimentConfig
from .error_model import (
    ErrorStatistics,
    conditional_error_stats,
    embedded_error_statistics,
    error_covariance,
    error_mean,
    whiten,
)
from .grids import (
    Grid,
    GridField,
    PhantomBlock,
    block_phantom,
    constant_field,
    cross_section,
    default_phantom,
    field_from_matrix,
    make_field,
    make_grid,
    value_range,
)
from .inference import (
    PosteriorSummary,
    coverage_fraction,
    credible_band,
    map_estimate,
    posterior_covariance,
    summarize_posterior,
)
from .linalg import CovarianceModel, FactorizationError
from .log_baseline import (
    LogBaselineError,
    LogDomainModel,
    NonConvergenceError,
    NonPositiveDataError,
    NonPositiveModelOutputError,
    log_transform_map,
    lognormal_matched_model,
)
from .noise import (
    AdditiveNoise,
    CorrelatedNormalNoise,
    GammaNoise,
    NormalNoise,
    UniformNoise,
    calibrate_additive_sigma,
    negative_probability,
    sample_additive,
    sample_multiplicative,
)
from .pipeline import run_experiment, sweep_correlation, validate_covariance
from .priors import (
    PriorModel,
    assemble_mass_stiffness,
    build_prior,
    correlation_function,
    sample_prior,
)
from .validation import (
    ScalarProblem,
    covariance_check,
    exact_likelihood_1d,
    gaussian_approx_moments,
    likelihood_moments,
    simulate_errors,
)

__version__ = "0.1.0"
