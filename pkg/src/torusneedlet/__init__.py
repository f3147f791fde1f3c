"""Needlet analysis and moment-based Gaussianity tests for random fields on the circle."""

from .coeffs import (
    EmpiricalSpectrum,
    WaveletCoefficients,
    coeff_correlation,
    coeff_covariance_lags,
    coeff_variance,
    coeff_variance_estimate,
    correlation_decay_constant,
    empirical_spectrum,
    needlet_coeffs,
    needlet_coeffs_from_samples,
)
from .errors import ConsistencyError, ValidationError
from .field import GridSample, SpectralField, evaluate_grid, replication_rng, synthesize
from .frame import (
    LocalizationProfile,
    NeedletScale,
    QuadratureRule,
    localization_profile,
    partition_of_unity,
    phi,
    psi_eval,
    quadrature,
    tight_frame_check,
    window_a,
)
from .harness import (
    AliasingResult,
    AlternativeResult,
    ExperimentConfig,
    McResult,
    NormalityDiagnostics,
    emit_histogram,
    normality_diagnostics,
    run_aliasing,
    run_alternative,
    run_mc,
)
from .spectrum import BoundsReport, PowerSpectrum, validate_bounds
from .stats import (
    StudentizedReport,
    TestStatistics,
    VarianceSet,
    coeff_stats,
    delta_multiplicity,
    estimated_variances,
    fejer_kernel,
    kurtosis_stat,
    kurtosis_variance,
    kurtosis_variance_bruteforce,
    kurtosis_variance_estimate,
    kurtosis_variance_estimate_bruteforce,
    kurtosis_variance_via_covariance,
    report_from_coeffs,
    report_from_field,
    report_from_samples,
    sample_mean,
    skewness_stat,
    skewness_variance,
    skewness_variance_bruteforce,
    skewness_variance_estimate,
    skewness_variance_estimate_bruteforce,
    skewness_variance_via_covariance,
    studentize,
    theoretical_variances,
)

__version__ = "0.1.0"

__all__ = [
    "AliasingResult",
    "AlternativeResult",
    "BoundsReport",
    "ConsistencyError",
    "EmpiricalSpectrum",
    "ExperimentConfig",
    "GridSample",
    "LocalizationProfile",
    "McResult",
    "NeedletScale",
    "NormalityDiagnostics",
    "PowerSpectrum",
    "QuadratureRule",
    "SpectralField",
    "StudentizedReport",
    "TestStatistics",
    "ValidationError",
    "VarianceSet",
    "WaveletCoefficients",
    "coeff_correlation",
    "coeff_covariance_lags",
    "coeff_stats",
    "coeff_variance",
    "coeff_variance_estimate",
    "correlation_decay_constant",
    "delta_multiplicity",
    "emit_histogram",
    "empirical_spectrum",
    "estimated_variances",
    "evaluate_grid",
    "fejer_kernel",
    "kurtosis_stat",
    "kurtosis_variance",
    "kurtosis_variance_bruteforce",
    "kurtosis_variance_estimate",
    "kurtosis_variance_estimate_bruteforce",
    "kurtosis_variance_via_covariance",
    "localization_profile",
    "needlet_coeffs",
    "needlet_coeffs_from_samples",
    "normality_diagnostics",
    "partition_of_unity",
    "phi",
    "psi_eval",
    "quadrature",
    "replication_rng",
    "report_from_coeffs",
    "report_from_field",
    "report_from_samples",
    "run_aliasing",
    "run_alternative",
    "run_mc",
    "sample_mean",
    "skewness_stat",
    "skewness_variance",
    "skewness_variance_bruteforce",
    "skewness_variance_estimate",
    "skewness_variance_estimate_bruteforce",
    "skewness_variance_via_covariance",
    "studentize",
    "synthesize",
    "theoretical_variances",
    "tight_frame_check",
    "validate_bounds",
    "window_a",
]
