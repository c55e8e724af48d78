"""Ensemble estimators and simulated-versus-analytic comparisons."""

from .estimators import (
    FieldSamples,
    InsufficientLagCoverage,
    batch_size_for,
    build_comparison_report,
    compare,
    default_taper_rate,
    estimate_correlation,
    estimate_moments,
    estimate_photon_variance,
    estimate_quadrature_variances,
    estimate_spectrum,
    lag_steps_for,
    moment_plan,
    zero_mean_z,
)
from .statistics import BatchMeans, batch_means, pooled_batch_means

__all__ = [
    "FieldSamples",
    "InsufficientLagCoverage",
    "batch_size_for",
    "build_comparison_report",
    "compare",
    "default_taper_rate",
    "estimate_correlation",
    "estimate_moments",
    "estimate_photon_variance",
    "estimate_quadrature_variances",
    "estimate_spectrum",
    "lag_steps_for",
    "moment_plan",
    "zero_mean_z",
    "BatchMeans",
    "batch_means",
    "pooled_batch_means",
]
