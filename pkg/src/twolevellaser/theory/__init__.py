"""Closed-form laser theory."""

from .model import DerivedConstants, classify_regime, derive_constants
from .analytics import (
    band_fraction_z,
    adiabatic_correlation,
    adiabatic_power_spectrum,
    antinormal_photon_number,
    band_photon_number,
    correlation_g1,
    full_model_correlation,
    full_model_photon_number,
    integrate_spectrum,
    mean_photon_number,
    photon_variance,
    power_spectrum,
    quadrature_variances,
    spectrum_curve,
    steady_populations,
    steady_state_report,
)

__all__ = [
    "DerivedConstants",
    "classify_regime",
    "derive_constants",
    "band_fraction_z",
    "adiabatic_correlation",
    "adiabatic_power_spectrum",
    "antinormal_photon_number",
    "band_photon_number",
    "correlation_g1",
    "full_model_correlation",
    "full_model_photon_number",
    "integrate_spectrum",
    "mean_photon_number",
    "photon_variance",
    "power_spectrum",
    "quadrature_variances",
    "spectrum_curve",
    "steady_populations",
    "steady_state_report",
]
