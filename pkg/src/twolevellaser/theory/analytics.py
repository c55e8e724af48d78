"""Closed-form steady-state, correlation and spectral results.

Populations, photon statistics and quadrature variances follow from the
stationary atomic populations. The two-time correlation is a difference of
two exponentials with rates eta/2 and kappa/2, so the power spectrum is a
difference of two Lorentzians and the in-band photon fraction is a
difference of two arctangents. When kappa and eta coincide, those
differences cancel catastrophically and the closed L'Hopital limits are
used instead.
"""

from __future__ import annotations

import logging
import math
from typing import NamedTuple, Sequence, Union

import numpy as np
from scipy import integrate

from ..models.results import SpectrumCurve, SteadyStateReport
from ..models.spec import LaserParams
from .model import DEFAULT_EPS_WAT, DEFAULT_TOL_REL, classify_regime, derive_constants

logger = logging.getLogger(__name__)

TOL_DEG = 1e-9

ArrayLike = Union[float, Sequence[float], np.ndarray]


class Populations(NamedTuple):
    n_a: float
    n_b: float


class QuadratureVariances(NamedTuple):
    var_plus: float
    var_minus: float
    ub_product: float


def _is_degenerate(params: LaserParams, tol_deg: float) -> bool:
    kappa, eta = params.kappa, params.eta
    degenerate = abs(kappa - eta) <= tol_deg * max(kappa, eta)
    if degenerate:
        logger.debug("kappa=%g and eta=%g coincide, using closed limits", kappa, eta)
    return degenerate


def _scalar_or_array(values: np.ndarray) -> Union[float, np.ndarray]:
    return float(values) if values.ndim == 0 else values


def steady_populations(params: LaserParams) -> Populations:
    """Stationary upper and lower level counts.

    n_a = r_a N / eta and n_b = N - n_a. Without pumping every atom sits in
    the lower level.
    """
    n_atoms = params.n_atoms
    if params.pump_rate == 0:
        return Populations(n_a=0.0, n_b=float(n_atoms))
    n_a = params.pump_rate * n_atoms / derive_constants(params).eta
    return Populations(n_a=n_a, n_b=n_atoms - n_a)


def photon_ratio(params: LaserParams) -> float:
    """gamma_c / kappa, the photons per atom factor."""
    return derive_constants(params).gamma_c / params.kappa


def mean_photon_number(params: LaserParams) -> float:
    """nbar = (gamma_c / kappa) r_a N / eta."""
    return photon_ratio(params) * steady_populations(params).n_a


def antinormal_photon_number(params: LaserParams) -> float:
    """<b b^dagger> = (gamma_c / kappa) n_b."""
    return photon_ratio(params) * steady_populations(params).n_b


def photon_variance(params: LaserParams) -> float:
    """Normally ordered photon-number variance (gamma_c/kappa)^2 n_a n_b."""
    pops = steady_populations(params)
    return photon_ratio(params) ** 2 * pops.n_a * pops.n_b


def quadrature_variances(params: LaserParams) -> QuadratureVariances:
    """Quadrature variances and the lower bound of their uncertainty product."""
    pops = steady_populations(params)
    ratio = photon_ratio(params)
    var = ratio * (pops.n_a + pops.n_b)
    return QuadratureVariances(
        var_plus=var,
        var_minus=var,
        ub_product=ratio * abs(pops.n_a - pops.n_b),
    )


def correlation_g1(
    params: LaserParams, tau: ArrayLike, tol_deg: float = TOL_DEG
) -> Union[float, np.ndarray]:
    """Stationary two-time correlation <b^dagger(t) b(t + tau)>.

    Raises:
        ValueError: for negative tau.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be >= 0")
    return _scalar_or_array(
        _two_exponentials(params, tau, mean_photon_number(params), tol_deg)
    )


def _two_exponentials(
    params: LaserParams, tau: np.ndarray, scale: float, tol_deg: float
) -> np.ndarray:
    kappa, eta = params.kappa, params.eta
    if _is_degenerate(params, tol_deg):
        return scale * (1.0 + kappa * tau / 2.0) * np.exp(-kappa * tau / 2.0)
    return (
        kappa * scale / (kappa - eta) * np.exp(-eta * tau / 2.0)
        - eta * scale / (kappa - eta) * np.exp(-kappa * tau / 2.0)
    )


def power_spectrum(
    params: LaserParams,
    omega_offset: ArrayLike,
    taper_rate: float = 0.0,
    tol_deg: float = TOL_DEG,
) -> Union[float, np.ndarray]:
    """Photons per unit angular frequency at offset w = omega - omega0.

    A nonzero ``taper_rate`` returns the spectrum of the correlation
    multiplied by exp(-taper_rate * tau), i.e. both Lorentzian half-widths
    grow by taper_rate.
    """
    w = np.asarray(omega_offset, dtype=float)
    if not np.all(np.isfinite(w)):
        raise ValueError("omega_offset must be finite")
    if taper_rate < 0:
        raise ValueError("taper_rate must be >= 0")
    nbar = mean_photon_number(params)
    kappa, eta = params.kappa, params.eta
    w2 = w * w

    if _is_degenerate(params, tol_deg):
        a = kappa / 2.0 + taper_rate
        denom = w2 + a * a
        values = nbar / math.pi * (a / denom + (kappa / 2.0) * (a * a - w2) / denom**2)
        return _scalar_or_array(values)

    h_eta = eta / 2.0 + taper_rate
    h_kappa = kappa / 2.0 + taper_rate
    values = (
        kappa * nbar / (kappa - eta) * (h_eta / math.pi) / (w2 + h_eta**2)
        - eta * nbar / (kappa - eta) * (h_kappa / math.pi) / (w2 + h_kappa**2)
    )
    return _scalar_or_array(values)


def band_fraction_z(
    params: LaserParams, band_halfwidth: ArrayLike, tol_deg: float = TOL_DEG
) -> Union[float, np.ndarray]:
    """Fraction of the mean photon number within +-band_halfwidth of omega0."""
    lam = np.asarray(band_halfwidth, dtype=float)
    if np.any(lam < 0):
        raise ValueError("band_halfwidth must be >= 0")
    kappa, eta = params.kappa, params.eta

    if _is_degenerate(params, tol_deg):
        values = (
            4.0 * kappa * lam / (kappa**2 + 4.0 * lam**2) + 2.0 * np.arctan(2.0 * lam / kappa)
        ) / math.pi
        return _scalar_or_array(values)

    values = (
        2.0 * kappa / math.pi / (kappa - eta) * np.arctan(2.0 * lam / eta)
        - 2.0 * eta / math.pi / (kappa - eta) * np.arctan(2.0 * lam / kappa)
    )
    return _scalar_or_array(values)


def band_photon_number(
    params: LaserParams, band_halfwidth: ArrayLike, tol_deg: float = TOL_DEG
) -> Union[float, np.ndarray]:
    """Mean photon number within +-band_halfwidth of omega0."""
    return mean_photon_number(params) * band_fraction_z(params, band_halfwidth, tol_deg)


def integrate_spectrum(params: LaserParams, lo: float, hi: float) -> float:
    """Adaptive quadrature of the power spectrum over [lo, hi]."""
    if hi < lo:
        raise ValueError("hi must be >= lo")
    if hi == lo:
        return 0.0
    breaks = [0.0, params.kappa / 2, -params.kappa / 2, params.eta / 2, -params.eta / 2]
    points = sorted({p for p in breaks if lo < p < hi})
    value, _ = integrate.quad(
        lambda w: power_spectrum(params, w),
        lo,
        hi,
        points=points or None,
        epsabs=1e-12,
        epsrel=1e-12,
        limit=500,
    )
    return float(value)


def spectrum_curve(params: LaserParams, omega_offsets: ArrayLike) -> SpectrumCurve:
    """Sample P(omega) on a grid and count negative samples."""
    offsets = np.atleast_1d(np.asarray(omega_offsets, dtype=float))
    values = np.atleast_1d(power_spectrum(params, offsets))
    negative = int(np.count_nonzero(values < 0))
    if negative:
        logger.warning("power spectrum negative at %d of %d grid points", negative, len(values))
    return SpectrumCurve(
        omega_offsets=offsets, values=values, params_echo=params, negative_points=negative
    )


def full_model_photon_number(params: LaserParams) -> float:
    """Stationary E|b|^2 of the coupled field/polarization equations.

    Without slaving the field to the polarization the cavity filters the
    polarization noise, giving gamma_c r_a N / (eta (eta + kappa)); this tends
    to nbar as kappa / eta grows.
    """
    eta = params.eta
    return (
        derive_constants(params).gamma_c * params.pump_rate * params.n_atoms
        / (eta * (eta + params.kappa))
    )


def full_model_correlation(
    params: LaserParams, tau: ArrayLike, tol_deg: float = TOL_DEG
) -> Union[float, np.ndarray]:
    """Two-time field correlation of the coupled equations.

    Same two-exponential shape as correlation_g1, scaled to the full-model
    stationary photon number.
    """
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be >= 0")
    return _scalar_or_array(
        _two_exponentials(params, tau, full_model_photon_number(params), tol_deg)
    )


def steady_state_report(
    params: LaserParams,
    tol_rel: float = DEFAULT_TOL_REL,
    eps_wat: float = DEFAULT_EPS_WAT,
) -> SteadyStateReport:
    """Bundle every closed-form steady-state quantity."""
    pops = steady_populations(params)
    quad = quadrature_variances(params)
    ratio = photon_ratio(params)
    return SteadyStateReport(
        n_a=pops.n_a,
        n_b=pops.n_b,
        nbar=mean_photon_number(params),
        dn2=photon_variance(params),
        var_plus=quad.var_plus,
        var_minus=quad.var_minus,
        ub_product=quad.ub_product,
        regime=classify_regime(params, tol_rel=tol_rel, eps_wat=eps_wat),
        nbar_well_above_limit=ratio * params.n_atoms,
        nbar_threshold_limit=ratio * params.n_atoms / 2.0,
    )


def adiabatic_correlation(params: LaserParams, tau: ArrayLike) -> Union[float, np.ndarray]:
    """Field correlation when b is slaved to m: nbar exp(-eta tau / 2)."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValueError("tau must be >= 0")
    return _scalar_or_array(mean_photon_number(params) * np.exp(-params.eta * tau / 2.0))


def adiabatic_power_spectrum(
    params: LaserParams, omega_offset: ArrayLike, taper_rate: float = 0.0
) -> Union[float, np.ndarray]:
    """Single Lorentzian of half-width eta/2 (+ taper_rate) carrying nbar."""
    w = np.asarray(omega_offset, dtype=float)
    h = params.eta / 2.0 + taper_rate
    return _scalar_or_array(mean_photon_number(params) / math.pi * h / (w * w + h * h))
