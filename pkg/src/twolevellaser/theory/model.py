"""Derived laser constants and operating-regime classification."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..models.results import Regime, RegimeVariant
from ..models.spec import LaserParams

DEFAULT_TOL_REL = 1e-6
DEFAULT_EPS_WAT = 0.01


@dataclass(frozen=True)
class DerivedConstants:
    """Constants fixed by the parameter set."""

    gamma_c: float
    eta: float
    coupling_lambda: float


def derive_constants(params: LaserParams) -> DerivedConstants:
    """gamma_c = 4 g^2 / kappa, eta = gamma_c + r_a, coupling = g / sqrt(N).

    Raises:
        ValueError: if g or kappa is not positive.
    """
    if params.g <= 0 or params.kappa <= 0:
        raise ValueError(f"g and kappa must be positive, got g={params.g}, kappa={params.kappa}")
    gamma_c = 4.0 * params.g**2 / params.kappa
    return DerivedConstants(
        gamma_c=gamma_c,
        eta=gamma_c + params.pump_rate,
        coupling_lambda=params.g / math.sqrt(params.n_atoms),
    )


def classify_regime(
    params: LaserParams,
    tol_rel: float = DEFAULT_TOL_REL,
    eps_wat: float = DEFAULT_EPS_WAT,
) -> Regime:
    """Classify the operating point by comparing gamma_c with the pump rate.

    Threshold is |gamma_c - r_a| <= tol_rel * max(gamma_c, r_a); well above
    threshold additionally requires gamma_c <= eps_wat * r_a. With no pumping
    the laser is below threshold and the result is flagged degenerate.
    """
    if not 0 < tol_rel < 1:
        raise ValueError(f"tol_rel must be in (0, 1), got {tol_rel}")
    if not 0 < eps_wat < 1:
        raise ValueError(f"eps_wat must be in (0, 1), got {eps_wat}")

    gamma_c = derive_constants(params).gamma_c
    r_a = params.pump_rate

    if r_a == 0:
        return Regime(RegimeVariant.BELOW_THRESHOLD, ratio=math.inf, degenerate=True)

    ratio = gamma_c / r_a
    if abs(gamma_c - r_a) <= tol_rel * max(gamma_c, r_a):
        variant = RegimeVariant.AT_THRESHOLD
    elif gamma_c > r_a:
        variant = RegimeVariant.BELOW_THRESHOLD
    elif gamma_c <= eps_wat * r_a:
        variant = RegimeVariant.WELL_ABOVE_THRESHOLD
    else:
        variant = RegimeVariant.ABOVE_THRESHOLD
    return Regime(variant, ratio=ratio)
