"""Result models: closed-form reports and statistical estimates."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import numpy as np
from scipy.integrate import trapezoid

from .spec import LaserParams


class RegimeVariant(Enum):
    """Operating regimes of the laser."""

    BELOW_THRESHOLD = "below_threshold"
    AT_THRESHOLD = "at_threshold"
    ABOVE_THRESHOLD = "above_threshold"
    WELL_ABOVE_THRESHOLD = "well_above_threshold"


@dataclass(frozen=True)
class Regime:
    """Regime classification by the ratio gamma_c / r_a."""

    variant: RegimeVariant
    ratio: float
    degenerate: bool = False  # no pumping at all

    @property
    def is_above(self) -> bool:
        return self.variant in (
            RegimeVariant.ABOVE_THRESHOLD,
            RegimeVariant.WELL_ABOVE_THRESHOLD,
        )

    @property
    def light_character(self) -> str:
        """Label of the emitted light as far as the closed-form theory supports it."""
        if self.variant == RegimeVariant.WELL_ABOVE_THRESHOLD:
            return "coherent"
        if self.variant == RegimeVariant.AT_THRESHOLD:
            return "chaotic"
        if self.variant == RegimeVariant.ABOVE_THRESHOLD:
            return "intermediate"
        return "unclassified"

    def to_dict(self) -> dict[str, Any]:
        return {
            "variant": self.variant.value,
            "ratio": self.ratio,
            "degenerate": self.degenerate,
            "light_character": self.light_character,
        }


@dataclass(frozen=True)
class SteadyStateReport:
    """Every closed-form steady-state quantity for one parameter set."""

    n_a: float
    n_b: float
    nbar: float
    dn2: float
    var_plus: float
    var_minus: float
    ub_product: float
    regime: Regime
    nbar_well_above_limit: float  # (gamma_c/kappa) N
    nbar_threshold_limit: float  # (gamma_c/2kappa) N

    @property
    def uncertainty_excess(self) -> float:
        """var_plus*var_minus - ub_product**2; zero only for minimum uncertainty."""
        return self.var_plus * self.var_minus - self.ub_product**2

    @property
    def minimum_uncertainty(self) -> bool:
        scale = max(self.var_plus * self.var_minus, 1e-300)
        return abs(self.uncertainty_excess) <= 1e-9 * scale

    def rows(self) -> list[tuple[str, str, float]]:
        """(quantity, equation tag, value) rows."""
        return [
            ("n_a", "Eq40", self.n_a),
            ("n_b", "Eq41", self.n_b),
            ("nbar", "Eq54", self.nbar),
            ("nbar_well_above_limit", "Eq55", self.nbar_well_above_limit),
            ("nbar_threshold_limit", "Eq56", self.nbar_threshold_limit),
            ("dn2", "Eq60", self.dn2),
            ("var_plus", "Eq69", self.var_plus),
            ("var_minus", "Eq69", self.var_minus),
            ("ub_product", "Eq68", self.ub_product),
            ("uncertainty_excess", "Eq68", self.uncertainty_excess),
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "quantities": [
                {"quantity": name, "source": tag, "value": value}
                for name, tag, value in self.rows()
            ],
            "minimum_uncertainty": self.minimum_uncertainty,
            "regime": self.regime.to_dict(),
        }


@dataclass
class SpectrumCurve:
    """P(omega) sampled on a grid of offsets omega - omega0."""

    omega_offsets: np.ndarray
    values: np.ndarray
    params_echo: LaserParams
    negative_points: int = 0

    def rows(self) -> list[tuple[float, float]]:
        return [(float(w), float(p)) for w, p in zip(self.omega_offsets, self.values)]


@dataclass(frozen=True)
class EnsembleMoments:
    """Time-and-ensemble averages over the stationary window."""

    mean_b: complex
    e_abs_b2: float
    e_abs_b4: float
    e_abs_m2: float
    n_eff: float
    se_mean_b: float
    se_abs_b2: float
    se_abs_b4: float
    se_abs_m2: float
    n_batches: int = 0
    batch_length: float = 0.0

    @property
    def gaussian_ratio(self) -> float:
        """E|b|^4 / (E|b|^2)^2, equal to 2 for a zero-mean complex Gaussian."""
        if self.e_abs_b2 == 0:
            return float("nan")
        return self.e_abs_b4 / self.e_abs_b2**2

    @property
    def se_gaussian_ratio(self) -> float:
        if self.e_abs_b2 == 0 or self.e_abs_b4 == 0:
            return float("nan")
        r = self.gaussian_ratio
        return r * float(
            np.hypot(self.se_abs_b4 / self.e_abs_b4, 2.0 * self.se_abs_b2 / self.e_abs_b2)
        )

    @property
    def cauchy_schwarz_ok(self) -> bool:
        return self.e_abs_b4 >= self.e_abs_b2**2 * (1 - 1e-12)


@dataclass
class CorrelationEstimate:
    """Estimated <b*(t) b(t+tau)> with per-lag standard errors."""

    lags: np.ndarray
    values: np.ndarray
    se: np.ndarray

    def rows(self) -> list[tuple[float, float, float, float]]:
        """(lag, Re value, Im value, se) rows."""
        return [
            (float(lag), float(v.real), float(v.imag), float(s))
            for lag, v, s in zip(self.lags, self.values, self.se)
        ]


@dataclass
class SpectrumEstimate:
    """Power spectrum estimated from a correlation estimate."""

    omega_offsets: np.ndarray
    values: np.ndarray
    se: np.ndarray
    resolution: float
    window_id: str
    taper_rate: float = 0.0

    def rows(self) -> list[tuple[float, float, float]]:
        return [
            (float(w), float(p), float(s))
            for w, p, s in zip(self.omega_offsets, self.values, self.se)
        ]

    def trapezoid_sum(self) -> float:
        return float(trapezoid(self.values, self.omega_offsets))


@dataclass(frozen=True)
class Comparison:
    """One simulated-versus-analytic verdict row."""

    observable: str
    source: str
    simulated: float
    standard_error: float
    analytic: float
    tolerance: float
    tolerance_source: str  # "statistical" or "approximation"
    note: Optional[str] = None

    @property
    def deviation(self) -> float:
        return self.simulated - self.analytic

    @property
    def passed(self) -> bool:
        return abs(self.deviation) <= self.tolerance

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict[str, Any]:
        row: dict[str, Any] = {
            "observable": self.observable,
            "source": self.source,
            "simulated": self.simulated,
            "standard_error": self.standard_error,
            "analytic": self.analytic,
            "tolerance": self.tolerance,
            "tolerance_source": self.tolerance_source,
            "verdict": self.verdict,
        }
        if self.note:
            row["note"] = self.note
        return row


@dataclass
class ComparisonReport:
    """All verdicts of one run plus the effective configuration."""

    config: dict[str, Any]
    comparisons: list[Comparison] = field(default_factory=list)
    blocks: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.comparisons)

    def to_dict(self) -> dict[str, Any]:
        return {
            "config": self.config,
            **self.blocks,
            "comparisons": [c.to_dict() for c in self.comparisons],
            "all_passed": self.passed,
        }
