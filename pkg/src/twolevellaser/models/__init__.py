"""Data models for the two-level laser toolkit."""

from .spec import LaserParams, SimConfig, RunConfig
from .state import PopulationState, PopulationTrajectory, FieldState, Ensemble
from .results import (
    RegimeVariant,
    Regime,
    SteadyStateReport,
    SpectrumCurve,
    EnsembleMoments,
    CorrelationEstimate,
    SpectrumEstimate,
    Comparison,
    ComparisonReport,
)

__all__ = [
    "LaserParams",
    "SimConfig",
    "RunConfig",
    "PopulationState",
    "PopulationTrajectory",
    "FieldState",
    "Ensemble",
    "RegimeVariant",
    "Regime",
    "SteadyStateReport",
    "SpectrumCurve",
    "EnsembleMoments",
    "CorrelationEstimate",
    "SpectrumEstimate",
    "Comparison",
    "ComparisonReport",
]
