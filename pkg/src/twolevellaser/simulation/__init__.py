"""Stochastic population and field simulators."""

from .accumulators import MomentPlan, StreamingMoments
from .langevin import (
    SampleBudgetExceeded,
    accumulate_shard,
    noise_sample,
    recorded_times,
    simulate_ensemble,
    simulate_moments,
    simulate_shard,
    step,
    step_b,
    step_m,
)
from .population import (
    default_burn_in,
    jump_evolve,
    ode_evolve,
    ode_steady_state,
    single_atom_upper_probability,
    stationary_average,
)

__all__ = [
    "MomentPlan",
    "StreamingMoments",
    "SampleBudgetExceeded",
    "accumulate_shard",
    "noise_sample",
    "recorded_times",
    "simulate_ensemble",
    "simulate_moments",
    "simulate_shard",
    "step",
    "step_b",
    "step_m",
    "default_burn_in",
    "jump_evolve",
    "ode_evolve",
    "ode_steady_state",
    "single_atom_upper_probability",
    "stationary_average",
]
