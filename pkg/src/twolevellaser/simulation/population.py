"""Atomic population dynamics under pumping and stimulated emission.

Two evolutions are provided: the exact solution of the mean-value rate
equation and a continuous-time jump process over N exchangeable atoms,
each pumped up at rate r_a and emitting down at rate gamma_c.
"""

from __future__ import annotations

import logging
import math
from typing import NamedTuple, Optional

import numpy as np

from ..models.spec import LaserParams
from ..models.state import PopulationState, PopulationTrajectory
from ..theory.analytics import steady_populations
from ..theory.model import derive_constants

logger = logging.getLogger(__name__)


class StationaryAverage(NamedTuple):
    mean: float
    se: float
    n_batches: int


def default_burn_in(params: LaserParams) -> float:
    """Ten relaxation times of the population, 10 / eta."""
    return 10.0 / derive_constants(params).eta


def single_atom_upper_probability(params: LaserParams) -> float:
    """Stationary probability that one atom is in the upper level, r_a / eta."""
    return params.pump_rate / derive_constants(params).eta


def _check_initial(params: LaserParams, initial: PopulationState, integer: bool) -> None:
    errors = initial.validate(params.n_atoms, integer=integer)
    if errors:
        raise ValueError("invalid initial population: " + "; ".join(errors))


def ode_evolve(
    params: LaserParams,
    initial: PopulationState,
    t_end: float,
    dt_max: float,
) -> PopulationTrajectory:
    """Exact exponential relaxation of n_a towards r_a N / eta.

    Samples are equally spaced with step <= dt_max, starting at initial.t.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    if dt_max <= 0:
        raise ValueError("dt_max must be positive")
    _check_initial(params, initial, integer=False)

    eta = derive_constants(params).eta
    n_inf = steady_populations(params).n_a
    n_steps = max(1, int(math.ceil(t_end / dt_max - 1e-12)))
    elapsed = np.linspace(0.0, t_end, n_steps + 1)

    n_a = n_inf + (initial.n_a - n_inf) * np.exp(-eta * elapsed)
    n_b = params.n_atoms - n_a
    return PopulationTrajectory(t=initial.t + elapsed, n_a=n_a, n_b=n_b, kind="ode")


def jump_evolve(
    params: LaserParams,
    initial: PopulationState,
    t_end: float,
    rng_seed: int,
    max_events: Optional[int] = None,
) -> PopulationTrajectory:
    """Exact stochastic simulation of the pump/emission jump process.

    Upward jumps occur at total rate r_a n_b, downward jumps at gamma_c n_a.
    Samples are taken at every event plus a closing sample at t_end; the
    counts are constant between samples. When max_events stops the run
    early the trajectory ends at the last event.
    """
    if t_end <= 0:
        raise ValueError("t_end must be positive")
    _check_initial(params, initial, integer=True)

    rng = np.random.default_rng(rng_seed)
    gamma_c = derive_constants(params).gamma_c
    r_a = params.pump_rate
    n_atoms = params.n_atoms

    n_a = int(initial.n_a)
    t = initial.t
    t_stop = initial.t + t_end
    times = [t]
    uppers = [n_a]
    n_events = 0
    truncated = False

    while True:
        if max_events is not None and n_events >= max_events:
            truncated = True
            break
        rate_up = r_a * (n_atoms - n_a)
        rate_down = gamma_c * n_a
        total = rate_up + rate_down
        if total == 0:
            logger.debug("jump process absorbed at t=%g with n_a=%d", t, n_a)
            break
        t += rng.exponential(1.0 / total)
        if t >= t_stop:
            break
        if rng.random() * total < rate_up:
            n_a += 1
        else:
            n_a -= 1
        times.append(t)
        uppers.append(n_a)
        n_events += 1

    if not truncated and times[-1] < t_stop:
        times.append(t_stop)
        uppers.append(n_a)

    logger.debug("jump process: %d events up to t=%g", n_events, times[-1])
    t_arr = np.asarray(times, dtype=float)
    n_a_arr = np.asarray(uppers, dtype=float)
    return PopulationTrajectory(
        t=t_arr, n_a=n_a_arr, n_b=n_atoms - n_a_arr, kind="jump", n_events=n_events
    )


def stationary_average(
    trajectory: PopulationTrajectory,
    burn_in: float,
    n_batches: int = 20,
) -> StationaryAverage:
    """Time-weighted mean of n_a after burn_in, with batch-means standard error.

    Jump trajectories are integrated exactly as step functions; ODE
    trajectories are treated the same way on their sample grid.
    """
    t = trajectory.t
    start = t[0] + burn_in
    stop = t[-1]
    if start >= stop:
        raise ValueError("empty stationary window: burn_in covers the whole trajectory")
    if n_batches < 2:
        raise ValueError("need at least two batches")

    # cumulative integral of the step function at each sample time
    cumulative = np.concatenate([[0.0], np.cumsum(trajectory.n_a[:-1] * np.diff(t))])

    def integral_to(x: np.ndarray) -> np.ndarray:
        idx = np.clip(np.searchsorted(t, x, side="right") - 1, 0, len(t) - 1)
        return cumulative[idx] + trajectory.n_a[idx] * (x - t[idx])

    edges = np.linspace(start, stop, n_batches + 1)
    integrals = integral_to(edges)
    batch_means = np.diff(integrals) / np.diff(edges)
    mean = float((integrals[-1] - integrals[0]) / (stop - start))
    se = float(np.std(batch_means, ddof=1) / math.sqrt(n_batches))
    return StationaryAverage(mean=mean, se=se, n_batches=n_batches)


def ode_steady_state(params: LaserParams) -> PopulationState:
    """Fixed point of the rate equation, n_a = r_a N / eta."""
    pops = steady_populations(params)
    return PopulationState(n_a=pops.n_a, n_b=pops.n_b, t=math.inf)
