"""c-number Langevin integration of the collective polarization and cavity field.

The polarization m is an Ornstein-Uhlenbeck process,

    dm/dt = -(eta/2) m + F(t),   <F*(t) F(t')> = r_a N^2 delta(t - t'),

and the cavity field follows it through

    db/dt = -(kappa/2) b + (g / sqrt(N)) m.

In adiabatic mode the field is slaved to the polarization,
b = 2g / (kappa sqrt(N)) m. Noise enters only through m; the simulated
moments are images of normally ordered operator moments.

Each trajectory draws from its own generator seeded with
``seed + trajectory index`` so results do not depend on sharding or on the
number of worker processes. Trajectories are integrated in blocks of
CHUNK_STEPS steps; simulate_moments folds every block into streaming
accumulators, while simulate_ensemble keeps the full recorded trajectories.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from multiprocessing import Pool
from typing import Callable, Iterator, Optional, Union

import numpy as np
from scipy.signal import lfilter

from ..models.spec import LaserParams, SimConfig
from ..models.state import Ensemble, FieldState
from ..theory.model import derive_constants
from .accumulators import MomentPlan, StreamingMoments

logger = logging.getLogger(__name__)

CHUNK_STEPS = 4096


class SampleBudgetExceeded(ValueError):
    """Raised before any compute when a run would exceed its sample budget."""

    def __init__(self, requested: float, allowed: float):
        self.requested = requested
        self.allowed = allowed
        super().__init__(
            f"n_traj * t_end / dt = {requested:.4g} exceeds sample_budget {allowed:.4g}"
        )


@dataclass(frozen=True)
class StepCoefficients:
    """Per-step linear update coefficients.

    m <- m_decay * m + noise_std * (z1 + i z2)
    b <- b_decay * b + b_drive * m
    """

    m_decay: float
    noise_std: float
    b_decay: float
    b_drive: float
    slave: float  # adiabatic b / m

    @classmethod
    def build(cls, params: LaserParams, config: SimConfig) -> "StepCoefficients":
        constants = derive_constants(params)
        eta, kappa, dt = constants.eta, params.kappa, config.dt
        diffusion = params.pump_rate * params.n_atoms**2

        if config.m_update == "exact_ou":
            m_decay = math.exp(-eta * dt / 2.0)
            total_var = diffusion / eta * -math.expm1(-eta * dt)
        else:
            m_decay = 1.0 - eta * dt / 2.0
            total_var = diffusion * dt

        b_decay = math.exp(-kappa * dt / 2.0)
        return cls(
            m_decay=m_decay,
            noise_std=math.sqrt(total_var / 2.0),
            b_decay=b_decay,
            b_drive=constants.coupling_lambda * -math.expm1(-kappa * dt / 2.0) / (kappa / 2.0),
            slave=2.0 * params.g / (kappa * math.sqrt(params.n_atoms)),
        )


def _complex_gaussian(
    rng: np.random.Generator, std: float, size: Optional[int] = None
) -> Union[complex, np.ndarray]:
    shape = (2,) if size is None else (size, 2)
    z = rng.standard_normal(shape)
    values = std * (z[..., 0] + 1j * z[..., 1])
    return complex(values) if size is None else values


def noise_sample(params: LaserParams, dt: float, rng: np.random.Generator) -> complex:
    """Complex Gaussian increment with E[f* f] = r_a N^2 dt and E[f f] = 0."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    std = math.sqrt(params.pump_rate * params.n_atoms**2 * dt / 2.0)
    return _complex_gaussian(rng, std)


def step_m(
    state: FieldState, params: LaserParams, config: SimConfig, rng: np.random.Generator
) -> complex:
    """Advance the polarization by one step (euler or exact_ou update)."""
    coeffs = StepCoefficients.build(params, config)
    if config.m_update == "euler":
        return state.m - (derive_constants(params).eta / 2.0) * state.m * config.dt + noise_sample(
            params, config.dt, rng
        )
    return coeffs.m_decay * state.m + _complex_gaussian(rng, coeffs.noise_std)


def step_b(state: FieldState, params: LaserParams, config: SimConfig) -> complex:
    """Exponential-Euler field update driven by m at the start of the step."""
    if config.mode != "full":
        raise ValueError("step_b integrates the field only in full mode")
    coeffs = StepCoefficients.build(params, config)
    return coeffs.b_decay * state.b + coeffs.b_drive * state.m


def step(
    state: FieldState, params: LaserParams, config: SimConfig, rng: np.random.Generator
) -> FieldState:
    """Advance both amplitudes by one step."""
    m_next = step_m(state, params, config, rng)
    if config.mode == "full":
        b_next = step_b(state, params, config)
    else:
        b_next = StepCoefficients.build(params, config).slave * m_next
    return FieldState(m=m_next, b=b_next, t=state.t + config.dt)


def _check_config(params: LaserParams, config: SimConfig) -> None:
    if config.requested_samples > config.sample_budget:
        raise SampleBudgetExceeded(config.requested_samples, config.sample_budget)
    errors = config.validate_for(params)
    if errors:
        raise ValueError("invalid simulation config: " + "; ".join(errors))


def _recorded_blocks(
    params: LaserParams,
    config: SimConfig,
    start: int,
    stop: int,
    initial: FieldState,
) -> Iterator[tuple[int, np.ndarray, np.ndarray]]:
    """Yield (first sample index, m block, b block) of the recorded samples in time order.

    The per-step recursions are linear, so each block is integrated as a
    first-order recursive filter whose state carries over to the next block.
    """
    coeffs = StepCoefficients.build(params, config)
    full = config.mode == "full"
    stride = config.record_stride
    n_steps = config.n_steps
    rngs = [np.random.default_rng(config.seed + index) for index in range(start, stop)]
    count = len(rngs)

    m_last = np.full(count, initial.m, dtype=complex)
    b_first = np.full(count, initial.b, dtype=complex) if full else coeffs.slave * m_last
    zi_m = (coeffs.m_decay * m_last)[:, None]
    zi_b = (coeffs.b_decay * b_first)[:, None]
    yield 0, m_last[:, None].copy(), b_first[:, None].copy()

    done = 0
    while done < n_steps:
        width = min(CHUNK_STEPS, n_steps - done)
        noise = np.stack([_complex_gaussian(rng, coeffs.noise_std, width) for rng in rngs])
        m_new, zi_m = lfilter([1.0], [1.0, -coeffs.m_decay], noise, axis=-1, zi=zi_m)
        if full:
            drive = np.concatenate([m_last[:, None], m_new[:, :-1]], axis=1)
            b_new, zi_b = lfilter(
                [coeffs.b_drive], [1.0, -coeffs.b_decay], drive, axis=-1, zi=zi_b
            )
        else:
            b_new = coeffs.slave * m_new
        m_last = m_new[:, -1]

        # block holds steps done + 1 .. done + width; keep multiples of stride
        offset = (-(done + 1)) % stride
        if offset < width:
            yield (
                (done + 1 + offset) // stride,
                m_new[:, offset::stride],
                b_new[:, offset::stride],
            )
        done += width


def recorded_times(config: SimConfig, t0: float = 0.0) -> np.ndarray:
    """Times of the recorded samples of a run."""
    return (t0 + config.dt * np.arange(config.n_steps + 1))[:: config.record_stride]


def simulate_shard(
    params: LaserParams,
    config: SimConfig,
    start: int,
    stop: int,
    initial: Optional[FieldState] = None,
) -> Ensemble:
    """Simulate and keep trajectories ``start`` .. ``stop - 1`` of the ensemble."""
    initial = initial or FieldState()
    blocks = list(_recorded_blocks(params, config, start, stop, initial))
    logger.debug("simulated trajectories %d..%d (%d steps)", start, stop - 1, config.n_steps)
    return Ensemble(
        t=recorded_times(config, initial.t),
        m=np.concatenate([m for _, m, _ in blocks], axis=1),
        b=np.concatenate([b for _, _, b in blocks], axis=1),
        mode=config.mode,
        seeds=[config.seed + index for index in range(start, stop)],
    )


def accumulate_shard(
    params: LaserParams,
    config: SimConfig,
    start: int,
    stop: int,
    plan: MomentPlan,
    initial: Optional[FieldState] = None,
) -> StreamingMoments:
    """Simulate trajectories ``start`` .. ``stop - 1`` keeping only running sums."""
    initial = initial or FieldState()
    moments = StreamingMoments.empty(
        plan, [config.seed + index for index in range(start, stop)]
    )
    for index0, m, b in _recorded_blocks(params, config, start, stop, initial):
        moments.update(index0, m, b)
    logger.debug("accumulated trajectories %d..%d (%d steps)", start, stop - 1, config.n_steps)
    return moments


def _shard_bounds(config: SimConfig) -> list[tuple[int, int]]:
    return [
        (start, min(start + config.shard_size, config.n_traj))
        for start in range(0, config.n_traj, config.shard_size)
    ]


def _map_shards(function: Callable, tasks: list[tuple], workers: int) -> list:
    if workers > 1 and len(tasks) > 1:
        with Pool(processes=min(workers, len(tasks))) as pool:
            return pool.map(function, tasks)
    return [function(task) for task in tasks]


def _run_shard(args: tuple) -> Ensemble:
    return simulate_shard(*args)


def _run_accumulation(args: tuple) -> StreamingMoments:
    return accumulate_shard(*args)


def simulate_ensemble(
    params: LaserParams,
    config: SimConfig,
    initial: Optional[FieldState] = None,
) -> Ensemble:
    """Simulate and keep ``config.n_traj`` independent trajectories.

    Starts from m = 0, b = 0 unless ``initial`` overrides it. Shards run in
    ``config.workers`` processes and are joined in trajectory order. Memory
    grows with n_traj * t_end / dt; use simulate_moments for long runs.

    Raises:
        SampleBudgetExceeded: if n_traj * t_end / dt exceeds the budget.
        ValueError: if the step size violates the euler stability guard.
    """
    _check_config(params, config)
    tasks = [(params, config, start, stop, initial) for start, stop in _shard_bounds(config)]
    logger.info(
        "simulating %d trajectories in %d shards (%s mode, %s)",
        config.n_traj, len(tasks), config.mode, config.m_update,
    )
    return Ensemble.concatenate(_map_shards(_run_shard, tasks, config.workers))


def simulate_moments(
    params: LaserParams,
    config: SimConfig,
    plan: MomentPlan,
    initial: Optional[FieldState] = None,
) -> StreamingMoments:
    """Simulate ``config.n_traj`` trajectories, streaming them into ``plan``'s sums.

    Only one block of CHUNK_STEPS steps per shard is held at a time; shard
    sums are merged in trajectory order, so results do not depend on the
    number of workers.

    Raises:
        SampleBudgetExceeded: if n_traj * t_end / dt exceeds the budget.
        ValueError: if the step size violates the euler stability guard or
            ``plan`` describes a different recorded grid.
    """
    _check_config(params, config)
    initial = initial or FieldState()
    times = recorded_times(config, initial.t)
    if plan.n_samples != len(times) or not math.isclose(
        plan.sample_dt, float(times[1] - times[0]), rel_tol=1e-12
    ):
        raise ValueError("accumulation plan does not match the recorded grid")

    tasks = [
        (params, config, start, stop, plan, initial) for start, stop in _shard_bounds(config)
    ]
    logger.info(
        "streaming %d trajectories in %d shards (%s mode, %s)",
        config.n_traj, len(tasks), config.mode, config.m_update,
    )
    return StreamingMoments.merge(_map_shards(_run_accumulation, tasks, config.workers))
