"""Pydantic models for configuration parsing and validation."""

from __future__ import annotations

import math
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class LaserParams(BaseModel):
    """Physical inputs of the pumped two-level laser.

    All rates share one user-chosen reciprocal-time unit; only ratios
    matter for dimensionless outputs.
    """

    model_config = ConfigDict(frozen=True)

    g: float = Field(gt=0, description="Atom-field coupling constant (rad/s)")
    kappa: float = Field(gt=0, description="Cavity damping rate (rad/s)")
    pump_rate: float = Field(ge=0, description="Single-atom pump rate r_a (1/s)")
    n_atoms: int = Field(ge=1, description="Number of atoms N in the cavity")
    omega0: float = Field(default=0.0, description="Central optical frequency (rad/s)")

    @classmethod
    def from_rates(
        cls,
        gamma_c: float,
        pump_rate: float,
        kappa: float,
        n_atoms: int,
        omega0: float = 0.0,
    ) -> "LaserParams":
        """Build parameters from the stimulated emission decay constant."""
        if gamma_c <= 0:
            raise ValueError("gamma_c must be positive")
        return cls(
            g=math.sqrt(gamma_c * kappa / 4.0),
            kappa=kappa,
            pump_rate=pump_rate,
            n_atoms=n_atoms,
            omega0=omega0,
        )

    @property
    def gamma_c(self) -> float:
        """Stimulated emission decay constant 4 g^2 / kappa."""
        return 4.0 * self.g**2 / self.kappa

    @property
    def eta(self) -> float:
        """Polarization decay constant gamma_c + r_a."""
        return self.gamma_c + self.pump_rate

    @property
    def coupling_lambda(self) -> float:
        """Collective coupling g / sqrt(N) (positive branch)."""
        return self.g / math.sqrt(self.n_atoms)


class SimConfig(BaseModel):
    """Settings for a Langevin ensemble run."""

    model_config = ConfigDict(frozen=True)

    dt: float = Field(gt=0, description="Integration step")
    t_end: float = Field(gt=0, description="Trajectory length")
    burn_in: float = Field(default=0.0, ge=0, description="Discarded initial window")
    n_traj: int = Field(default=1, ge=1, description="Ensemble size")
    seed: int = Field(default=0, ge=0, description="Base RNG seed")
    mode: Literal["full", "adiabatic"] = "adiabatic"
    m_update: Literal["euler", "exact_ou"] = "exact_ou"
    record_stride: int = Field(default=1, ge=1, description="Keep every k-th step")
    sample_budget: float = Field(
        default=2e8, gt=0, description="Upper bound on n_traj * t_end / dt"
    )
    workers: int = Field(default=1, ge=1, description="Worker processes for shards")
    shard_size: int = Field(default=64, ge=1, description="Trajectories per shard")

    @model_validator(mode="after")
    def validate_window(self) -> "SimConfig":
        if self.burn_in >= self.t_end:
            raise ValueError(
                f"burn_in ({self.burn_in}) must be shorter than t_end ({self.t_end})"
            )
        return self

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_end / self.dt - 1e-9))

    @property
    def requested_samples(self) -> float:
        return self.n_traj * self.t_end / self.dt

    def validate_for(self, params: LaserParams, stationary: bool = False) -> list[str]:
        """Check the parameter-dependent guards. Returns list of errors."""
        errors = []
        fastest = max(params.kappa, params.eta)
        if self.m_update == "euler" and self.dt * fastest > 0.1:
            errors.append(
                f"dt*max(kappa, eta) = {self.dt * fastest:.4g} exceeds 0.1 in euler mode"
            )
        if stationary:
            needed = 5.0 / min(params.kappa, params.eta)
            if self.burn_in < needed:
                errors.append(
                    f"burn_in ({self.burn_in:.4g}) must be >= 5/min(kappa, eta) = {needed:.4g}"
                )
        return errors


class RunConfig(BaseModel):
    """Flat configuration file schema shared by every CLI command.

    Unset time scales are resolved from the laser rates.
    """

    model_config = ConfigDict(extra="forbid")

    # Laser model
    g: float = Field(gt=0)
    kappa: float = Field(gt=0)
    pump_rate: float = Field(ge=0)
    n_atoms: int = Field(ge=1)
    omega0: float = 0.0
    tol_rel: float = Field(default=1e-6, gt=0, lt=1)
    eps_wat: float = Field(default=0.01, gt=0, lt=1)

    # Langevin simulation
    dt: Optional[float] = Field(default=None, gt=0)
    t_end: Optional[float] = Field(default=None, gt=0)
    burn_in: Optional[float] = Field(default=None, ge=0)
    n_traj: int = Field(default=200, ge=1)
    seed: int = Field(default=12345, ge=0)
    mode: Literal["full", "adiabatic"] = "adiabatic"
    m_update: Literal["euler", "exact_ou"] = "exact_ou"
    record_stride: int = Field(default=1, ge=1)
    sample_budget: float = Field(default=2e8, gt=0)
    workers: int = Field(default=1, ge=1)
    shard_size: int = Field(default=64, ge=1)

    # Estimators
    max_lag: Optional[float] = Field(default=None, gt=0)
    n_lags: int = Field(default=60, ge=2)
    omega_min: Optional[float] = None
    omega_max: Optional[float] = None
    omega_points: int = Field(default=201, ge=2)

    # Band fraction
    lambdas: List[float] = Field(default_factory=lambda: [0.5, 1.0, 2.0])

    # Populations
    n_a0: float = Field(default=0.0, ge=0)
    pop_t_end: Optional[float] = Field(default=None, gt=0)
    pop_dt_max: Optional[float] = Field(default=None, gt=0)
    jump_t_end: Optional[float] = Field(default=None, gt=0)
    jump_seed: Optional[int] = Field(default=None, ge=0)

    @model_validator(mode="after")
    def validate_lambdas(self) -> "RunConfig":
        negative = [lam for lam in self.lambdas if lam < 0]
        if negative:
            raise ValueError(f"lambdas must be >= 0, got {negative}")
        return self

    @model_validator(mode="after")
    def validate_initial_population(self) -> "RunConfig":
        if self.n_a0 > self.n_atoms:
            raise ValueError(f"n_a0 ({self.n_a0}) cannot exceed n_atoms ({self.n_atoms})")
        return self

    @model_validator(mode="after")
    def validate_omega_range(self) -> "RunConfig":
        if (
            self.omega_min is not None
            and self.omega_max is not None
            and self.omega_min >= self.omega_max
        ):
            raise ValueError("omega_min must be smaller than omega_max")
        return self

    def to_params(self) -> LaserParams:
        return LaserParams(
            g=self.g,
            kappa=self.kappa,
            pump_rate=self.pump_rate,
            n_atoms=self.n_atoms,
            omega0=self.omega0,
        )

    def to_sim_config(self) -> SimConfig:
        """Resolve time scales and build the simulation settings."""
        params = self.to_params()
        slow = min(params.kappa, params.eta)
        if self.mode == "full" or self.m_update == "euler":
            default_dt = 0.1 / max(params.kappa, params.eta)
        else:
            default_dt = 0.05 / params.eta
        t_end = self.t_end if self.t_end is not None else 50.0 / params.eta + 5.0 / slow
        return SimConfig(
            dt=self.dt if self.dt is not None else default_dt,
            t_end=t_end,
            burn_in=self.burn_in if self.burn_in is not None else 5.0 / slow,
            n_traj=self.n_traj,
            seed=self.seed,
            mode=self.mode,
            m_update=self.m_update,
            record_stride=self.record_stride,
            sample_budget=self.sample_budget,
            workers=self.workers,
            shard_size=self.shard_size,
        )

    def resolved_max_lag(self, sim: SimConfig) -> float:
        """Lag window: long enough for the correlation to decay, short enough for the run."""
        params = self.to_params()
        limit = (sim.t_end - sim.burn_in) / 2.0
        if self.max_lag is not None:
            return self.max_lag
        return min(12.0 / min(params.kappa, params.eta), limit)

    def omega_grid(self) -> list[float]:
        params = self.to_params()
        half = 5.0 * max(params.kappa, params.eta)
        lo = self.omega_min if self.omega_min is not None else -half
        hi = self.omega_max if self.omega_max is not None else half
        step = (hi - lo) / (self.omega_points - 1)
        return [lo + i * step for i in range(self.omega_points)]

    def population_times(self) -> tuple[float, float, float]:
        """(ODE t_end, ODE dt_max, jump t_end)."""
        eta = self.to_params().eta
        pop_t_end = self.pop_t_end if self.pop_t_end is not None else 10.0 / eta
        pop_dt_max = self.pop_dt_max if self.pop_dt_max is not None else pop_t_end / 200.0
        jump_t_end = self.jump_t_end if self.jump_t_end is not None else 2000.0 / eta
        return pop_t_end, pop_dt_max, jump_t_end
