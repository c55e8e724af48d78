"""State and trajectory containers for the population and field simulators."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

import numpy as np


def stationary_start(t: np.ndarray, burn_in: float) -> int:
    """Index of the first sample at or after burn_in."""
    return int(np.searchsorted(t, burn_in - 1e-12 * max(1.0, burn_in)))


@dataclass(frozen=True)
class PopulationState:
    """Atom counts in the upper (n_a) and lower (n_b) levels at time t."""

    n_a: float
    n_b: float
    t: float = 0.0

    @classmethod
    def from_upper(cls, n_a: float, n_atoms: int, t: float = 0.0) -> "PopulationState":
        return cls(n_a=n_a, n_b=n_atoms - n_a, t=t)

    def validate(self, n_atoms: int, integer: bool = False) -> list[str]:
        """Check conservation and bounds. Returns list of errors."""
        errors = []
        if not 0 <= self.n_a <= n_atoms:
            errors.append(f"n_a ({self.n_a}) outside [0, {n_atoms}]")
        if abs(self.n_a + self.n_b - n_atoms) > 1e-9 * n_atoms:
            errors.append(f"n_a + n_b ({self.n_a + self.n_b}) != N ({n_atoms})")
        if integer and (self.n_a != int(self.n_a) or self.n_b != int(self.n_b)):
            errors.append(f"jump process needs integer counts, got ({self.n_a}, {self.n_b})")
        return errors


@dataclass
class PopulationTrajectory:
    """Sampled population time series.

    For the jump process the samples are the event times and the counts
    hold until the next sample (piecewise constant).
    """

    t: np.ndarray
    n_a: np.ndarray
    n_b: np.ndarray
    kind: str = "ode"
    n_events: int = 0

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, index: int) -> PopulationState:
        return PopulationState(
            n_a=float(self.n_a[index]), n_b=float(self.n_b[index]), t=float(self.t[index])
        )

    def __iter__(self) -> Iterator[PopulationState]:
        for i in range(len(self)):
            yield self[i]

    @property
    def final(self) -> PopulationState:
        return self[len(self) - 1]


@dataclass(frozen=True)
class FieldState:
    """Complex amplitudes of the collective polarization m and cavity field b."""

    m: complex = 0j
    b: complex = 0j
    t: float = 0.0


@dataclass
class Ensemble:
    """Recorded field trajectories, rows indexed by trajectory.

    ``m`` and ``b`` have shape (n_traj, n_samples) and share the time grid ``t``.
    """

    t: np.ndarray
    m: np.ndarray
    b: np.ndarray
    mode: str = "adiabatic"
    seeds: list[int] = field(default_factory=list)

    @property
    def n_traj(self) -> int:
        return self.m.shape[0]

    @property
    def sample_dt(self) -> float:
        return float(self.t[1] - self.t[0]) if len(self.t) > 1 else 0.0

    def stationary_slice(self, burn_in: float) -> slice:
        return slice(stationary_start(self.t, burn_in), len(self.t))

    def state(self, trajectory: int, index: int) -> FieldState:
        return FieldState(
            m=complex(self.m[trajectory, index]),
            b=complex(self.b[trajectory, index]),
            t=float(self.t[index]),
        )

    @staticmethod
    def concatenate(shards: list["Ensemble"]) -> "Ensemble":
        """Join shards in the given order along the trajectory axis."""
        if not shards:
            raise ValueError("no shards to concatenate")
        return Ensemble(
            t=shards[0].t,
            m=np.concatenate([s.m for s in shards], axis=0),
            b=np.concatenate([s.b for s in shards], axis=0),
            mode=shards[0].mode,
            seeds=[seed for s in shards for seed in s.seeds],
        )

    def rows(self, trajectory: int = 0) -> Iterator[tuple[float, float, float, float, float]]:
        """(t, Re m, Im m, Re b, Im b) rows of one trajectory."""
        m = self.m[trajectory]
        b = self.b[trajectory]
        for i in range(len(self.t)):
            yield (
                float(self.t[i]),
                float(m[i].real),
                float(m[i].imag),
                float(b[i].real),
                float(b[i].imag),
            )


def population_rows(trajectory: PopulationTrajectory) -> Iterator[tuple[float, float, float]]:
    """(t, n_a, n_b) rows."""
    for state in trajectory:
        yield (state.t, state.n_a, state.n_b)

