"""Streaming moment and lag-product accumulators for field ensembles.

Recorded samples are folded in time order, block by block, so a run never
holds more than one block of its trajectories. Stationary-window sums are
kept per trajectory (with per-batch partial sums for batch-means errors),
which makes merging shards a concatenation in trajectory order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..models.state import Ensemble, stationary_start

SINGLE_KEYS = ("b", "abs_b2", "abs_b4", "abs_m2", "plus2", "minus2")


def lag_key(lag: int) -> str:
    return f"lag:{lag}"


@dataclass(frozen=True)
class MomentPlan:
    """Recorded grid, stationary window, batch length and lags of a run.

    Sample i sits at t0 + i * sample_dt; the window starts at sample
    ``start``. Lags are in recorded samples.
    """

    t0: float
    sample_dt: float
    n_samples: int
    t_last: float
    burn_in: float
    start: int
    batch_size: int
    lag_steps: tuple[int, ...] = ()

    @classmethod
    def build(
        cls,
        t: np.ndarray,
        burn_in: float,
        batch_size: int,
        lag_steps: Sequence[int] = (),
    ) -> "MomentPlan":
        if len(t) < 2:
            raise ValueError("need at least two recorded samples")
        start = stationary_start(t, burn_in)
        if start >= len(t):
            raise ValueError(f"empty stationary window: burn_in {burn_in} >= t_end")
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        plan = cls(
            t0=float(t[0]),
            sample_dt=float(t[1] - t[0]),
            n_samples=len(t),
            t_last=float(t[-1]),
            burn_in=burn_in,
            start=start,
            batch_size=batch_size,
            lag_steps=tuple(sorted({int(k) for k in lag_steps})),
        )
        if plan.lag_steps and plan.lag_steps[-1] >= plan.n_time:
            raise ValueError("lags must be shorter than the stationary window")
        return plan

    @property
    def n_time(self) -> int:
        """Samples in the stationary window."""
        return self.n_samples - self.start

    def layout(self, lag: int = 0) -> tuple[int, int, int]:
        """(origins per trajectory, batch length, batches per trajectory).

        A window shorter than one batch is used whole.
        """
        count = self.n_time - lag
        if count <= 0:
            raise ValueError(f"lag {lag} leaves no origins in the stationary window")
        if count < self.batch_size:
            return count, count, 1
        return count, self.batch_size, count // self.batch_size

    def keys(self) -> list[str]:
        return list(SINGLE_KEYS) + [lag_key(k) for k in self.lag_steps]


@dataclass
class StreamingMoments:
    """Running sums of one shard (or a merged ensemble) of trajectories.

    Per-time arrays hold ensemble sums of m, b, |m|^2 and |b|^2 at every
    recorded sample. ``totals``, ``squares`` and ``batches`` map each
    stationary observable to per-trajectory sums of x, |x|^2 and per-batch
    sums of x.
    """

    plan: MomentPlan
    seeds: list[int]
    sum_m: np.ndarray
    sum_b: np.ndarray
    sum_abs_m2: np.ndarray
    sum_abs_b2: np.ndarray
    totals: dict[str, np.ndarray]
    squares: dict[str, np.ndarray]
    batches: dict[str, np.ndarray]
    _tail: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def empty(cls, plan: MomentPlan, seeds: Sequence[int]) -> "StreamingMoments":
        n_traj = len(seeds)
        totals, squares, batches = {}, {}, {}
        for key, lag in zip(plan.keys(), [0] * len(SINGLE_KEYS) + list(plan.lag_steps)):
            totals[key] = np.zeros(n_traj, dtype=complex)
            squares[key] = np.zeros(n_traj)
            batches[key] = np.zeros((n_traj, plan.layout(lag)[2]), dtype=complex)
        return cls(
            plan=plan,
            seeds=list(seeds),
            sum_m=np.zeros(plan.n_samples, dtype=complex),
            sum_b=np.zeros(plan.n_samples, dtype=complex),
            sum_abs_m2=np.zeros(plan.n_samples),
            sum_abs_b2=np.zeros(plan.n_samples),
            totals=totals,
            squares=squares,
            batches=batches,
        )

    @classmethod
    def from_ensemble(cls, ensemble: Ensemble, plan: MomentPlan) -> "StreamingMoments":
        if ensemble.m.shape[1] != plan.n_samples:
            raise ValueError("ensemble grid does not match the accumulation plan")
        moments = cls.empty(plan, ensemble.seeds or list(range(ensemble.n_traj)))
        moments.update(0, ensemble.m.astype(complex), ensemble.b.astype(complex))
        return moments

    @property
    def n_traj(self) -> int:
        return len(self.seeds)

    @property
    def t(self) -> np.ndarray:
        return self.plan.t0 + self.plan.sample_dt * np.arange(self.plan.n_samples)

    def update(self, index0: int, m: np.ndarray, b: np.ndarray) -> None:
        """Fold recorded samples index0 .. index0 + width - 1 of every trajectory.

        Blocks must arrive in time order without gaps.
        """
        width = m.shape[1]
        grid = slice(index0, index0 + width)
        self.sum_m[grid] += m.sum(axis=0)
        self.sum_b[grid] += b.sum(axis=0)
        self.sum_abs_m2[grid] += (np.abs(m) ** 2).sum(axis=0)
        self.sum_abs_b2[grid] += (np.abs(b) ** 2).sum(axis=0)

        skip = max(0, self.plan.start - index0)
        if skip >= width:
            return
        m = m[:, skip:]
        b = b[:, skip:]
        pos0 = index0 + skip - self.plan.start

        abs_b2 = np.abs(b) ** 2
        plus = 2.0 * b.real
        minus = 2.0 * b.imag
        singles = (
            ("b", b),
            ("abs_b2", abs_b2),
            ("abs_b4", abs_b2**2),
            ("abs_m2", np.abs(m) ** 2),
            ("plus2", plus**2),
            ("minus2", minus**2),
        )
        for key, values in singles:
            self._fold(key, 0, values, pos0)

        # each pair is counted with the block holding its later sample
        history = b if self._tail is None else np.concatenate([self._tail, b], axis=1)
        hist0 = pos0 + b.shape[1] - history.shape[1]
        stop = pos0 + b.shape[1]
        for lag in self.plan.lag_steps:
            first = max(pos0, lag)
            if first >= stop:
                continue
            origins = history[:, first - lag - hist0 : stop - lag - hist0]
            partners = b[:, first - pos0 :]
            self._fold(lag_key(lag), lag, np.conj(origins) * partners, first - lag)

        keep = self.plan.lag_steps[-1] if self.plan.lag_steps else 0
        self._tail = history[:, max(0, history.shape[1] - keep) :] if keep else None

    def _fold(self, key: str, lag: int, values: np.ndarray, pos0: int) -> None:
        _, batch, n_batches = self.plan.layout(lag)
        width = values.shape[1]
        self.totals[key] += values.sum(axis=1)
        self.squares[key] += (np.abs(values) ** 2).sum(axis=1)
        last = min((pos0 + width - 1) // batch, n_batches - 1)
        for j in range(pos0 // batch, last + 1):
            lo = max(j * batch - pos0, 0)
            hi = min((j + 1) * batch - pos0, width)
            self.batches[key][:, j] += values[:, lo:hi].sum(axis=1)

    @classmethod
    def merge(cls, parts: Sequence["StreamingMoments"]) -> "StreamingMoments":
        """Join shard accumulators in the given (trajectory) order."""
        if not parts:
            raise ValueError("no shards to merge")
        plan = parts[0].plan
        if any(part.plan != plan for part in parts):
            raise ValueError("shards were accumulated with different plans")

        def total(name: str) -> np.ndarray:
            out = getattr(parts[0], name).copy()
            for part in parts[1:]:
                out += getattr(part, name)
            return out

        def joined(name: str) -> dict[str, np.ndarray]:
            return {
                key: np.concatenate([getattr(part, name)[key] for part in parts], axis=0)
                for key in plan.keys()
            }

        return cls(
            plan=plan,
            seeds=[seed for part in parts for seed in part.seeds],
            sum_m=total("sum_m"),
            sum_b=total("sum_b"),
            sum_abs_m2=total("sum_abs_m2"),
            sum_abs_b2=total("sum_abs_b2"),
            totals=joined("totals"),
            squares=joined("squares"),
            batches=joined("batches"),
        )

    def time_mean_z(self, which: str) -> np.ndarray:
        """|ensemble mean| / standard error of m or b at every recorded time.

        Samples with no spread across trajectories give 0 when their mean
        vanishes and inf otherwise.
        """
        if which not in ("m", "b"):
            raise ValueError("which must be 'm' or 'b'")
        n = self.n_traj
        if n < 2:
            raise ValueError("need at least two trajectories")
        first = self.sum_m if which == "m" else self.sum_b
        second = self.sum_abs_m2 if which == "m" else self.sum_abs_b2
        mean = np.abs(first) / n
        var = np.maximum(second - n * mean**2, 0.0) / (n - 1)
        se = np.sqrt(var / n)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(se > 0, mean / se, np.where(mean > 0, np.inf, 0.0))
        return z
