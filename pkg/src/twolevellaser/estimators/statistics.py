"""Batch-means error bars for correlated time series."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np


class BatchMeans(NamedTuple):
    mean: complex
    se: float
    n_batches: int
    n_eff: float


def pooled_batch_means(
    totals: np.ndarray,
    squares: np.ndarray,
    count: int,
    batch_sums: np.ndarray,
    batch_size: int,
) -> BatchMeans:
    """Batch-means statistics from per-trajectory running sums.

    ``totals`` and ``squares`` hold each trajectory's sum of x and |x|^2
    over ``count`` samples; ``batch_sums`` has one row per trajectory and
    one column per full batch of ``batch_size`` samples.
    """
    if count < 1:
        raise ValueError("empty stationary window")
    means = (np.asarray(batch_sums) / batch_size).ravel()
    n_batches = means.size
    if n_batches < 2:
        raise ValueError("need at least two batches for an error estimate")

    n_total = len(totals) * count
    mean = complex(np.sum(totals) / n_total)
    spread = np.abs(means - means.mean()) ** 2
    se = math.sqrt(float(spread.sum()) / (n_batches - 1) / n_batches)

    sample_var = max(float(np.sum(squares)) / n_total - abs(mean) ** 2, 0.0)
    n_eff = sample_var / se**2 if se > 0 else float(n_total)
    return BatchMeans(mean=mean, se=se, n_batches=n_batches, n_eff=max(1.0, n_eff))


def batch_means(samples: np.ndarray, batch_size: int) -> BatchMeans:
    """Mean and standard error of an ensemble of time series.

    ``samples`` has shape (n_traj, n_time). Each row is cut into
    non-overlapping batches of ``batch_size`` samples; batches from every
    trajectory are pooled. When a row is shorter than one batch, whole
    trajectories serve as batches. Works for real and complex samples.
    """
    samples = np.atleast_2d(np.asarray(samples))
    n_traj, n_time = samples.shape
    if n_time == 0:
        raise ValueError("empty stationary window")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")

    per_row = n_time // batch_size
    if per_row == 0:
        per_row, batch_size = 1, n_time
    used = samples[:, : per_row * batch_size].reshape(n_traj, per_row, batch_size)
    return pooled_batch_means(
        samples.sum(axis=1),
        (np.abs(samples) ** 2).sum(axis=1),
        n_time,
        used.sum(axis=2),
        batch_size,
    )
