"""Monte Carlo summary statistics with compensated summation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo mean with its standard error."""

    mean: float
    se: float
    n: int

    def zscore(self, target: float) -> float:
        if self.se == 0.0:
            return 0.0 if self.mean == target else math.copysign(math.inf, self.mean - target)
        return (self.mean - target) / self.se

    def within(self, target: float, k: float) -> bool:
        return abs(self.mean - target) <= k * self.se

    def as_dict(self) -> dict:
        return {"mean": self.mean, "se": self.se, "n": self.n}


def fmean(x) -> float:
    """Mean with ``math.fsum`` so 10^6-term averages do not drift."""
    x = np.asarray(x, dtype=float).ravel()
    return math.fsum(x.tolist()) / x.size


def mean_se(x) -> Estimate:
    """IID sample mean and standard error."""
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    if n < 2:
        raise ValueError("need at least two samples")
    m = fmean(x)
    var = math.fsum(((x - m) ** 2).tolist()) / (n - 1)
    return Estimate(m, math.sqrt(var / n), n)


def batch_means_se(x, n_batches: int = 50) -> Estimate:
    """Mean of a serially correlated series with a batch-means standard error.

    The series is cut into ``n_batches`` contiguous batches; the standard
    error is that of the batch averages. Batches must be much longer than
    the autocorrelation time of ``x``.
    """
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    size = n // n_batches
    if size < 2:
        raise ValueError("series too short for the requested number of batches")
    used = x[: size * n_batches].reshape(n_batches, size)
    batch = np.array([fmean(row) for row in used])
    est = mean_se(batch)
    return Estimate(fmean(x), est.se, n)

