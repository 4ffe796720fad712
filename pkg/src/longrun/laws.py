"""Long-run law estimators and convergence-rate fits.

Each estimator returns a :class:`LawPath`: the running statistic at every
``n`` together with dyadic checkpoints used by :func:`fit_rate`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .ensemble import ensemble_norm
from .errors import DegenerateFitError, DomainError, ValidationError
from .series import EntropyPath, ForecastSeries, ShockSeries

MIN_CHECKPOINT_EXP = 4


def dyadic_checkpoints(length: int, start_exp: int = MIN_CHECKPOINT_EXP) -> np.ndarray:
    """Powers of two ``2^start_exp, 2^(start_exp+1), ...`` not exceeding ``length``."""
    pts = []
    k = start_exp
    while 2**k <= length:
        pts.append(2**k)
        k += 1
    return np.array(pts, dtype=np.int64)


@dataclass(frozen=True)
class LawPath:
    """A running statistic ``values[n-1]`` for ``n = 1..N`` with probe checkpoints."""

    values: np.ndarray
    checkpoints: np.ndarray | None = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        if self.checkpoints is None:
            cps = dyadic_checkpoints(values.size)
        else:
            cps = np.array(self.checkpoints, dtype=np.int64).ravel()
            if cps.size and (np.any(np.diff(cps) <= 0) or cps[0] < 1 or cps[-1] > values.size):
                raise ValidationError("checkpoints must increase strictly within 1..len(values)")
        cps.flags.writeable = False
        object.__setattr__(self, "checkpoints", cps)

    def __len__(self) -> int:
        return self.values.size

    def at(self, n: int) -> float:
        """Value of the statistic at (1-based) index ``n``."""
        return float(self.values[n - 1])

    @property
    def terminal(self) -> float:
        return float(self.values[-1])

    def to_csv(self) -> str:
        lines = ["n,value"]
        lines.extend(f"{i},{float(v)!r}" for i, v in enumerate(self.values, start=1))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RateFit:
    """Least-squares fit ``log|stat_n| = intercept + slope * log n``."""

    slope: float
    intercept: float
    r_squared: float
    checkpoints: tuple[int, ...] = ()

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "r_squared": self.r_squared,
            "checkpoints": list(self.checkpoints),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def additive_average(s: ShockSeries) -> LawPath:
    """``U_n = (1/n) sum_{t<=n} shock_t``."""
    x = s.values
    n = np.arange(1, x.size + 1, dtype=float)
    return LawPath(np.cumsum(x) / n)


def weighted_average(s: ShockSeries, a: float) -> LawPath:
    """``(1/n) sum_{t<=n} a^(n-t) shock_t`` for ``0 < a <= 1``."""
    if not (0.0 < a <= 1.0):
        raise DomainError(f"decay a must lie in (0, 1], got {a}")
    if a == 1.0:
        return additive_average(s)
    x = s.values
    n = np.arange(1, x.size + 1, dtype=float)
    # S_n = a S_{n-1} + x_n
    return LawPath(lfilter([1.0], [1.0, -a], x) / n)


def _check_square_summable(c: np.ndarray) -> None:
    # Tail test: over the last decade of indices c_k^2 must fall faster than 1/k.
    n = c.size
    if n < 100:
        return
    k = np.arange(n // 10, n + 1)
    slope = np.polyfit(np.log(k), 2.0 * np.log(c[k - 1]), 1)[0]
    if slope >= -1.0:
        raise ValidationError(
            f"c does not look square-summable: tail log-log slope of c^2 is {slope:.3f} (need < -1)"
        )


def kronecker_sum(s: ShockSeries, b, c) -> LawPath:
    """Generalized weighted sum ``(1/b_n) sum_{k<=n} b_k c_k shock_k``.

    ``b`` must be positive and strictly increasing, ``c`` positive,
    nonincreasing and numerically square-summable.
    """
    x = s.values
    b = np.asarray(b, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    if b.size != x.size or c.size != x.size:
        raise ValidationError("b and c must match the shock series length")
    if np.any(~np.isfinite(b)) or np.any(~np.isfinite(c)):
        raise ValidationError("b and c must be finite")
    if np.any(b <= 0) or np.any(c <= 0):
        raise DomainError("b and c must be positive")
    bad = np.flatnonzero(np.diff(b) <= 0)
    if bad.size:
        raise ValidationError(f"b is not increasing at index {int(bad[0]) + 1}")
    bad = np.flatnonzero(np.diff(c) > 0)
    if bad.size:
        raise ValidationError(f"c is not decreasing at index {int(bad[0]) + 1}")
    _check_square_summable(c)
    return LawPath(np.cumsum(b * c * x) / b)


def multiplicative_average(fs: ForecastSeries) -> LawPath:
    """``V_n = exp((1/n) sum log(Y_t / E_{t-1}[Y_t]))``, accumulated in log space."""
    y, p = fs.realized, fs.predicted
    bad = np.flatnonzero((y <= 0) | (p <= 0))
    if bad.size:
        raise DomainError(f"multiplicative_average needs positive entries; index {int(bad[0])}")
    n = np.arange(1, y.size + 1, dtype=float)
    return LawPath(np.exp(np.cumsum(np.log(y) - np.log(p)) / n))


def entropy_running_mean(ep: EntropyPath) -> LawPath:
    """Running estimate of the long-term entropy ``z_inf``."""
    j = ep.j_values
    return LawPath(np.cumsum(j) / np.arange(1, j.size + 1, dtype=float))


def martingale_drift_rate(y) -> LawPath:
    """``y_n / n``; for a submartingale its liminf is nonnegative."""
    y = np.asarray(y, dtype=float).ravel()
    if y.size == 0:
        raise ValidationError("empty sequence")
    if np.any(~np.isfinite(y)):
        raise ValidationError("y must be finite")
    return LawPath(y / np.arange(1, y.size + 1, dtype=float))


def _fit_loglog(n: np.ndarray, v: np.ndarray) -> RateFit:
    mag = np.abs(v)
    keep = mag > 0
    n, mag = n[keep], mag[keep]
    if n.size < 4:
        raise DegenerateFitError(f"need at least 4 nonzero checkpoints, got {n.size}")
    lx, ly = np.log(n.astype(float)), np.log(mag)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (intercept + slope * lx)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - float(np.sum(resid**2)) / ss_tot
    return RateFit(float(slope), float(intercept), min(max(r2, 0.0), 1.0), tuple(int(k) for k in n))


def fit_rate(path: LawPath) -> RateFit:
    """Slope of ``log|values|`` against ``log n`` at the path's checkpoints."""
    cps = path.checkpoints
    return _fit_loglog(cps, path.values[cps - 1])


def ensemble_law(values: np.ndarray, p: float = 2.0, checkpoints=None) -> LawPath:
    """Collapse a paths-by-time array of law statistics to its ``L^p`` norm path."""
    return LawPath(ensemble_norm(values, p), checkpoints)


def fit_rate_ensemble(values: np.ndarray, p: float = 2.0, checkpoints=None) -> RateFit:
    """Rate fit on the ensemble ``L^p`` norm of a paths-by-time array."""
    return fit_rate(ensemble_law(values, p, checkpoints))
