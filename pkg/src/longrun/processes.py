"""Seeded simulators for the concrete processes used to exercise the laws.

Every simulator returns a :class:`SimPath` whose ForecastSeries carries the
model's exact one-step conditional moments. Seeds may be integers or
:class:`numpy.random.SeedSequence` objects (the latter is what
:func:`longrun.ensemble.ensemble_map` hands out).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

from .ensemble import ensemble_map, make_rng, open_uniforms, std_normals
from .errors import DomainError, ValidationError
from .series import ForecastSeries, forecast_series_to_csv

NELSON_CAP = 1e300
GARCH_VARIANTS = ("standard", "scaled_normal", "extra_multiplier")


@dataclass(frozen=True)
class SimPath:
    """A simulated ForecastSeries plus auxiliary model series and metadata."""

    fs: ForecastSeries
    aux: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.fs)

    def to_csv(self, path=None) -> str:
        return forecast_series_to_csv(self.fs, path, self.aux)


def _check_n(n: int) -> int:
    if int(n) != n or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n}")
    return int(n)


def _schedule(values, n: int, name: str) -> np.ndarray:
    """Expand a schedule to length ``n``; shorter schedules are cycled."""
    arr = np.atleast_1d(np.asarray(values, dtype=float))
    if arr.size == 0:
        raise ValidationError(f"{name} schedule is empty")
    if arr.size < n:
        arr = np.resize(arr, n)
    return arr[:n]


# -- GARCH(1,1) ------------------------------------------------------------


@dataclass(frozen=True)
class Garch11Params:
    """GARCH(1,1) with optional shock scaling.

    ``variant`` is one of:

    * ``standard``: ``eps_t = sigma_t z_t``;
    * ``scaled_normal``: ``eps_t = sigma_t nu_t z_t`` with a deterministic
      ``nu_schedule`` (cycled if shorter than the path);
    * ``extra_multiplier``: ``eps_t = sigma_t w_t z_t`` with ``w_t`` IID
      uniform on ``[mult_low, mult_high]``, so ``E[w^2] <= L_w = mult_high^2``.

    ``|beta| < 1`` is the well-behaved regime but is not enforced.
    """

    omega: float = 0.05
    alpha: float = 0.05
    beta: float = 0.9
    sigma0: float = 1.0
    variant: str = "standard"
    nu_schedule: tuple[float, ...] = (1.0,)
    mult_low: float = 0.5
    mult_high: float = 1.5

    def __post_init__(self):
        if not self.omega > 0:
            raise DomainError("omega must be positive")
        if not self.alpha >= 0:
            raise DomainError("alpha must be nonnegative")
        if not self.sigma0 > 0:
            raise DomainError("sigma0 must be positive")
        if not math.isfinite(self.beta):
            raise DomainError("beta must be finite")
        if self.variant not in GARCH_VARIANTS:
            raise ValidationError(f"unknown GARCH variant {self.variant!r}")
        object.__setattr__(self, "nu_schedule", tuple(float(v) for v in np.atleast_1d(self.nu_schedule)))
        if any(v <= 0 for v in self.nu_schedule):
            raise DomainError("nu_schedule entries must be positive")
        if not (0 <= self.mult_low <= self.mult_high) or self.mult_high <= 0:
            raise DomainError("need 0 <= mult_low <= mult_high and mult_high > 0")

    @property
    def multiplier_second_moment(self) -> float:
        lo, hi = self.mult_low, self.mult_high
        return (lo * lo + lo * hi + hi * hi) / 3.0

    @property
    def stationary_variance(self) -> float:
        """``omega / (1 - alpha - beta)`` for the standard variant."""
        return self.omega / (1.0 - self.alpha - self.beta)


def _garch_draws(p: Garch11Params, n: int, seed) -> tuple[np.ndarray, np.ndarray]:
    """Per-path innovations: standardized shocks ``u`` and their conditional
    second moment ``k`` (so ``eps = sigma * u`` and ``cond_var = sigma^2 k``)."""
    rng = make_rng(seed)
    z = std_normals(rng, n)
    if p.variant == "standard":
        return z, np.ones(n)
    if p.variant == "scaled_normal":
        nu = _schedule(p.nu_schedule, n, "nu")
        return nu * z, nu * nu
    w = p.mult_low + (p.mult_high - p.mult_low) * open_uniforms(rng, n)
    return w * z, np.full(n, p.multiplier_second_moment)


def _garch_kernel(p: Garch11Params, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Run the variance recursion on a paths-by-time array of standardized shocks."""
    n_paths, n = u.shape
    sig2 = np.empty((n_paths, n))
    eps = np.empty((n_paths, n))
    prev_s2 = np.full(n_paths, p.sigma0**2)
    prev_eps = np.zeros(n_paths)
    for t in range(n):
        s2 = p.omega + p.beta * prev_s2 + p.alpha * prev_eps * prev_eps
        e = np.sqrt(s2) * u[:, t]
        sig2[:, t] = s2
        eps[:, t] = e
        prev_s2, prev_eps = s2, e
    return sig2, eps


def _garch_path(p: Garch11Params, sig2: np.ndarray, eps: np.ndarray, k: np.ndarray) -> SimPath:
    fs = ForecastSeries(realized=eps, predicted=np.zeros_like(eps), cond_var=sig2 * k)
    return SimPath(fs, {"sigma2": sig2, "eps": eps.copy()}, {"model": "garch11", "variant": p.variant})


def sim_garch11(p: Garch11Params, n: int, seed) -> SimPath:
    """Simulate ``eps_t`` with ``sigma_t^2 = omega + beta sigma_{t-1}^2 + alpha eps_{t-1}^2``.

    The recursion starts from ``sigma_0`` and ``eps_0 = 0``; ``predicted`` is
    zero and ``cond_var`` is the variant-adjusted conditional variance.
    """
    n = _check_n(n)
    u, k = _garch_draws(p, n, seed)
    sig2, eps = _garch_kernel(p, u[None, :])
    return _garch_path(p, sig2[0], eps[0], k)


def garch11_ensemble(
    p: Garch11Params, n: int, n_paths: int, master_seed: int, threads: int = 1
) -> list[SimPath]:
    """Many GARCH paths, identical to per-path :func:`sim_garch11` calls.

    Draws are made per path from derived seeds; the recursion is then run on
    all paths at once.
    """
    n = _check_n(n)
    draws = ensemble_map(lambda i, s: _garch_draws(p, n, s), n_paths, master_seed, threads)
    u = np.vstack([d[0] for d in draws])
    sig2, eps = _garch_kernel(p, u)
    return [_garch_path(p, sig2[i], eps[i], draws[i][1]) for i in range(n_paths)]


# -- counterexamples -------------------------------------------------------


def sim_nelson(n: int, seed) -> SimPath:
    """Explosive-in-mean volatility: ``sigma_t^2 = 3 sigma_{t-1}^2 z_{t-1}^2``.

    ``sigma_0 = 1`` and ``z_0`` is the first draw from the seed. The variance
    is clamped at ``1e300``; the first clamped index (1-based) is reported in
    ``meta['truncated_at']`` rather than raised.
    """
    n = _check_n(n)
    z = std_normals(make_rng(seed), n + 1)
    log_s2 = np.cumsum(math.log(3.0) + np.log(z[:-1] ** 2))
    cap = math.log(NELSON_CAP)
    over = np.flatnonzero(log_s2 > cap)
    truncated_at = int(over[0]) + 1 if over.size else None
    sig2 = np.where(log_s2 > cap, NELSON_CAP, np.exp(np.minimum(log_s2, cap)))
    eps = np.sqrt(sig2) * z[1:]
    fs = ForecastSeries(realized=eps, predicted=np.zeros(n), cond_var=sig2)
    return SimPath(fs, {"sigma2": sig2}, {"model": "nelson", "truncated_at": truncated_at})


def sim_divergent(n: int, seed) -> SimPath:
    """``Y_t = t zeta_t`` with IID standard normal ``zeta``; shocks of growing variance."""
    n = _check_n(n)
    t = np.arange(1, n + 1, dtype=float)
    y = t * std_normals(make_rng(seed), n)
    fs = ForecastSeries(realized=y, predicted=np.zeros(n), cond_var=t * t)
    return SimPath(fs, {}, {"model": "divergent"})


# -- Rademacher market -----------------------------------------------------


@dataclass(frozen=True)
class RademacherMarketParams:
    """``R_t = R_{t-1} + eps_t + alpha_t`` with ``eps`` a +-1 coin.

    Under ``physical`` the coin is fair; under ``martingale`` it lands +1
    with probability ``(1 - alpha_t)/2``, which makes ``R`` a martingale.
    """

    alpha_schedule: tuple[float, ...]
    measure: str = "physical"

    def __post_init__(self):
        sched = tuple(float(a) for a in np.atleast_1d(self.alpha_schedule))
        if not sched:
            raise ValidationError("alpha_schedule is empty")
        bad = [i for i, a in enumerate(sched) if not (0.0 < a < 1.0)]
        if bad:
            raise DomainError(f"alpha_t must lie in (0,1); index {bad[0]} is {sched[bad[0]]}")
        if self.measure not in ("physical", "martingale"):
            raise ValidationError(f"measure must be physical or martingale, got {self.measure!r}")
        object.__setattr__(self, "alpha_schedule", sched)

    def alphas(self, n: int) -> np.ndarray:
        return _schedule(self.alpha_schedule, n, "alpha")


def constant_schedule(alpha: float, n: int) -> tuple[float, ...]:
    return (float(alpha),) * n


def convergent_schedule(n: int) -> tuple[float, ...]:
    """``alpha_t = 1 - 1/(t+1)^2``: the partial sums of ``1 - alpha_t^2`` converge."""
    t = np.arange(1, n + 1, dtype=float)
    return tuple(1.0 - 1.0 / (t + 1.0) ** 2)


def q_variance_partial_sums(alphas) -> np.ndarray:
    """``sum_{j<=t} (1 - alpha_j^2)``: ``Var^Q(R_t)`` and the equivalence series."""
    a = np.asarray(alphas, dtype=float)
    return np.cumsum(1.0 - a * a)


def sim_rademacher(p: RademacherMarketParams, n: int, seed) -> SimPath:
    n = _check_n(n)
    a = p.alphas(n)
    u = open_uniforms(make_rng(seed), n)
    if p.measure == "physical":
        eps = np.where(u < 0.5, 1.0, -1.0)
    else:
        eps = np.where(u < (1.0 - a) / 2.0, 1.0, -1.0)
    r = np.cumsum(eps + a)
    r_prev = np.concatenate(([0.0], r[:-1]))
    if p.measure == "physical":
        fs = ForecastSeries(realized=r, predicted=r_prev + a, cond_var=np.ones(n))
    else:
        fs = ForecastSeries(realized=r, predicted=r_prev, cond_var=1.0 - a * a)
    sums = q_variance_partial_sums(a)
    aux = {"eps": eps, "alpha": a, "var_q": sums, "kakutani": sums.copy()}
    return SimPath(fs, aux, {"model": "rademacher", "measure": p.measure})


ENUMERATION_MAX_T = 20


def enumerate_rademacher_variance(alphas: Sequence[float]) -> float:
    """``Var^Q(R_t)`` by summing over all ``2^t`` coin sequences exactly.

    Brute-force oracle, limited to ``t <= 20``.
    """
    a = np.asarray(alphas, dtype=float)
    t = a.size
    if t < 1 or t > ENUMERATION_MAX_T:
        raise ValidationError(f"enumeration needs 1 <= t <= {ENUMERATION_MAX_T}, got {t}")
    codes = np.arange(2**t, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(t)) & 1  # 1 means eps = +1
    eps = 2.0 * bits - 1.0
    prob = np.prod(np.where(bits == 1, (1.0 - a) / 2.0, (1.0 + a) / 2.0), axis=1)
    r = eps.sum(axis=1) + a.sum()
    mean = math.fsum((prob * r).tolist())
    return math.fsum((prob * (r - mean) ** 2).tolist())


# -- lognormal and AR(1)-log martingales -----------------------------------


def sim_lognormal_martingale(a_drift: float, sigma: float, n: int, seed) -> SimPath:
    """IID factors ``X_t = exp(a + sigma zeta_t)``.

    ``predicted = exp(a + sigma^2/2)``, ``predicted_log = a``; ``aux['log_level']``
    holds the cumulative log product.
    """
    n = _check_n(n)
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    logx = a_drift + sigma * std_normals(make_rng(seed), n)
    mean = math.exp(a_drift + 0.5 * sigma * sigma)
    fs = ForecastSeries(
        realized=np.exp(logx),
        predicted=np.full(n, mean),
        predicted_log=np.full(n, float(a_drift)),
        cond_var=np.full(n, math.expm1(sigma * sigma) * mean * mean),
    )
    return SimPath(fs, {"log_level": np.cumsum(logx)}, {"model": "lognormal", "a": a_drift, "sigma": sigma})


def sim_unit_mean_lognormal(sigma: float, n: int, seed) -> SimPath:
    """Lognormal factors normalized to unit conditional mean (``a = -sigma^2/2``)."""
    path = sim_lognormal_martingale(-0.5 * sigma * sigma, sigma, n, seed)
    fs = path.fs
    fixed = ForecastSeries(fs.realized, np.ones(n), fs.predicted_log, fs.cond_var)
    return SimPath(fixed, path.aux, path.meta)


def sim_ar1_log(beta_c: float, rho: float, n: int, seed) -> SimPath:
    """``log M_t = log beta + rho log M_{t-1} + e_t`` with ``e_t ~ N(0,1)``, ``M_0 = 1``.

    ``predicted`` is ``exp(log beta + rho log M_{t-1} + 1/2)``.
    """
    n = _check_n(n)
    if not (0.0 < rho < 1.0):
        raise DomainError(f"rho must lie in (0,1), got {rho}")
    if not beta_c > 0:
        raise DomainError("beta_c must be positive")
    lb = math.log(beta_c)
    e = std_normals(make_rng(seed), n)
    log_m = lfilter([1.0], [1.0, -rho], lb + e)
    lag = np.concatenate(([0.0], log_m[:-1]))
    cond_log = lb + rho * lag
    fs = ForecastSeries(
        realized=np.exp(log_m),
        predicted=np.exp(cond_log + 0.5),
        predicted_log=cond_log,
        cond_var=math.expm1(1.0) * np.exp(2.0 * cond_log + 1.0),
    )
    return SimPath(fs, {"log_level": log_m}, {"model": "ar1_log", "beta": beta_c, "rho": rho})


def simulate_ensemble(sim, n_paths: int, master_seed: int, threads: int = 1) -> list[SimPath]:
    """Run ``sim(seed)`` on derived per-path seeds, in path order."""
    return ensemble_map(lambda i, s: sim(s), n_paths, master_seed, threads)
