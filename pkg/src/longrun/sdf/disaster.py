"""Rare-disaster consumption model.

Log consumption growth is ``log g = eps + eta`` with ``eps ~ N(mu, sigma^2)``
and a compound-Poisson jump ``eta | J ~ N(J theta, J nu^2)``,
``J ~ Poisson(omega)``. The SDF is ``m = beta g^(-gamma)``, IID over time,
so every conditional moment is a constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import poisson

from ..ensemble import make_rng, open_uniforms, std_normals
from ..errors import ConvergenceError, DomainError, NumericalError
from ..processes import SimPath, _check_n
from ..series import ForecastSeries
from ..stats import Estimate, fmean
from .common import check_s, cm_key

MONTHLY_RF = 0.02 / 12


@dataclass(frozen=True)
class DisasterParams:
    beta: float
    gamma: float
    mu: float
    sigma: float
    omega: float
    theta: float
    nu: float

    def __post_init__(self):
        if not (0.0 < self.beta <= 1.0):
            raise DomainError("beta must lie in (0, 1]")
        if not self.gamma > 0:
            raise DomainError("gamma must be positive")
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")
        if not self.omega >= 0:
            raise DomainError("omega must be nonnegative")
        if not self.nu >= 0:
            raise DomainError("nu must be nonnegative")
        for name in ("mu", "theta"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")

    @classmethod
    def with_short_rate(cls, rf: float = MONTHLY_RF, **kw) -> "DisasterParams":
        """Parameters with ``mu`` chosen so that ``-log E[m] = rf``."""
        probe = cls(mu=0.0, **kw)
        # log E[m] is affine in mu with slope -gamma
        mu = (math.log(probe.beta) + _jump_gauss_cumulant(probe, 1.0) + rf) / probe.gamma
        return replace(probe, mu=mu)

    @classmethod
    def figure2(cls) -> "DisasterParams":
        """Calibration used in the model comparison (monthly; ``r_f`` = 2% a year)."""
        return cls.with_short_rate(
            MONTHLY_RF, beta=0.99, gamma=4.0, sigma=0.02, omega=0.017, theta=-0.38, nu=0.23
        )


def _jump_gauss_cumulant(p: DisasterParams, s: float) -> float:
    """Part of ``log E[m^s]`` that does not involve ``beta`` or ``mu``."""
    gs = p.gamma * s
    jump = p.omega * math.expm1(-gs * p.theta + 0.5 * (gs * p.nu) ** 2)
    return 0.5 * (gs * p.sigma) ** 2 + jump


def _exp(x: float, what: str) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        raise NumericalError(f"{what} overflows (log value {x:.4g})") from None


def disaster_log_moment(p: DisasterParams, s: float) -> float:
    """``log E[m^s]``."""
    return s * (math.log(p.beta) - p.gamma * p.mu) + _jump_gauss_cumulant(p, s)


def disaster_conditional_moment(p: DisasterParams, s: float) -> float:
    """``E_{t-1}[m_t^s]`` (state independent)."""
    check_s(s, exclude_one=False)
    return _exp(disaster_log_moment(p, s), f"E[m^{s}]")


def disaster_growth_moment(p: DisasterParams, k: float) -> float:
    """``E[g^k]`` for consumption growth ``g``."""
    jump = p.omega * math.expm1(k * p.theta + 0.5 * (k * p.nu) ** 2)
    return _exp(k * p.mu + 0.5 * (k * p.sigma) ** 2 + jump, f"E[g^{k}]")


def disaster_short_rate(p: DisasterParams) -> float:
    """Constant continuously compounded one-period rate ``-log E[m]``."""
    return -disaster_log_moment(p, 1.0)


def disaster_mean_log_sdf(p: DisasterParams) -> float:
    """``E[log m] = log beta - gamma (mu + omega theta)``."""
    return math.log(p.beta) - p.gamma * (p.mu + p.omega * p.theta)


def disaster_pi(p: DisasterParams, s: float) -> float:
    """``pi(m; s) = E[m^s]^(1/(1-s))``."""
    s = check_s(s)
    return _exp(disaster_log_moment(p, s) / (1.0 - s), f"pi(m; {s})")


def disaster_entropy(p: DisasterParams) -> float:
    """Long-term entropy ``log E[m] - E[log m]``.

    Equals ``gamma^2 sigma^2/2 + omega (exp(-gamma theta + gamma^2 nu^2/2) - 1)
    + gamma omega theta``.
    """
    g = p.gamma
    return 0.5 * (g * p.sigma) ** 2 + p.omega * math.expm1(-g * p.theta + 0.5 * (g * p.nu) ** 2) + g * p.omega * p.theta


# -- simulation ------------------------------------------------------------


def _draw_log_growth(p: DisasterParams, n: int, seed) -> np.ndarray:
    rng = make_rng(seed)
    jumps = poisson.ppf(open_uniforms(rng, n), p.omega) if p.omega > 0 else np.zeros(n)
    z_eps = std_normals(rng, n)
    z_eta = std_normals(rng, n)
    return p.mu + p.sigma * z_eps + jumps * p.theta + np.sqrt(jumps) * p.nu * z_eta


def sim_disaster_sdf(p: DisasterParams, n: int, seed, s_grid=()) -> SimPath:
    """IID SDF path with exact conditional mean, log-mean and ``E[m^s]`` columns."""
    n = _check_n(n)
    log_g = _draw_log_growth(p, n, seed)
    log_m = math.log(p.beta) - p.gamma * log_g
    mean = disaster_conditional_moment(p, 1.0)
    second = disaster_conditional_moment(p, 2.0)
    fs = ForecastSeries(
        realized=np.exp(log_m),
        predicted=np.full(n, mean),
        predicted_log=np.full(n, disaster_mean_log_sdf(p)),
        cond_var=np.full(n, max(second - mean * mean, 0.0)),
    )
    aux = {"log_g": log_g}
    for s in s_grid:
        aux[cm_key(s)] = np.full(n, disaster_conditional_moment(p, s))
    return SimPath(fs, aux, {"model": "disaster"})


def sim_disaster_market(p: DisasterParams, n: int, seed, leverage: float = 3.0) -> dict:
    """SDF together with three priced returns on the same draws.

    * ``equity``: a levered consumption claim ``g^leverage / E[m g^leverage]``;
    * ``riskfree``: ``1 / E[m]``;
    * ``growth_optimal``: ``1 / m``.

    Each return's conditional moments ``E[R^k]`` are available through
    :func:`disaster_return_moment`.
    """
    path = sim_disaster_sdf(p, n, seed)
    m = path.fs.realized
    log_g = path.aux["log_g"]
    price = p.beta * disaster_growth_moment(p, leverage - p.gamma)
    return {
        "sdf": path,
        "equity": np.exp(leverage * log_g) / price,
        "riskfree": np.full(n, 1.0 / disaster_conditional_moment(p, 1.0)),
        "growth_optimal": 1.0 / m,
        "leverage": leverage,
    }


def disaster_return_moment(p: DisasterParams, kind: str, k: float, leverage: float = 3.0) -> float:
    """``E_{t-1}[R_t^k]`` for the returns produced by :func:`sim_disaster_market`."""
    if kind == "riskfree":
        return disaster_conditional_moment(p, 1.0) ** (-k)
    if kind == "growth_optimal":
        return disaster_conditional_moment(p, -k) if k != 0 else 1.0
    if kind == "equity":
        price = p.beta * disaster_growth_moment(p, leverage - p.gamma)
        return disaster_growth_moment(p, k * leverage) / price**k
    raise DomainError(f"unknown return kind {kind!r}")


# -- Monte Carlo oracles ---------------------------------------------------


def disaster_moment_plain_mc(p: DisasterParams, s: float, n_draws: int, seed) -> Estimate:
    """Sample average of ``m^s`` over IID draws. Unreliable when ``E[m^(2s)]`` is huge."""
    log_g = _draw_log_growth(p, n_draws, seed)
    x = np.exp(s * (math.log(p.beta) - p.gamma * log_g))
    m = fmean(x)
    return Estimate(m, float(np.std(x, ddof=1)) / math.sqrt(n_draws), n_draws)


def disaster_moment_mc(
    p: DisasterParams, s: float, n_draws: int, seed, rel_tail: float = 1e-10, max_strata: int = 60
) -> Estimate:
    """Stratified importance-sampling estimate of ``E[m^s]``.

    The jump count is stratified with Poisson weights. Within stratum ``j``,
    ``log g ~ N(mu + j theta, sigma^2 + j nu^2)`` is sampled from a normal
    shifted halfway toward the exponentially tilted law and reweighted by the
    likelihood ratio. Strata are added until the next one's weighted
    contribution, from a pilot run, is below ``rel_tail`` of the total. The
    estimator never uses the closed-form jump sum.
    """
    s = check_s(s, exclude_one=False)
    rng = make_rng(seed)
    c = -p.gamma * s
    n_strata = 1
    if p.omega > 0:
        # pilot pass decides how many strata matter
        pilot_rng = make_rng(np.random.SeedSequence([int(rng.integers(0, 2**63)), 1]))
        contrib = []
        for j in range(max_strata):
            est, _ = _stratum_is(p, c, j, 2000, pilot_rng)
            contrib.append(poisson.pmf(j, p.omega) * est)
            total = math.fsum(contrib)
            if j >= 1 and contrib[-1] < rel_tail * total:
                break
        else:
            raise ConvergenceError("jump strata did not become negligible")
        n_strata = len(contrib)
    per = max(n_draws // n_strata, 2)
    means, variances = [], []
    for j in range(n_strata):
        est, var = _stratum_is(p, c, j, per, rng)
        w = poisson.pmf(j, p.omega) if p.omega > 0 else 1.0
        means.append(w * est)
        variances.append(w * w * var / per)
    scale = p.beta**s
    return Estimate(scale * math.fsum(means), scale * math.sqrt(math.fsum(variances)), per * n_strata)


def _stratum_is(p: DisasterParams, c: float, j: int, n: int, rng) -> tuple[float, float]:
    mean = p.mu + j * p.theta
    var = p.sigma**2 + j * p.nu**2
    sd = math.sqrt(var)
    shift = 0.5 * c * var
    z = std_normals(rng, n)
    x = mean + shift + sd * z
    # log of N(mean, var) / N(mean + shift, var) at x
    log_lr = -(shift * (x - mean) - 0.5 * shift * shift) / var
    vals = np.exp(c * x + log_lr)
    return fmean(vals), float(np.var(vals, ddof=1))
