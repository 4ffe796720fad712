"""Long-run-risk model with stochastic volatility (Epstein-Zin preferences).

Dynamics (monthly)::

    g_{t+1}       = mu + x_t + sigma_t eta_{t+1}
    x_{t+1}       = rho x_t + phi_e sigma_t e_{t+1}
    sigma^2_{t+1} = sigma^2 + nu1 (sigma_t^2 - sigma^2) + sigma_w w_{t+1}

The log SDF is ``theta log delta - (theta/psi) g + (theta - 1) r_c`` with the
log-linearized consumption-claim return ``r_c = kappa0 + kappa1 z' - z + g``
and price-consumption ratio ``z = A0 + A1 x + A2 sigma^2``. Everything
below is affine in the state, so conditional moments of ``m^s`` are
exponential-affine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.signal import lfilter

from ..ensemble import make_rng, std_normals
from ..errors import ConvergenceError, DomainError
from ..processes import SimPath, _check_n
from ..series import ForecastSeries
from ..stats import Estimate, fmean
from .common import check_s, cm_key

VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class LrrParams:
    delta: float
    gamma: float
    psi: float
    mu: float
    rho: float
    phi_e: float
    sigma: float
    nu1: float
    sigma_w: float

    def __post_init__(self):
        if not (0.0 < self.delta < 1.0):
            raise DomainError("delta must lie in (0, 1)")
        if not abs(self.rho) < 1:
            raise DomainError("|rho| must be below 1")
        if not abs(self.nu1) < 1:
            raise DomainError("|nu1| must be below 1")
        if not self.sigma > 0:
            raise DomainError("sigma must be positive")
        if not self.psi > 0 or self.psi == 1.0:
            raise DomainError("psi must be positive and different from 1")
        if not self.gamma > 0:
            raise DomainError("gamma must be positive")
        if self.sigma_w < 0 or self.phi_e < 0:
            raise DomainError("phi_e and sigma_w must be nonnegative")

    @property
    def theta(self) -> float:
        return (1.0 - self.gamma) / (1.0 - 1.0 / self.psi)

    @classmethod
    def bansal_yaron(cls) -> "LrrParams":
        """Standard monthly calibration with ``phi_e = 0.044``."""
        return cls(
            delta=0.998, gamma=10.0, psi=1.5, mu=0.0015, rho=0.979,
            phi_e=0.044, sigma=0.0078, nu1=0.987, sigma_w=0.23e-5,
        )

    @classmethod
    def figure2(cls) -> "LrrParams":
        """The comparison calibration as listed, including ``phi_e = 0.44``."""
        return cls(
            delta=0.998, gamma=10.0, psi=1.5, mu=0.0015, rho=0.979,
            phi_e=0.44, sigma=0.0078, nu1=0.987, sigma_w=0.23e-5,
        )


@dataclass(frozen=True)
class LrrDerived:
    theta_pref: float
    kappa0: float
    kappa1: float
    a0: float
    a1: float
    a2: float
    residual: float
    iterations: int


@dataclass(frozen=True)
class MomentCoeffs:
    """``E_t[m^s] = exp(phi_s + alpha_s sigma_t^2 + beta_s x_t)``."""

    s: float
    phi_s: float
    alpha_s: float
    beta_s: float


def _loadings(p: LrrParams, zbar: float):
    s2 = p.sigma**2
    th = p.theta
    k1 = 1.0 / (1.0 + math.exp(-zbar))
    k0 = math.log1p(math.exp(zbar)) - k1 * zbar
    a1 = (1.0 - 1.0 / p.psi) / (1.0 - k1 * p.rho)
    a2 = 0.5 * ((th - th / p.psi) ** 2 + (th * k1 * a1 * p.phi_e) ** 2) / (th * (1.0 - k1 * p.nu1))
    a0 = (
        math.log(p.delta) + (1.0 - 1.0 / p.psi) * p.mu + k0
        + k1 * a2 * s2 * (1.0 - p.nu1) + 0.5 * th * (k1 * a2 * p.sigma_w) ** 2
    ) / (1.0 - k1)
    return k0, k1, a0, a1, a2, a0 + a2 * s2


def lrr_solve_constants(
    p: LrrParams, damping: float = 0.5, tol: float = 1e-12, max_iter: int = 10_000
) -> LrrDerived:
    """Solve the log-linearization fixed point by damped iteration from ``zbar = 0``.

    ``kappa1 = e^zbar/(1+e^zbar)``, ``kappa0 = log(1+e^zbar) - kappa1 zbar`` and
    ``zbar = A0 + A2 sigma^2``. When the map is too steep at its fixed point
    for damped iteration to settle, the root of ``F(zbar) - zbar`` is
    bracketed on a grid and refined with Brent's method; ``iterations`` then
    counts the damped steps spent before the fallback. Raises
    :class:`ConvergenceError` when no fixed point exists (the
    price-consumption ratio is infinite).
    """
    zbar = 0.0
    converged = False
    for it in range(1, max_iter + 1):
        try:
            new = _loadings(p, zbar)[5]
        except OverflowError:
            break
        if not math.isfinite(new):
            break
        if abs(new - zbar) < tol:
            zbar, converged = new, True
            break
        zbar = (1.0 - damping) * zbar + damping * new
    if not converged:
        zbar = _bracketed_fixed_point(p)
    k0, k1, a0, a1, a2, new = _loadings(p, zbar)
    return LrrDerived(p.theta, k0, k1, a0, a1, a2, abs(new - zbar), it)


def _bracketed_fixed_point(p: LrrParams) -> float:
    def gap(z: float) -> float:
        return _loadings(p, z)[5] - z

    grid = np.linspace(-10.0, 40.0, 1001)
    values = []
    for z in grid:
        try:
            values.append(gap(float(z)))
        except (OverflowError, ZeroDivisionError):
            values.append(math.nan)
    v = np.array(values)
    cross = np.flatnonzero((v[:-1] > 0) & (v[1:] <= 0))
    if not cross.size:
        raise ConvergenceError("log-linearization has no fixed point for these parameters")
    i = int(cross[0])
    return float(brentq(gap, grid[i], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))


@dataclass(frozen=True)
class _LogSdf:
    """``log m' = c0 + cx x + cs sigma^2 + shock``, shock variance ``vs sigma^2 + vc``."""

    c0: float
    cx: float
    cs: float
    vs: float
    vc: float
    load_eta: float
    load_e: float
    load_w: float


def _log_sdf(p: LrrParams, d: LrrDerived) -> _LogSdf:
    th, k0, k1 = d.theta_pref, d.kappa0, d.kappa1
    a_g = th - th / p.psi - 1.0
    b = th - 1.0
    s2 = p.sigma**2
    c0 = th * math.log(p.delta) + a_g * p.mu + b * (k0 + k1 * d.a0 + k1 * d.a2 * s2 * (1.0 - p.nu1) - d.a0)
    cx = a_g + b * (k1 * d.a1 * p.rho - d.a1)
    cs = b * (k1 * d.a2 * p.nu1 - d.a2)
    load_e = b * k1 * d.a1 * p.phi_e
    load_w = b * k1 * d.a2 * p.sigma_w
    return _LogSdf(c0, cx, cs, a_g**2 + load_e**2, load_w**2, a_g, load_e, load_w)


def lrr_moment_coeffs(p: LrrParams, d: LrrDerived, s: float) -> MomentCoeffs:
    """Complete the square over the three Gaussian shocks in ``s log m``."""
    s = check_s(s, exclude_one=False)
    L = _log_sdf(p, d)
    return MomentCoeffs(s, s * L.c0 + 0.5 * s * s * L.vc, s * L.cs + 0.5 * s * s * L.vs, s * L.cx)


def lrr_log_cond_moment(p: LrrParams, d: LrrDerived, s: float, x, sigma2):
    c = lrr_moment_coeffs(p, d, s)
    return c.phi_s + c.alpha_s * np.asarray(sigma2) + c.beta_s * np.asarray(x)


def lrr_pi(p: LrrParams, d: LrrDerived, s: float) -> float:
    """Closed-form ``pi(m; s)`` under the Gaussian stationary law of ``(x, sigma^2)``."""
    s = check_s(s)
    c = lrr_moment_coeffs(p, d, s)
    one = 1.0 - s
    s2 = p.sigma**2
    expo = (
        c.phi_s / one
        + c.alpha_s * s2 / one
        + c.alpha_s**2 * p.sigma_w**2 / (2.0 * one**2 * (1.0 - p.nu1**2))
        + c.beta_s**2 * p.phi_e**2 * s2 / (2.0 * one**2 * (1.0 - p.rho**2))
    )
    return math.exp(expo)


def lrr_entropy(p: LrrParams, d: LrrDerived) -> float:
    """Unconditional mean of ``J_t(m_{t+1}) = (vs sigma_t^2 + vc)/2``."""
    L = _log_sdf(p, d)
    return 0.5 * (L.vs * p.sigma**2 + L.vc)


def lrr_mean_short_rate(p: LrrParams, d: LrrDerived) -> float:
    """Mean of ``r_{f,t} = -log E_t[m_{t+1}]`` (monthly, continuously compounded)."""
    c = lrr_moment_coeffs(p, d, 1.0)
    return -(c.phi_s + c.alpha_s * p.sigma**2)


# -- simulation ------------------------------------------------------------


def _variance_path(p: LrrParams, w: np.ndarray) -> tuple[np.ndarray, np.ndarray, int]:
    """Raw next-period variances and the floored state path.

    ``raw[t]`` is ``sigma^2_{t+1}`` before flooring; ``state[t]`` is the
    floored value used as the state from which period ``t+2`` is drawn.
    """
    n = w.size
    s2 = p.sigma**2
    drive = s2 * (1.0 - p.nu1) + p.sigma_w * w
    raw = np.empty(n)
    state = np.empty(n)
    start, prev, clamps = 0, s2, 0
    while start < n:
        seg = lfilter([1.0], [1.0, -p.nu1], drive[start:], zi=[p.nu1 * prev])[0]
        low = np.flatnonzero(seg < VARIANCE_FLOOR)
        stop = start + (int(low[0]) + 1 if low.size else seg.size)
        raw[start:stop] = seg[: stop - start]
        state[start:stop] = seg[: stop - start]
        if low.size:
            state[stop - 1] = VARIANCE_FLOOR
            clamps += 1
        prev = state[stop - 1]
        start = stop
    return raw, state, clamps


def sim_lrr_sdf(p: LrrParams, n: int, seed, s_grid=(), d: LrrDerived | None = None) -> SimPath:
    """Simulate ``m_t`` from the stationary-mean state ``x_0 = 0, sigma_0^2 = sigma^2``.

    Conditional fields at ``t`` come from the (floored) state at ``t-1``. The
    SDF uses the unfloored next variance; the number of floor hits is in
    ``meta['variance_clamps']``.
    """
    n = _check_n(n)
    d = d or lrr_solve_constants(p)
    L = _log_sdf(p, d)
    rng = make_rng(seed)
    eta = std_normals(rng, n)
    e = std_normals(rng, n)
    w = std_normals(rng, n)

    raw_next, state_next, clamps = _variance_path(p, w)
    s2_prev = np.concatenate(([p.sigma**2], state_next[:-1]))
    sd_prev = np.sqrt(s2_prev)
    x_next = lfilter([1.0], [1.0, -p.rho], p.phi_e * sd_prev * e)
    x_prev = np.concatenate(([0.0], x_next[:-1]))

    th, k0, k1 = d.theta_pref, d.kappa0, d.kappa1
    g = p.mu + x_prev + sd_prev * eta
    z_prev = d.a0 + d.a1 * x_prev + d.a2 * s2_prev
    z_next = d.a0 + d.a1 * x_next + d.a2 * raw_next
    r_c = k0 + k1 * z_next - z_prev + g
    log_m = th * math.log(p.delta) - th / p.psi * g + (th - 1.0) * r_c

    cond_log = L.c0 + L.cx * x_prev + L.cs * s2_prev
    log_mean = lrr_log_cond_moment(p, d, 1.0, x_prev, s2_prev)
    log_second = lrr_log_cond_moment(p, d, 2.0, x_prev, s2_prev)
    fs = ForecastSeries(
        realized=np.exp(log_m),
        predicted=np.exp(log_mean),
        predicted_log=cond_log,
        cond_var=np.exp(log_second) * -np.expm1(2.0 * log_mean - log_second),
    )
    aux = {"g": g, "x": x_prev, "sigma2": s2_prev, "rf": -log_mean, "r_c": r_c}
    for s in s_grid:
        aux[cm_key(s)] = np.exp(lrr_log_cond_moment(p, d, s, x_prev, s2_prev))
    return SimPath(fs, aux, {"model": "lrr", "variance_clamps": clamps})


# -- conditional Monte Carlo oracles ---------------------------------------


def _one_step(p: LrrParams, d: LrrDerived, x: float, sigma2: float, n_draws: int, seed):
    rng = make_rng(seed)
    eta = std_normals(rng, n_draws)
    e = std_normals(rng, n_draws)
    w = std_normals(rng, n_draws)
    sd = math.sqrt(sigma2)
    g = p.mu + x + sd * eta
    x1 = p.rho * x + p.phi_e * sd * e
    s1 = p.sigma**2 + p.nu1 * (sigma2 - p.sigma**2) + p.sigma_w * w
    z0 = d.a0 + d.a1 * x + d.a2 * sigma2
    z1 = d.a0 + d.a1 * x1 + d.a2 * s1
    r_c = d.kappa0 + d.kappa1 * z1 - z0 + g
    th = d.theta_pref
    log_m = th * math.log(p.delta) - th / p.psi * g + (th - 1.0) * r_c
    return log_m, r_c


def lrr_euler_mc(p: LrrParams, d: LrrDerived, x: float, sigma2: float, n_draws: int, seed) -> Estimate:
    """Monte Carlo ``E_t[m_{t+1} R_{c,t+1}]`` at state ``(x, sigma2)``; should be 1."""
    log_m, r_c = _one_step(p, d, x, sigma2, n_draws, seed)
    v = np.exp(log_m + r_c)
    return Estimate(fmean(v), float(np.std(v, ddof=1)) / math.sqrt(n_draws), n_draws)


def lrr_moment_mc(p: LrrParams, d: LrrDerived, s: float, x: float, sigma2: float, n_draws: int, seed) -> Estimate:
    """Monte Carlo ``E_t[m_{t+1}^s]`` at state ``(x, sigma2)``."""
    log_m, _ = _one_step(p, d, x, sigma2, n_draws, seed)
    v = np.exp(s * log_m)
    return Estimate(fmean(v), float(np.std(v, ddof=1)) / math.sqrt(n_draws), n_draws)


def lrr_stationary_states(p: LrrParams, k: int, seed) -> list[tuple[float, float]]:
    """``k`` states drawn from the Gaussian stationary law of ``(x, sigma^2)``."""
    rng = make_rng(seed)
    zx = std_normals(rng, k)
    zs = std_normals(rng, k)
    sx = p.phi_e * p.sigma / math.sqrt(1.0 - p.rho**2)
    ss = p.sigma_w / math.sqrt(1.0 - p.nu1**2)
    return [(float(sx * a), float(max(p.sigma**2 + ss * b, VARIANCE_FLOOR))) for a, b in zip(zx, zs)]
