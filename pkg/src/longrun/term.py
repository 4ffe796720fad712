"""Discount curves, long yields, horizon entropy and the permanent/temporary SDF split."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .errors import DomainError, PreconditionError, ValidationError
from .laws import LawPath


@dataclass(frozen=True)
class DiscountCurve:
    """Zero-coupon prices ``D(t, s)`` for integer dates ``t`` and maturities ``s > t``.

    Prices above 1 (negative rates) and prices increasing in maturity are
    accepted but listed in :attr:`flags`.
    """

    grid: Mapping[tuple[int, int], float]
    max_maturity: int = 0
    flags: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        grid = {}
        for (t, s), price in dict(self.grid).items():
            t, s, price = int(t), int(s), float(price)
            if s <= t:
                raise ValidationError(f"maturity must exceed date; got t={t}, s={s}")
            if not (math.isfinite(price) and price > 0):
                raise DomainError(f"D({t},{s}) must be positive and finite")
            grid[(t, s)] = price
        if not grid:
            raise ValidationError("empty discount curve")
        n_max = max(s - t for t, s in grid)
        flags = []
        above = sorted(k for k, v in grid.items() if v > 1.0)
        if above:
            flags.append(f"{len(above)} price(s) above 1, first at D{above[0]}")
        by_date: dict[int, list[int]] = {}
        for t, s in grid:
            by_date.setdefault(t, []).append(s)
        for t in sorted(by_date):
            prices = [grid[(t, s)] for s in sorted(by_date[t])]
            if any(b > a for a, b in zip(prices, prices[1:])):
                flags.append(f"prices increase with maturity at t={t}")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "_by_date", {t: sorted(s - t for s in ss) for t, ss in by_date.items()})
        object.__setattr__(self, "max_maturity", int(self.max_maturity) or n_max)
        object.__setattr__(self, "flags", tuple(flags))

    def price(self, t: int, s: int) -> float:
        if s == t:
            return 1.0
        try:
            return self.grid[(t, s)]
        except KeyError:
            raise PreconditionError(f"curve has no price D({t},{s})") from None

    def dates(self) -> list[int]:
        return sorted(self._by_date)

    def horizons(self, t: int) -> list[int]:
        return list(self._by_date.get(t, []))

    @classmethod
    def flat(cls, rate: float, dates, max_maturity: int) -> "DiscountCurve":
        """Constant continuously compounded rate: ``D(t, s) = exp(-rate (s - t))``."""
        grid = {(t, t + h): math.exp(-rate * h) for t in dates for h in range(1, max_maturity + 1)}
        return cls(grid, max_maturity)

    @classmethod
    def from_rows(cls, t, s, price) -> "DiscountCurve":
        return cls({(int(a), int(b)): float(c) for a, b, c in zip(t, s, price)})

    def to_csv(self, path=None) -> str:
        lines = ["t,s,price"]
        for (t, s) in sorted(self.grid):
            lines.append(f"{t},{s},{self.grid[(t, s)]!r}")
        text = "\n".join(lines) + "\n"
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


def read_discount_curve(source) -> DiscountCurve:
    """Parse a ``t,s,price`` CSV."""
    text = Path(source).read_text(encoding="utf-8") if isinstance(source, (str, Path)) else source.read()
    reader = csv.reader(io.StringIO(text))
    header = [h.strip() for h in next(reader, [])]
    if header != ["t", "s", "price"]:
        raise ValidationError(f"expected header t,s,price; got {','.join(header)}")
    grid = {}
    for lineno, row in enumerate(reader, start=2):
        if not row or not any(c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ValidationError(f"line {lineno}: expected 3 fields")
        try:
            t, s, p = int(row[0]), int(row[1]), float(row[2])
        except ValueError:
            raise ValidationError(f"line {lineno}: cannot parse {row!r}") from None
        if (t, s) in grid:
            raise ValidationError(f"line {lineno}: duplicate entry D({t},{s})")
        grid[(t, s)] = p
    return DiscountCurve(grid)


# -- yields ----------------------------------------------------------------


@dataclass(frozen=True)
class YieldReport:
    """Yields ``y_t^s = -log D(t,s)/(s-t)`` with long-yield proxies per date."""

    yields: dict
    y_inf: dict
    convergence: dict
    z_long: dict
    rho: dict

    def to_dict(self) -> dict:
        return {
            "y_inf": {str(k): v for k, v in self.y_inf.items()},
            "convergence": {str(k): v for k, v in self.convergence.items()},
            "z_long": {str(k): v for k, v in self.z_long.items()},
            "rho": {str(k): v for k, v in self.rho.items()},
        }


def yields(curve: DiscountCurve) -> YieldReport:
    """Zero yields plus ``y_t^inf`` proxied by the longest quoted maturity.

    The convergence diagnostic is ``|y_t^{t+N} - y_t^{t+N/2}|``. The long
    zero-coupon rate is ``e^{y_inf} - 1`` and ``rho_t(M) = -y_t^inf``.
    """
    if curve.max_maturity < 4:
        raise PreconditionError(f"need maturities up to at least 4, got {curve.max_maturity}")
    ys = {(t, s): -math.log(p) / (s - t) for (t, s), p in curve.grid.items()}
    y_inf, conv, zl, rho = {}, {}, {}, {}
    for t in curve.dates():
        hs = curve.horizons(t)
        top = hs[-1]
        if top < 4:
            continue
        half = max(h for h in hs if h <= top // 2)
        y_inf[t] = ys[(t, t + top)]
        conv[t] = abs(ys[(t, t + top)] - ys[(t, t + half)])
        zl[t] = math.expm1(y_inf[t])
        rho[t] = -y_inf[t]
    if not y_inf:
        raise PreconditionError("no date has maturities up to 4")
    return YieldReport(ys, y_inf, conv, zl, rho)


def long_term_short_rate(rf) -> LawPath:
    """Running mean of the short rate; its terminal value estimates ``r_{f,inf}``."""
    r = np.asarray(rf, dtype=float).ravel()
    if r.size == 0 or np.any(~np.isfinite(r)):
        raise ValidationError("short-rate series must be finite and nonempty")
    return LawPath(np.cumsum(r) / np.arange(1, r.size + 1))


def sdf_avg_vs_bonds(m, d_short) -> LawPath:
    """Running mean of ``m_t - D(t-1, t)``."""
    m = np.asarray(m, dtype=float).ravel()
    d = np.asarray(d_short, dtype=float).ravel()
    if m.size != d.size or m.size == 0:
        raise ValidationError("m and d_short must align")
    return LawPath(np.cumsum(m - d) / np.arange(1, m.size + 1))


# -- horizon entropy -------------------------------------------------------


@dataclass(frozen=True)
class BczMeasures:
    """Horizon entropies ``I_t(n)`` with Monte Carlo standard errors."""

    i_t_n: dict
    i_t_n_se: dict
    i_t_inf: dict
    i_t_inf_se: dict
    y_t_inf: dict
    n_paths: int
    method: str = "linear fit of I_t(n) on 1/n over the three largest horizons"

    def to_dict(self) -> dict:
        return {
            "i_t_n": [{"t": t, "n": n, "value": v, "se": self.i_t_n_se[(t, n)]} for (t, n), v in sorted(self.i_t_n.items())],
            "i_t_inf": {str(t): v for t, v in self.i_t_inf.items()},
            "i_t_inf_se": {str(t): v for t, v in self.i_t_inf_se.items()},
            "y_t_inf": {str(t): v for t, v in self.y_t_inf.items()},
            "n_paths": self.n_paths,
            "method": self.method,
        }


MIN_BCZ_PATHS = 1000

LogBond = Callable[[int, int, int], float]


def bcz_entropy(
    m_paths,
    horizons,
    dates=(0,),
    log_bond: LogBond | np.ndarray | None = None,
    log_predicted=None,
    min_paths: int = MIN_BCZ_PATHS,
) -> BczMeasures:
    """Monte Carlo ``I_t(n) = (1/n) E[log E_t[m_{t,t+n}] - log m_{t,t+n}]``.

    ``m_paths`` is paths-by-time; column ``k`` holds ``m_{k+1}`` (the SDF from
    ``k`` to ``k+1``). The inner conditional expectation, the bond price
    ``E_t[m_{t,t+n}] = D(t, t+n)``, comes from

    * ``log_bond(path, t, n)`` when given (analytic formula or sub-simulation);
    * otherwise ``log_predicted`` (paths-by-time ``log E_{k-1}[m_k]``) summed
      over the horizon, which is exact when conditional means are deterministic.

    ``I_t(inf)`` is the intercept of a least-squares line of ``I_t(n)`` on
    ``1/n`` through the three largest horizons, with a per-path standard error.
    """
    m = np.asarray(m_paths, dtype=float)
    if m.ndim != 2:
        raise ValidationError("m_paths must be 2-D (paths x time)")
    P, T = m.shape
    if P < min_paths:
        raise PreconditionError(f"need at least {min_paths} paths, got {P}")
    hs = sorted({int(h) for h in horizons})
    if not hs or hs[0] < 1:
        raise ValidationError("horizons must be positive integers")
    if len(hs) < 3:
        raise PreconditionError("need at least three horizons to extrapolate")
    if np.any(m <= 0):
        raise DomainError("SDF values must be positive")
    log_m = np.log(m)
    csum = np.concatenate((np.zeros((P, 1)), np.cumsum(log_m, axis=1)), axis=1)
    if log_bond is None:
        if log_predicted is None:
            raise PreconditionError("need log_bond or log_predicted for the inner expectation")
        lp = np.asarray(log_predicted, dtype=float)
        if lp.shape != m.shape:
            raise ValidationError("log_predicted must match m_paths")
        lp_sum = np.concatenate((np.zeros((P, 1)), np.cumsum(lp, axis=1)), axis=1)

    i_tn, i_se, i_inf, i_inf_se, y_inf = {}, {}, {}, {}, {}
    top = hs[-3:]
    x = np.array([1.0 / h for h in top])
    # intercept of the least-squares line is a fixed linear combination of the three values
    design = np.column_stack((np.ones(3), x))
    weights = np.linalg.pinv(design)[0]
    for t in dates:
        t = int(t)
        if t < 0 or t + hs[-1] > T:
            raise ValidationError(f"horizon {hs[-1]} from date {t} exceeds simulated length {T}")
        per_path = {}
        for n in hs:
            realized = csum[:, t + n] - csum[:, t]
            if log_bond is None:
                bond = lp_sum[:, t + n] - lp_sum[:, t]
            elif callable(log_bond):
                bond = np.array([log_bond(p, t, n) for p in range(P)], dtype=float)
            else:
                bond = np.asarray(log_bond, dtype=float)[:, t, n - 1]
            v = (bond - realized) / n
            per_path[n] = v
            i_tn[(t, n)] = float(np.mean(v))
            i_se[(t, n)] = float(np.std(v, ddof=1)) / math.sqrt(P)
            if n == hs[-1]:
                y_inf[t] = float(np.mean(-bond / n))
        combo = sum(w * per_path[h] for w, h in zip(weights, top))
        i_inf[t] = float(np.mean(combo))
        i_inf_se[t] = float(np.std(combo, ddof=1)) / math.sqrt(P)
    return BczMeasures(i_tn, i_se, i_inf, i_inf_se, y_inf, P)


@dataclass(frozen=True)
class BczResidual:
    residual: float
    se: float
    flagged: bool


def bcz_identity_check(measures: BczMeasures, z_est: float, rf_inf: float, z_se: float = 0.0, k: float = 2.0) -> dict:
    """Residual of ``I_t(inf) = z_inf(m) + r_{f,inf} - y_t^inf`` per date.

    A date is flagged when ``|residual|`` exceeds ``k`` combined standard errors.
    """
    out = {}
    for t, i_inf in measures.i_t_inf.items():
        res = i_inf - z_est - (rf_inf - measures.y_t_inf[t])
        se = math.hypot(measures.i_t_inf_se[t], z_se)
        out[t] = BczResidual(res, se, bool(abs(res) > k * se))
    return out


def i_inf_monotonicity(measures: BczMeasures, tol: float = 0.0) -> list[int]:
    """Dates at which ``I_t(inf)`` rises by more than ``tol`` (beyond Monte Carlo error)."""
    ts = sorted(measures.i_t_inf)
    bad = []
    for a, b in zip(ts, ts[1:]):
        se = math.hypot(measures.i_t_inf_se[a], measures.i_t_inf_se[b])
        if measures.i_t_inf[b] - measures.i_t_inf[a] > tol + 2.0 * se:
            bad.append(b)
    return bad


# -- permanent / temporary decomposition -----------------------------------


@dataclass(frozen=True)
class AjDecomposition:
    perm: np.ndarray
    temp: np.ndarray
    delta_est: float
    holding_returns: dict
    k_convergence: float
    rf_inf: float
    perm_growth: float
    growth_target: float | None
    z_perm: float | None

    def to_dict(self) -> dict:
        return {
            "delta_est": self.delta_est,
            "k_convergence": self.k_convergence,
            "rf_inf": self.rf_inf,
            "perm_growth": self.perm_growth,
            "growth_target": self.growth_target,
            "z_perm": self.z_perm,
        }


def holding_return(curve: DiscountCurve, t: int, k: int) -> float:
    """``R^f_{t,k} = D(t, t-1+k) / D(t-1, t-1+k)``: one-period return on a ``k``-period bond bought at ``t-1``."""
    return curve.price(t, t - 1 + k) / curve.price(t - 1, t - 1 + k)


def aj_decompose(m, curve: DiscountCurve, k_max: int, z_est: float | None = None) -> AjDecomposition:
    """Split ``m_t = m^P_t m^T_t`` with ``m^T_t = 1/R^f_{t,inf}``.

    ``m[i]`` is the SDF from date ``i`` to ``i+1``; the long bond's holding
    return uses maturity ``k_max`` as the infinite-maturity proxy, and
    ``k_convergence`` is the largest ``|log R_{k_max} - log R_{k_max/2}|``.
    With ``z_est`` supplied, the terminal growth ``(prod m^P)^(1/n)`` is
    compared with ``exp(-z + delta - r_{f,inf})`` and
    ``z_inf(M^P) = z - delta + r_{f,inf}`` is reported.
    """
    m = np.asarray(m, dtype=float).ravel()
    if m.size == 0 or np.any(m <= 0):
        raise DomainError("m must be positive and nonempty")
    if k_max < 2:
        raise ValidationError("k_max must be at least 2")
    n = m.size
    for t in range(n + 1):
        if (t, t + k_max) not in curve.grid:
            raise PreconditionError(f"curve must cover D({t},{t + k_max}) for k_max={k_max}")
    ks = sorted({1, max(1, k_max // 2), k_max})
    hr = {k: np.array([holding_return(curve, t, k) for t in range(1, n + 1)]) for k in ks}
    r_inf = hr[k_max]
    conv = float(np.max(np.abs(np.log(r_inf) - np.log(hr[max(1, k_max // 2)]))))
    perm = m * r_inf
    temp = 1.0 / r_inf
    delta = float(np.mean(np.log(r_inf)))
    rf_inf = float(np.mean([-math.log(curve.price(t, t + 1)) for t in range(n)]))
    growth = float(np.exp(np.mean(np.log(perm))))
    target = z_perm = None
    if z_est is not None:
        target = math.exp(-z_est + delta - rf_inf)
        z_perm = z_est - delta + rf_inf
    return AjDecomposition(perm, temp, delta, hr, conv, rf_inf, growth, target, z_perm)


def dir_monotonicity(y_inf_series, tol: float = 1e-8) -> list[int]:
    """1-based dates where the long yield falls by more than ``tol`` from the previous date."""
    y = np.asarray(y_inf_series, dtype=float).ravel()
    return [int(i) + 2 for i in np.flatnonzero(np.diff(y) < -tol)]
