"""Option chains and the model-free risk-neutral variance (SVIX) integral."""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import norm

from .errors import DomainError, PreconditionError, ValidationError

PARITY_WARN_FRACTION = 0.01


class ParityWarning(UserWarning):
    """Put-call parity residual above the reporting threshold."""


@dataclass(frozen=True)
class OptionChain:
    """One expiry: strikes with put and call prices (time-t, discounted)."""

    spot: float
    forward: float
    gross_rf: float
    strikes: np.ndarray
    put_prices: np.ndarray
    call_prices: np.ndarray

    def __post_init__(self):
        for name in ("spot", "forward", "gross_rf"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise DomainError(f"{name} must be positive and finite")
        k = np.array(self.strikes, dtype=float).ravel()
        p = np.array(self.put_prices, dtype=float).ravel()
        c = np.array(self.call_prices, dtype=float).ravel()
        if not (k.size == p.size == c.size):
            raise ValidationError("strikes, puts and calls must align")
        for name, arr in (("strikes", k), ("put_prices", p), ("call_prices", c)):
            bad = np.flatnonzero(~np.isfinite(arr))
            if bad.size:
                raise ValidationError(f"{name}: non-finite entry at index {int(bad[0])}")
        if np.any(k <= 0):
            raise DomainError("strikes must be positive")
        bad = np.flatnonzero(np.diff(k) <= 0)
        if bad.size:
            raise ValidationError(f"strikes must increase strictly; index {int(bad[0]) + 1}")
        if np.any(p < 0) or np.any(c < 0):
            raise DomainError("option prices must be nonnegative")
        for name, arr in (("strikes", k), ("put_prices", p), ("call_prices", c)):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def parity_residuals(self) -> np.ndarray:
        """``C - P - (F - K)/R_f`` per strike."""
        return self.call_prices - self.put_prices - (self.forward - self.strikes) / self.gross_rf


@dataclass(frozen=True)
class SvixResult:
    """``(1/R_f) Var^Q(R)`` with quadrature diagnostics."""

    value: float
    put_integral: float
    call_integral: float
    truncation_ratio: float
    parity_flags: tuple[int, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "svix_variance": self.value,
            "put_integral": self.put_integral,
            "call_integral": self.call_integral,
            "truncation_ratio": self.truncation_ratio,
            "parity_flags": list(self.parity_flags),
        }


def svix_variance(chain: OptionChain) -> SvixResult:
    """``(2/S^2) (int_{K_1}^F Put dK + int_F^{K_n} Call dK)`` by the trapezoid rule.

    Prices at the forward are linearly interpolated from the flanking
    strikes. Nothing is extrapolated beyond the quoted range;
    ``truncation_ratio`` is the integral mass of the two outermost panels
    relative to the total, a gauge of how much the tails may still matter.
    """
    k, p, c, f = chain.strikes, chain.put_prices, chain.call_prices, chain.forward
    below = int(np.sum(k < f))
    above = int(np.sum(k > f))
    if k.size < 8 or below < 3 or above < 3:
        raise PreconditionError(
            f"need >= 8 strikes with >= 3 on each side of the forward; got {k.size} ({below} below, {above} above)"
        )
    res = chain.parity_residuals()
    flags = tuple(int(i) for i in np.flatnonzero(np.abs(res) > PARITY_WARN_FRACTION * chain.spot))
    if flags:
        warnings.warn(
            f"put-call parity residual above {PARITY_WARN_FRACTION:.0%} of spot at {len(flags)} strike(s)",
            ParityWarning,
            stacklevel=2,
        )

    put_at_f = float(np.interp(f, k, p))
    call_at_f = float(np.interp(f, k, c))
    kp = np.append(k[k < f], f)
    vp = np.append(p[k < f], put_at_f)
    kc = np.insert(k[k > f], 0, f)
    vc = np.insert(c[k > f], 0, call_at_f)
    put_int = float(trapezoid(vp, kp))
    call_int = float(trapezoid(vc, kc))
    total = put_int + call_int
    edge = 0.5 * (vp[0] + vp[1]) * (kp[1] - kp[0]) + 0.5 * (vc[-1] + vc[-2]) * (kc[-1] - kc[-2])
    ratio = float(edge / total) if total > 0 else 0.0
    value = 2.0 / chain.spot**2 * total
    return SvixResult(value, put_int, call_int, ratio, flags)


def black_scholes_chain(
    spot: float = 100.0,
    gross_rf: float = 1.0,
    sigma: float = 0.2,
    n_strikes: int = 200,
    width_sd: float = 6.0,
) -> OptionChain:
    """Chain priced under a one-period lognormal risk-neutral law.

    Strikes are evenly spaced over ``F exp(+-width_sd sigma)``.
    """
    f = spot * gross_rf
    k = np.linspace(f * math.exp(-width_sd * sigma), f * math.exp(width_sd * sigma), n_strikes)
    d1 = (np.log(f / k) + 0.5 * sigma**2) / sigma
    d2 = d1 - sigma
    call = (f * norm.cdf(d1) - k * norm.cdf(d2)) / gross_rf
    put = (k * norm.cdf(-d2) - f * norm.cdf(-d1)) / gross_rf
    return OptionChain(spot, f, gross_rf, k, np.maximum(put, 0.0), np.maximum(call, 0.0))


def lognormal_svix(gross_rf: float, sigma: float) -> float:
    """Analytic ``(1/R_f) Var^Q(R) = R_f (e^(sigma^2) - 1)`` for the lognormal chain."""
    return gross_rf * math.expm1(sigma * sigma)


# -- CSV -------------------------------------------------------------------

_HEADER_KEYS = ("spot", "forward", "gross_rf")


def read_option_chain(source) -> OptionChain:
    """Parse ``spot=..., forward=..., gross_rf=...`` lines followed by ``strike,put,call`` rows."""
    text = Path(source).read_text(encoding="utf-8") if isinstance(source, (str, Path)) else source.read()
    meta: dict[str, float] = {}
    rows: list[tuple[float, float, float]] = []
    seen_header = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not seen_header:
            if line.replace(" ", "") == "strike,put,call":
                seen_header = True
                continue
            for part in line.split(","):
                if "=" not in part:
                    raise ValidationError(f"line {lineno}: expected key=value, got {part!r}")
                key, val = (x.strip() for x in part.split("=", 1))
                if key not in _HEADER_KEYS:
                    raise ValidationError(f"line {lineno}: unknown chain field {key!r}")
                try:
                    meta[key] = float(val)
                except ValueError:
                    raise ValidationError(f"line {lineno}: cannot parse {val!r}") from None
            continue
        cells = line.split(",")
        if len(cells) != 3:
            raise ValidationError(f"line {lineno}: expected strike,put,call")
        try:
            rows.append(tuple(float(x) for x in cells))
        except ValueError:
            raise ValidationError(f"line {lineno}: cannot parse {line!r}") from None
    missing = [k for k in _HEADER_KEYS if k not in meta]
    if missing:
        raise ValidationError(f"chain header is missing {', '.join(missing)}")
    if not rows:
        raise ValidationError("chain has no strikes")
    arr = np.array(rows)
    return OptionChain(meta["spot"], meta["forward"], meta["gross_rf"], arr[:, 0], arr[:, 1], arr[:, 2])


def option_chain_to_csv(chain: OptionChain, path=None) -> str:
    buf = io.StringIO()
    buf.write(f"spot={chain.spot!r}, forward={chain.forward!r}, gross_rf={chain.gross_rf!r}\n")
    buf.write("strike,put,call\n")
    for k, p, c in zip(chain.strikes, chain.put_prices, chain.call_prices):
        buf.write(f"{float(k)!r},{float(p)!r},{float(c)!r}\n")
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text
