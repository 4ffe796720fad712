"""Long-run diagnostics on return panels, SDF paths and option-implied variance.

Every diagnostic reports running means (as :class:`~longrun.laws.LawPath`)
and, where the underlying statement is an inequality, a terminal verdict.
These are asymptotic statements, so verdicts describe the terminal values
of finite samples and are not hypothesis tests.
"""

from __future__ import annotations

import csv
import io
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import DomainError, PreconditionError, ValidationError
from .laws import LawPath
from .sdf.common import check_s
from .series import ForecastSeries

BOUND_TOL = 1e-12


def _running_mean(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.cumsum(x) / np.arange(1, x.size + 1)


def _positive(name: str, x) -> np.ndarray:
    arr = np.array(x, dtype=float).ravel()
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise ValidationError(f"{name}: non-finite entry at index {int(bad[0])}")
    bad = np.flatnonzero(arr <= 0)
    if bad.size:
        raise DomainError(f"{name}: nonpositive entry at index {int(bad[0])}")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class ReturnPanel:
    """Gross returns ``R_t`` with the gross risk-free rate ``R_{f,t-1}`` known one period ahead."""

    gross_return: np.ndarray
    gross_riskfree: np.ndarray

    def __post_init__(self):
        r = _positive("gross_return", self.gross_return)
        rf = _positive("gross_riskfree", self.gross_riskfree)
        if r.size != rf.size or r.size == 0:
            raise ValidationError("gross_return and gross_riskfree must have equal nonzero length")
        object.__setattr__(self, "gross_return", r)
        object.__setattr__(self, "gross_riskfree", rf)

    def __len__(self) -> int:
        return self.gross_return.size


def read_return_panel(source) -> ReturnPanel:
    """Parse a ``t,gross_return,gross_riskfree`` CSV."""
    text = Path(source).read_text(encoding="utf-8") if isinstance(source, (str, Path)) else source.read()
    reader = csv.reader(io.StringIO(text))
    header = [h.strip() for h in next(reader, [])]
    if header != ["t", "gross_return", "gross_riskfree"]:
        raise ValidationError(f"expected header t,gross_return,gross_riskfree; got {','.join(header)}")
    r, rf = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or not any(c.strip() for c in row):
            continue
        if len(row) != 3:
            raise ValidationError(f"line {lineno}: expected 3 fields")
        try:
            r.append(float(row[1]))
            rf.append(float(row[2]))
        except ValueError:
            raise ValidationError(f"line {lineno}: cannot parse {row!r}") from None
    return ReturnPanel(r, rf)


def return_panel_to_csv(panel: ReturnPanel, path=None) -> str:
    lines = ["t,gross_return,gross_riskfree"]
    for i, (a, b) in enumerate(zip(panel.gross_return, panel.gross_riskfree), start=1):
        lines.append(f"{i},{float(a)!r},{float(b)!r}")
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


@dataclass(frozen=True)
class SdfReturnPath:
    """SDF realizations ``m_t`` and a gross return ``R_t`` on the same dates.

    ``cond_moment_s`` maps ``s`` to the sequence ``E_{t-1}[m_t^s]``.
    """

    m: np.ndarray
    r_gross: np.ndarray
    cond_moment_s: Mapping[float, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        m = _positive("m", self.m)
        r = _positive("r_gross", self.r_gross)
        if m.size != r.size or m.size == 0:
            raise ValidationError("m and r_gross must have equal nonzero length")
        moments = {}
        for s, v in dict(self.cond_moment_s).items():
            arr = _positive(f"cond_moment[{s}]", v)
            if arr.size != m.size:
                raise ValidationError(f"cond_moment[{s}] length does not match m")
            moments[float(s)] = arr
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "r_gross", r)
        object.__setattr__(self, "cond_moment_s", moments)

    def __len__(self) -> int:
        return self.m.size


# -- return-side laws ------------------------------------------------------


def sample_mean_gap(fs: ForecastSeries) -> LawPath:
    """Sample mean of realizations minus sample mean of their forecasts."""
    return LawPath(_running_mean(fs.realized) - _running_mean(fs.predicted))


def long_term_excess(panel: ReturnPanel, mode: str = "gross") -> LawPath:
    """Running mean of ``R_t - R_{f,t-1}`` (gross) or ``log R_t - log R_{f,t-1}`` (log)."""
    if mode == "gross":
        x = panel.gross_return - panel.gross_riskfree
    elif mode == "log":
        x = np.log(panel.gross_return) - np.log(panel.gross_riskfree)
    else:
        raise ValidationError(f"mode must be 'gross' or 'log', got {mode!r}")
    return LawPath(_running_mean(x))


@dataclass(frozen=True)
class NccResult:
    excess: LawPath
    bound: LawPath
    terminal_gap: float
    holds: bool
    note: str = "asymptotic statement; the terminal gap of a finite sample is indicative only"

    def to_dict(self) -> dict:
        return {
            "terminal_excess": self.excess.terminal,
            "terminal_bound": self.bound.terminal,
            "terminal_gap": self.terminal_gap,
            "holds": self.holds,
            "note": self.note,
        }


def ncc_check(panel: ReturnPanel, svix_series) -> NccResult:
    """Compare the long-run excess return with the long-run risk-neutral variance bound.

    ``svix_series[t]`` is ``(1/R_{f,t-1}) Var^Q_{t-1}(R_t)``, aligned with ``R_t``.
    """
    svix = np.asarray(svix_series, dtype=float).ravel()
    if svix.size != len(panel):
        raise ValidationError("svix series must align with the return panel")
    if np.any(svix < 0) or np.any(~np.isfinite(svix)):
        raise DomainError("svix values must be finite and nonnegative")
    excess = long_term_excess(panel, "gross")
    bound = LawPath(_running_mean(svix))
    gap = excess.terminal - bound.terminal
    return NccResult(excess, bound, gap, bool(gap >= 0.0))


def formation_gap(a: ForecastSeries, b: ForecastSeries) -> LawPath:
    """Running mean of the difference between two forecasts of the same series."""
    if len(a) != len(b) or not np.array_equal(a.realized, b.realized):
        raise ValidationError("forecast series must share identical realized values")
    return LawPath(_running_mean(a.predicted - b.predicted))


@dataclass(frozen=True)
class SurveyVerdict:
    survey_excess: LawPath
    realized_excess: LawPath
    realized_se: float
    gap_se: float
    verdict: str

    def to_dict(self) -> dict:
        return {
            "survey_excess_mean": self.survey_excess.terminal,
            "realized_excess_mean": self.realized_excess.terminal,
            "realized_se": self.realized_se,
            "gap_se": self.gap_se,
            "verdict": self.verdict,
        }


def survey_hypothesis_check(survey, panel: ReturnPanel, k: float = 2.0) -> SurveyVerdict:
    """Do survey expectations of returns behave like conditional means?

    If surveys were conditional expectations, their long-run excess over the
    risk-free rate would match the realized long-run excess return. With a
    positive realized excess (more than ``k`` standard errors above zero), a
    survey excess mean more than ``k`` standard errors below it rejects the
    risk-neutral and pessimistic readings. Without a positive realized
    excess the check is inconclusive.
    """
    sv = np.asarray(survey, dtype=float).ravel()
    if sv.size != len(panel):
        raise ValidationError("survey must align with the return panel")
    rf = panel.gross_riskfree
    realized = panel.gross_return - rf
    surveyed = sv - rf
    n = realized.size
    realized_se = float(np.std(realized, ddof=1)) / math.sqrt(n) if n > 1 else math.inf
    diff = realized - surveyed
    gap_se = float(np.std(diff, ddof=1)) / math.sqrt(n) if n > 1 else math.inf
    r_path, s_path = LawPath(_running_mean(realized)), LawPath(_running_mean(surveyed))
    if not r_path.terminal > k * realized_se:
        verdict = "inconclusive"
    elif s_path.terminal < r_path.terminal - k * gap_se:
        verdict = "rejected"
    else:
        verdict = "consistent"
    return SurveyVerdict(s_path, r_path, realized_se, gap_se, verdict)


# -- SDF bounds ------------------------------------------------------------


def _orientation_holds(lhs: float, rhs: float, orient: str) -> bool:
    tol = BOUND_TOL * max(1.0, abs(lhs), abs(rhs))
    return lhs >= rhs - tol if orient == ">=" else lhs <= rhs + tol


@dataclass(frozen=True)
class BoundRecord:
    s: float
    orientation: str
    lhs: LawPath
    rhs: dict
    holds: dict
    slack: dict

    def to_dict(self) -> dict:
        return {
            "s": self.s,
            "orientation": self.orientation,
            "lhs_terminal": self.lhs.terminal,
            "rhs_terminal": {k: v.terminal for k, v in self.rhs.items()},
            "holds": dict(self.holds),
            "slack": dict(self.slack),
        }


def snow_liu_bounds(path: SdfReturnPath, s: float, side_returns: Mapping[str, np.ndarray], use: str = "auto") -> BoundRecord:
    """Conjugate bound between long-run ``m^s`` moments and return moments.

    ``side_returns[name]`` holds ``E_{t-1}[R_t^{-s/(1-s)}]`` for a candidate
    return. The left side is the running mean of ``E_{t-1}[m^s]`` when the
    path carries it (``use='auto'`` or ``'conditional'``), otherwise of the
    realized ``m_t^s``. The right side is the running mean of the candidate
    moment raised to ``1-s``. Expected orientation: ``lhs >= rhs`` for
    ``s > 1`` or ``s < 0`` and ``lhs <= rhs`` for ``0 < s < 1``; equality
    holds for the return ``m^(s-1) / E_{t-1}[m^s]``.
    """
    s = check_s(s)
    if not side_returns:
        raise PreconditionError("no candidate returns supplied")
    cm = path.cond_moment_s.get(s)
    if use == "conditional" and cm is None:
        raise PreconditionError(f"path has no conditional moment for s={s}")
    if use == "realized" or cm is None:
        lhs_series = np.exp(s * np.log(path.m))
    else:
        lhs_series = cm
    lhs = LawPath(_running_mean(lhs_series))
    orient = "<=" if 0.0 < s < 1.0 else ">="
    rhs, holds, slack = {}, {}, {}
    for name, moment in side_returns.items():
        mom = _positive(f"side_returns[{name}]", moment)
        if mom.size != len(path):
            raise ValidationError(f"side_returns[{name}] length does not match the path")
        rp = LawPath(_running_mean(np.exp((1.0 - s) * np.log(mom))))
        rhs[name] = rp
        holds[name] = _orientation_holds(lhs.terminal, rp.terminal, orient)
        slack[name] = lhs.terminal - rp.terminal if orient == ">=" else rp.terminal - lhs.terminal
    return BoundRecord(s, orient, lhs, rhs, holds, slack)


def liu_dual_bound(path: SdfReturnPath, s: float, realized_returns) -> BoundRecord:
    """Long-run ``pi(m; s)`` against the long-run mean of ``R_t^(s/(s-1))``.

    Expected orientation: ``lhs <= rhs`` for ``s > 0`` and ``lhs >= rhs`` for
    ``s < 0``. Requires the path's conditional moments at ``s``.
    """
    s = check_s(s)
    cm = path.cond_moment_s.get(s)
    if cm is None:
        raise PreconditionError(f"path has no conditional moment for s={s}")
    r = _positive("realized_returns", realized_returns)
    if r.size != len(path):
        raise ValidationError("realized_returns must align with the path")
    lhs = LawPath(_running_mean(np.exp(np.log(cm) / (1.0 - s))))
    rp = LawPath(_running_mean(np.exp(s / (s - 1.0) * np.log(r))))
    orient = "<=" if s > 0 else ">="
    slack = lhs.terminal - rp.terminal if orient == ">=" else rp.terminal - lhs.terminal
    return BoundRecord(
        s, orient, lhs, {"returns": rp}, {"returns": _orientation_holds(lhs.terminal, rp.terminal, orient)}, {"returns": slack}
    )


def cesaro_risk_adjusted(path: SdfReturnPath) -> LawPath:
    """Running mean of ``m_t R_t``; converges to 1 for any priced return."""
    return LawPath(_running_mean(path.m * path.r_gross))


def risk_adjusted_log_product(path: SdfReturnPath) -> np.ndarray:
    """``log prod_{t<=n} m_t R_t``; drifts to minus infinity when the entropy is positive."""
    return np.cumsum(np.log(path.m) + np.log(path.r_gross))


@dataclass(frozen=True)
class ReversalReport:
    band: float
    scanned: int
    reversals: int
    frequency: float
    min_values: np.ndarray
    reversal_index: np.ndarray

    def to_dict(self) -> dict:
        neg = self.min_values[self.reversal_index - 1] if self.reversals else np.array([])
        return {
            "band": self.band,
            "scanned": self.scanned,
            "reversals": self.reversals,
            "frequency": self.frequency,
            "largest_drop": float(-neg.min()) if neg.size else 0.0,
            "mean_drop": float(-neg.mean()) if neg.size else 0.0,
        }


def slow_decrease_scan(path: SdfReturnPath, ratio_band: float = 1.1) -> ReversalReport:
    """For each ``n``, ``min_{n < k <= band n} (x_k - x_n)`` with ``x = m R``.

    Only complete windows are scanned (``floor(band n) <= N`` and at least one
    ``k``). A negative minimum is a reversal. The window minimum uses a
    monotone deque, so the scan is linear in the path length.
    """
    if not ratio_band > 1.0:
        raise DomainError("ratio_band must exceed 1")
    x = (path.m * path.r_gross).tolist()
    N = len(x)
    mins = np.full(N, np.nan)
    dq: deque[int] = deque()  # 1-based indices with increasing x
    hi = 0
    for n in range(1, N + 1):
        top = math.floor(ratio_band * n)
        if top > N:
            break
        while hi < top:
            hi += 1
            while dq and x[dq[-1] - 1] >= x[hi - 1]:
                dq.pop()
            dq.append(hi)
        while dq and dq[0] <= n:
            dq.popleft()
        if not dq:
            continue
        mins[n - 1] = x[dq[0] - 1] - x[n - 1]
    scanned = int(np.sum(~np.isnan(mins)))
    neg = np.flatnonzero(mins < 0) + 1
    freq = neg.size / scanned if scanned else 0.0
    return ReversalReport(ratio_band, scanned, int(neg.size), freq, mins, neg)


# -- entropy and crisis ----------------------------------------------------


@dataclass(frozen=True)
class EntropyBoundVerdict:
    z_estimate: float
    log_excess_mean: float
    slack: float
    holds: bool

    def to_dict(self) -> dict:
        return {
            "z_estimate": self.z_estimate,
            "log_excess_mean": self.log_excess_mean,
            "slack": self.slack,
            "holds": self.holds,
        }


def entropy_excess_bound(z_estimate: float, panel: ReturnPanel) -> EntropyBoundVerdict:
    """Long-term entropy must dominate the long-run log excess return of any asset."""
    excess = long_term_excess(panel, "log").terminal
    slack = float(z_estimate) - excess
    return EntropyBoundVerdict(float(z_estimate), excess, slack, bool(slack >= -BOUND_TOL))


def entropy_excess_bound_from_mean(z_estimate: float, log_excess_mean: float) -> EntropyBoundVerdict:
    slack = float(z_estimate) - float(log_excess_mean)
    return EntropyBoundVerdict(float(z_estimate), float(log_excess_mean), slack, bool(slack >= -BOUND_TOL))


@dataclass(frozen=True)
class CrisisReport:
    threshold: float
    indices: tuple[int, ...]
    fraction: float
    longest_run: int
    first: int | None

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "count": len(self.indices),
            "fraction": self.fraction,
            "longest_run": self.longest_run,
            "first": self.first,
            "indices": list(self.indices),
        }


def crisis_flags(svix_series, threshold: float) -> CrisisReport:
    """Dates (1-based) where the risk-neutral variance exceeds ``threshold``."""
    if not threshold > 0:
        raise DomainError("threshold must be positive")
    v = np.asarray(svix_series, dtype=float).ravel()
    if np.any(v < 0) or np.any(~np.isfinite(v)):
        raise DomainError("svix values must be finite and nonnegative")
    hit = v > threshold
    idx = tuple(int(i) + 1 for i in np.flatnonzero(hit))
    longest = run = 0
    for h in hit:
        run = run + 1 if h else 0
        longest = max(longest, run)
    return CrisisReport(float(threshold), idx, len(idx) / v.size if v.size else 0.0, longest, idx[0] if idx else None)


def flag_horizon(partial_sums, level: float) -> int | None:
    """First (1-based) date at which a cumulative series exceeds ``level``."""
    ps = np.asarray(partial_sums, dtype=float)
    hit = np.flatnonzero(ps > level)
    return int(hit[0]) + 1 if hit.size else None
