"""Forecast-paired series, shock extraction and Doob-Meyer decompositions.

A :class:`ForecastSeries` pairs each realization ``Y_t`` with its one-step
ahead conditional mean ``E_{t-1}[Y_t]`` (and optionally the conditional
log-mean and variance). Every long-run law in the package consumes one.
Time is 1-indexed; the initial value ``Y_0`` is passed separately where a
decomposition needs it.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import DomainError, PreconditionError, ValidationError

JENSEN_TOL = 1e-12


def _as_array(name: str, values) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True).ravel()
    arr.flags.writeable = False
    return arr


def _check_finite(name: str, arr: np.ndarray) -> None:
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise ValidationError(f"{name}: non-finite entry at index {int(bad[0])}")


def _check_positive(name: str, arr: np.ndarray) -> None:
    bad = np.flatnonzero(arr <= 0)
    if bad.size:
        raise DomainError(f"{name}: nonpositive entry at index {int(bad[0])}")


@dataclass(frozen=True)
class ForecastSeries:
    """Realizations paired with their one-step-ahead conditional moments.

    Parameters
    ----------
    realized : array_like
        ``Y_t`` for ``t = 1..n``.
    predicted : array_like
        ``E_{t-1}[Y_t]``, same units as ``realized``.
    predicted_log : array_like, optional
        ``E_{t-1}[log Y_t]``.
    cond_var : array_like, optional
        ``Var_{t-1}(Y_t)``.
    t_index : array_like of int, optional
        Defaults to ``1..n``.
    """

    realized: np.ndarray
    predicted: np.ndarray
    predicted_log: np.ndarray | None = None
    cond_var: np.ndarray | None = None
    t_index: np.ndarray | None = None

    def __post_init__(self):
        realized = _as_array("realized", self.realized)
        predicted = _as_array("predicted", self.predicted)
        n = realized.size
        if n < 1:
            raise ValidationError("series must have at least one observation")
        if predicted.size != n:
            raise ValidationError(
                f"predicted has length {predicted.size}, realized has length {n}"
            )
        _check_finite("realized", realized)
        _check_finite("predicted", predicted)
        object.__setattr__(self, "realized", realized)
        object.__setattr__(self, "predicted", predicted)

        if self.t_index is None:
            t_index = np.arange(1, n + 1)
        else:
            t_index = np.array(self.t_index, dtype=np.int64).ravel()
            if t_index.size != n:
                raise ValidationError("t_index length does not match realized")
            if t_index[0] != 1 or np.any(np.diff(t_index) <= 0):
                raise ValidationError("t_index must start at 1 and increase strictly")
        t_index.flags.writeable = False
        object.__setattr__(self, "t_index", t_index)

        if self.predicted_log is not None:
            plog = _as_array("predicted_log", self.predicted_log)
            if plog.size != n:
                raise ValidationError("predicted_log length does not match realized")
            _check_finite("predicted_log", plog)
            _check_positive("predicted", predicted)
            gap = np.log(predicted) - plog
            bad = np.flatnonzero(gap < -JENSEN_TOL)
            if bad.size:
                i = int(bad[0])
                raise ValidationError(
                    f"Jensen violated at index {i}: log(predicted) < predicted_log by {-gap[i]:.3e}"
                )
            object.__setattr__(self, "predicted_log", plog)

        if self.cond_var is not None:
            cv = _as_array("cond_var", self.cond_var)
            if cv.size != n:
                raise ValidationError("cond_var length does not match realized")
            _check_finite("cond_var", cv)
            bad = np.flatnonzero(cv < 0)
            if bad.size:
                raise DomainError(f"cond_var: negative entry at index {int(bad[0])}")
            object.__setattr__(self, "cond_var", cv)

    def __len__(self) -> int:
        return self.realized.size


@dataclass(frozen=True)
class ShockSeries:
    """Unexpected shocks ``Y_t - E_{t-1}[Y_t]``."""

    values: np.ndarray
    cond_var: np.ndarray | None = None

    def __post_init__(self):
        values = _as_array("values", self.values)
        if values.size < 1:
            raise ValidationError("shock series is empty")
        _check_finite("values", values)
        object.__setattr__(self, "values", values)
        if self.cond_var is not None:
            object.__setattr__(self, "cond_var", _as_array("cond_var", self.cond_var))

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class AdditiveDecomposition:
    """``Y_n = M_n + A_n``: martingale plus predictable part."""

    martingale: np.ndarray
    predictable: np.ndarray


@dataclass(frozen=True)
class MultiplicativeDecomposition:
    """``Y_n = L_n B_n``: martingale factor times predictable factor.

    On long paths ``L_n`` and ``B_n`` can leave the float range while their
    product stays moderate, so the logs are kept as well.
    """

    mart_factor: np.ndarray
    predictable_factor: np.ndarray
    log_mart_factor: np.ndarray
    log_predictable_factor: np.ndarray

    def reconstruct(self) -> np.ndarray:
        """``L_n B_n`` formed in log space."""
        return np.exp(self.log_mart_factor + self.log_predictable_factor)


@dataclass(frozen=True)
class EntropyPath:
    """Conditional entropies ``J_{t-1}(Y_t) = log E_{t-1}[Y_t] - E_{t-1}[log Y_t]``."""

    j_values: np.ndarray

    def __post_init__(self):
        j = _as_array("j_values", self.j_values)
        if j.size < 1:
            raise ValidationError("entropy path is empty")
        _check_finite("j_values", j)
        if np.any(j < -JENSEN_TOL):
            raise ValidationError("entropy path has entries below -1e-12")
        object.__setattr__(self, "j_values", j)

    def __len__(self) -> int:
        return self.j_values.size


def extract_shocks(fs: ForecastSeries) -> ShockSeries:
    return ShockSeries(fs.realized - fs.predicted, fs.cond_var)


def decompose_additive(fs: ForecastSeries, y0: float) -> AdditiveDecomposition:
    """Additive Doob-Meyer split.

    ``M_n = sum_{t<=n} (Y_t - E_{t-1}[Y_t])`` and
    ``A_n = y0 + sum_{t<=n} (E_{t-1}[Y_t] - Y_{t-1})``.
    """
    if not np.isfinite(y0):
        raise ValidationError("y0 must be finite")
    y = fs.realized
    lagged = np.concatenate(([float(y0)], y[:-1]))
    martingale = np.cumsum(y - fs.predicted)
    predictable = float(y0) + np.cumsum(fs.predicted - lagged)
    return AdditiveDecomposition(martingale, predictable)


def decompose_multiplicative(fs: ForecastSeries, y0: float) -> MultiplicativeDecomposition:
    """Multiplicative Doob-Meyer split, accumulated in log space.

    ``L_n = prod Y_t / E_{t-1}[Y_t]`` and ``B_n = y0 prod E_{t-1}[Y_t] / Y_{t-1}``.
    """
    if not (np.isfinite(y0) and y0 > 0):
        raise DomainError("y0 must be positive and finite")
    _check_positive("realized", fs.realized)
    _check_positive("predicted", fs.predicted)
    log_y = np.log(fs.realized)
    log_pred = np.log(fs.predicted)
    log_lagged = np.concatenate(([np.log(y0)], log_y[:-1]))
    log_mart = np.cumsum(log_y - log_pred)
    log_b = np.log(y0) + np.cumsum(log_pred - log_lagged)
    with np.errstate(over="ignore", under="ignore"):
        mart, pred = np.exp(log_mart), np.exp(log_b)
    return MultiplicativeDecomposition(mart, pred, log_mart, log_b)


def conditional_entropy(fs: ForecastSeries) -> EntropyPath:
    if fs.predicted_log is None:
        raise PreconditionError("conditional_entropy needs predicted_log")
    _check_positive("predicted", fs.predicted)
    j = np.log(fs.predicted) - fs.predicted_log
    # ForecastSeries already rejected gaps below -JENSEN_TOL
    return EntropyPath(np.where(j < 0.0, 0.0, j))


# -- CSV -------------------------------------------------------------------

_BASE_COLUMNS = ("t", "realized", "predicted")
_OPTIONAL_COLUMNS = ("predicted_log", "cond_var")


def _fmt(x: float) -> str:
    return repr(float(x))


def forecast_series_to_csv(
    fs: ForecastSeries,
    path: str | Path | None = None,
    aux: Mapping[str, np.ndarray] | None = None,
) -> str:
    """Write ``t,realized,predicted[,predicted_log][,cond_var][,aux_*]``.

    Floats are written with ``repr`` so they round-trip exactly. Returns the
    CSV text; also writes it to ``path`` when given.
    """
    cols = list(_BASE_COLUMNS)
    data = [fs.t_index, fs.realized, fs.predicted]
    if fs.predicted_log is not None:
        cols.append("predicted_log")
        data.append(fs.predicted_log)
    if fs.cond_var is not None:
        cols.append("cond_var")
        data.append(fs.cond_var)
    for name, arr in (aux or {}).items():
        arr = np.asarray(arr)
        if arr.size != len(fs):
            raise ValidationError(f"aux column {name!r} has wrong length")
        cols.append(f"aux_{name}")
        data.append(arr)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for i in range(len(fs)):
        row = [str(int(data[0][i]))] + [_fmt(col[i]) for col in data[1:]]
        writer.writerow(row)
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def read_forecast_series(source: str | Path | io.TextIOBase) -> tuple[ForecastSeries, dict]:
    """Parse a ForecastSeries CSV. Returns the series and any ``aux_*`` columns."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise ValidationError("empty CSV") from None
    if tuple(header[:3]) != _BASE_COLUMNS:
        raise ValidationError(f"header must start with t,realized,predicted; got {header[:3]}")
    for name in header[3:]:
        if name not in _OPTIONAL_COLUMNS and not name.startswith("aux_"):
            raise ValidationError(f"unknown column {name!r}")
    rows = [r for r in reader if r and any(c.strip() for c in r)]
    if not rows:
        raise ValidationError("CSV has no data rows")
    columns: dict[str, list[float]] = {h: [] for h in header}
    for lineno, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise ValidationError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        for h, cell in zip(header, row):
            try:
                columns[h].append(float(cell))
            except ValueError:
                raise ValidationError(f"line {lineno}: cannot parse {cell!r} in column {h}") from None
    t = np.array(columns["t"])
    if np.any(t != np.round(t)):
        raise ValidationError("t column must hold integers")
    fs = ForecastSeries(
        realized=columns["realized"],
        predicted=columns["predicted"],
        predicted_log=columns.get("predicted_log"),
        cond_var=columns.get("cond_var"),
        t_index=t.astype(np.int64),
    )
    aux = {h[4:]: np.array(v) for h, v in columns.items() if h.startswith("aux_")}
    return fs, aux
