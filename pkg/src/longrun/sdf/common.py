"""Helpers shared by the SDF models."""

from __future__ import annotations

import numpy as np

from ..errors import DomainError
from ..laws import LawPath

def check_s(s: float, exclude_one: bool = True) -> float:
    s = float(s)
    if not np.isfinite(s):
        raise DomainError("s must be finite")
    if s == 0.0:
        raise DomainError("s must be nonzero")
    if exclude_one and s == 1.0:
        raise DomainError("s must differ from 1")
    return s


def cm_key(s: float) -> str:
    """Auxiliary column name for the conditional moment ``E_{t-1}[m^s]``."""
    return f"cm_{float(s)!r}"


def pi_running_average(cond_moment, s: float) -> LawPath:
    """Running average of ``E_{t-1}[m_t^s]^(1/(1-s))``, the path estimate of pi(m; s)."""
    s = check_s(s)
    cm = np.asarray(cond_moment, dtype=float)
    if np.any(cm <= 0):
        raise DomainError("conditional moments must be positive")
    v = np.exp(np.log(cm) / (1.0 - s))
    return LawPath(np.cumsum(v) / np.arange(1, v.size + 1))
