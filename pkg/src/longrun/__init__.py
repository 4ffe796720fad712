"""Long-run laws of unexpected shocks and long-horizon SDF diagnostics.

Submodules
----------
series       forecast series, shocks and their decompositions
laws         additive, weighted and multiplicative long-run averages
processes    reference processes (GARCH, Nelson, Rademacher markets, ...)
sdf          rare-disaster and long-run-risk SDF models
options      option chains and the SVIX integral
diagnostics  market-level checks on returns and SDF realizations
term         discount curves, horizon entropy, permanent/temporary split
"""

from __future__ import annotations

from . import diagnostics, ensemble, laws, options, processes, sdf, series, term
from .errors import (
    ConvergenceError,
    DegenerateFitError,
    DomainError,
    LongRunError,
    NumericalError,
    PreconditionError,
    ValidationError,
)
from .laws import LawPath, RateFit, fit_rate
from .series import ForecastSeries, decompose_additive, decompose_multiplicative, extract_shocks

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "DegenerateFitError",
    "DomainError",
    "ForecastSeries",
    "LawPath",
    "LongRunError",
    "NumericalError",
    "PreconditionError",
    "RateFit",
    "ValidationError",
    "decompose_additive",
    "decompose_multiplicative",
    "diagnostics",
    "ensemble",
    "extract_shocks",
    "fit_rate",
    "laws",
    "options",
    "processes",
    "sdf",
    "series",
    "term",
]
