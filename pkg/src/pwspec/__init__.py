"""Spline spectral estimation by penalized Whittle likelihood."""

from .periodogram import (LocalPeriodogramGrid, PeriodogramSet, TimeSeries, local_periodograms,
                          normalize_series, periodogram)
from .whittle import (NotConvergedError, ReducedFit, SsanovaFit, StationaryFit, evaluate_spectrum,
                      evaluate_tvs, fit_reduced, fit_ssanova, fit_stationary, irpls_solve)

__version__ = "0.1.0"

__all__ = [
    "LocalPeriodogramGrid", "NotConvergedError", "PeriodogramSet", "ReducedFit", "SsanovaFit",
    "StationaryFit", "TimeSeries", "evaluate_spectrum", "evaluate_tvs", "fit_reduced",
    "fit_ssanova", "fit_stationary", "irpls_solve", "local_periodograms", "normalize_series",
    "periodogram",
]
