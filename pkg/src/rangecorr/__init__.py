"""Range-based correlation estimation from daily high, low, open and close prices."""

from .errors import RangeCorrError
from .kernels import backend_name
from .optimal_weights import closed_form_weights, solve_weights
from .range_core import (
    DaySeries,
    DayStats,
    OhlcBar,
    PairEstimate,
    day_stats_from_bar,
    estimate_matrix_day,
    estimate_pair,
    rho0_day,
    rz_day,
    sigma12_day,
    standardize_series,
)
from .special_fn import PhiTable, b_const, build_phi_table, f_rho, phi, phi_inverse

__version__ = "0.1.0"

__all__ = [
    "DaySeries", "DayStats", "OhlcBar", "PairEstimate", "PhiTable", "RangeCorrError",
    "b_const", "backend_name", "build_phi_table", "closed_form_weights", "day_stats_from_bar",
    "estimate_matrix_day", "estimate_pair", "f_rho", "phi", "phi_inverse", "rho0_day", "rz_day",
    "sigma12_day", "solve_weights", "standardize_series",
]
