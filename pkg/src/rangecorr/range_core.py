"""Per-day range estimators and their aggregation into pair and matrix estimates.

A trading day of one asset is reduced to three log-returns relative to the
open: the high ``H``, the low ``L`` and the close ``S``. For a pair of assets
the simple estimator of covariance is ``S1 S2``; the range estimator is::

    1/2 S1 S2 + (H1 + L1 - S1)(H2 + L2 - S2) / (2 (1 - 2b)),   b = 2 ln 2 - 1.

The per-day functions accept scalars or equally shaped numpy arrays in the
``DayStats`` fields, so the same code serves one day or a whole sample.
"""

import datetime as dt
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSeriesError, InputError, MalformedBarError
from .special_fn import PhiTable, range_coefficient

Z_LABELS = ("HH", "HL", "LH", "LL", "HS", "LS", "SH", "SL", "SS")
Z95 = 1.96


@dataclass(frozen=True)
class OhlcBar:
    date: dt.date
    open: float
    high: float
    low: float
    close: float

    def __post_init__(self):
        prices = (self.open, self.high, self.low, self.close)
        if not all(math.isfinite(p) and p > 0 for p in prices):
            raise MalformedBarError(f"{self.date}: prices must be finite and positive, got {prices}")
        if self.high < self.low:
            raise MalformedBarError(f"{self.date}: high {self.high} below low {self.low}")
        if self.high < max(self.open, self.close) or self.low > min(self.open, self.close):
            raise MalformedBarError(f"{self.date}: open/close outside the [low, high] range")


@dataclass(frozen=True)
class DayStats:
    """Log high, log low and log close of one day, all relative to the open."""

    high: float
    low: float
    final: float

    def __post_init__(self):
        h, lo, s = (np.asarray(v) for v in (self.high, self.low, self.final))
        if not (np.all(lo <= 0) and np.all(h >= 0) and np.all(lo <= s) and np.all(s <= h)):
            raise InputError("day stats must satisfy low <= 0 <= high and low <= final <= high")

    def scaled(self, factor):
        return DayStats(self.high * factor, self.low * factor, self.final * factor)

    def reflected(self):
        """Stats of the negated path: (-L, -H, -S)."""
        return DayStats(-self.low, -self.high, -self.final)


class DaySeries(Sequence):
    """Column-oriented sequence of :class:`DayStats`."""

    def __init__(self, high, low, final):
        self.high = np.array(high, dtype=float)
        self.low = np.array(low, dtype=float)
        self.final = np.array(final, dtype=float)
        if not self.high.shape == self.low.shape == self.final.shape or self.high.ndim != 1:
            raise InputError("high, low and final must be 1-d arrays of equal length")
        DayStats(self.high, self.low, self.final)
        for arr in (self.high, self.low, self.final):
            arr.flags.writeable = False

    @classmethod
    def coerce(cls, days):
        if isinstance(days, cls):
            return days
        days = list(days)
        return cls([d.high for d in days], [d.low for d in days], [d.final for d in days])

    def __len__(self):
        return self.high.size

    def __getitem__(self, i):
        if isinstance(i, slice):
            return DaySeries(self.high[i], self.low[i], self.final[i])
        return DayStats(float(self.high[i]), float(self.low[i]), float(self.final[i]))

    def scaled(self, factor):
        return DaySeries(self.high * factor, self.low * factor, self.final * factor)

    def __repr__(self):
        return f"DaySeries(n={len(self)})"


@dataclass(frozen=True)
class CrossProducts:
    """The nine cross terms of a pair-day, ordered as ``Z_LABELS``."""

    z: np.ndarray

    def __getitem__(self, label):
        return self.z[..., Z_LABELS.index(label)]


def cross_products(d1, d2):
    a = {"H": d1.high, "L": d1.low, "S": d1.final}
    b = {"H": d2.high, "L": d2.low, "S": d2.final}
    z = np.stack([np.multiply(a[lab[0]], b[lab[1]]) for lab in Z_LABELS], axis=-1)
    return CrossProducts(z)


@dataclass(frozen=True)
class PairEstimate:
    rho0_mean: float
    rz_raw_mean: float
    rho_rz: float
    sd_rho0: float
    sd_rz: float
    variance_ratio: float
    ci95_rho0: tuple
    ci95_rz: tuple
    n_days: int
    rz_saturated: bool = False

    @property
    def variance_ratio_pct(self):
        """Variance of the range estimator as a percentage of the simple one's."""
        return 100.0 / self.variance_ratio


def day_stats_from_bar(bar):
    """Log high/low/close relative to the bar's open."""
    if not isinstance(bar, OhlcBar):
        bar = OhlcBar(*bar)
    return DayStats(
        math.log(bar.high / bar.open),
        math.log(bar.low / bar.open),
        math.log(bar.close / bar.open),
    )


def day_series_from_bars(bars):
    o = np.array([b.open for b in bars], dtype=float)
    return DaySeries(
        np.log(np.array([b.high for b in bars]) / o),
        np.log(np.array([b.low for b in bars]) / o),
        np.log(np.array([b.close for b in bars]) / o),
    )


def rho0_day(d1, d2):
    """Simple close-to-close product ``S1 S2``."""
    return d1.final * d2.final


def _range_term(d):
    return (d.high + d.low) - d.final


def sigma12_day(d1, d2):
    """Range estimator of the covariance of the two log-price paths over one day."""
    return 0.5 * (d1.final * d2.final) + range_coefficient() * (_range_term(d1) * _range_term(d2))


def rz_day(d1, d2):
    """Range estimator for standardized inputs; identical formula to :func:`sigma12_day`."""
    return sigma12_day(d1, d2)


def standardize_series(days):
    """Divide a series by the sample standard deviation (ddof=1) of its closes.

    Returns ``(standardized DaySeries, scale)``.
    """
    series = DaySeries.coerce(days)
    if len(series) < 2:
        raise DegenerateSeriesError("need at least two days to standardize")
    scale = float(np.std(series.final, ddof=1))
    if not scale > 0:
        raise DegenerateSeriesError("closing returns have zero spread")
    return series.scaled(1.0 / scale), scale


def _mean_sd(x):
    return float(np.mean(x)), float(np.std(x, ddof=1))


def estimate_pair(a, b, phi_table: PhiTable):
    """Aggregate per-day simple and range estimates for two standardized series.

    ``rho_rz`` is the bias-corrected estimate ``phi^-1(mean raw range value)``.
    Confidence intervals are normal-theory ``mean +- 1.96 sd / sqrt(n)``;
    the range interval's endpoints go through ``phi^-1``. All are clamped to
    [-1, 1].
    """
    a, b = DaySeries.coerce(a), DaySeries.coerce(b)
    if len(a) != len(b):
        raise InputError(f"series lengths differ ({len(a)} vs {len(b)})")
    n = len(a)
    if n < 2:
        raise DegenerateSeriesError("need at least two days")
    for s in (a, b):
        if np.all(s.final == s.final[0]):
            raise DegenerateSeriesError("series closes are constant; it cannot be standardized")
    r0 = rho0_day(a, b)
    rz = rz_day(a, b)
    m0, sd0 = _mean_sd(r0)
    mz, sdz = _mean_sd(rz)
    h0 = Z95 * sd0 / math.sqrt(n)
    hz = Z95 * sdz / math.sqrt(n)
    rho_rz, saturated = phi_table.inverse(mz, full_output=True)
    lo, hi = phi_table.inverse(np.array([mz - hz, mz + hz]))
    return PairEstimate(
        rho0_mean=m0,
        rz_raw_mean=mz,
        rho_rz=rho_rz,
        sd_rho0=sd0,
        sd_rz=sdz,
        variance_ratio=(sd0 / sdz) ** 2 if sdz > 0 else math.nan,
        ci95_rho0=(max(-1.0, m0 - h0), min(1.0, m0 + h0)),
        ci95_rz=(float(lo), float(hi)),
        n_days=n,
        rz_saturated=saturated,
    )


def estimate_matrix_day(days):
    """Range covariance matrix of ``n`` assets for one day.

    Equal to ``1/2 s s^T + c u u^T`` with ``s`` the closes and ``u = H + L - S``,
    so it is symmetric, positive semidefinite and of rank at most 2.
    """
    series = DaySeries.coerce(days)
    s = series.final
    u = _range_term(series)
    return 0.5 * np.outer(s, s) + range_coefficient() * np.outer(u, u)
