"""OHLC CSV ingestion, date alignment and the multi-asset estimation report."""

import csv
import datetime as dt
import itertools
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import CsvFormatError, EmptyIntersectionError, InputError, MalformedBarError
from .range_core import (
    OhlcBar,
    PairEstimate,
    day_series_from_bars,
    estimate_matrix_day,
    estimate_pair,
    standardize_series,
)

log = logging.getLogger(__name__)

FIELDS = ("date", "open", "high", "low", "close")
STANDARDIZATION_NOTE = (
    "each asset divided by the sample SD (ddof=1) of its open-to-close log returns; "
    "H, L, S measured from the same day's open, overnight gaps ignored"
)


def parse_columns(spec):
    """Map ``"Date,Open,High,Low,Close"`` (or a sequence/dict) onto the five fields."""
    if spec is None:
        return dict(zip(FIELDS, FIELDS))
    if isinstance(spec, dict):
        missing = set(FIELDS) - set(spec)
        if missing:
            raise InputError(f"column map lacks {sorted(missing)}")
        return dict(spec)
    names = [s.strip() for s in spec.split(",")] if isinstance(spec, str) else list(spec)
    if len(names) != len(FIELDS):
        raise InputError("columns must name date,open,high,low,close in that order")
    return dict(zip(FIELDS, names))


def ingest_csv(path, columns=None):
    """Read one asset's daily bars.

    Column names are matched case-insensitively. Malformed rows raise
    :class:`CsvFormatError` carrying the file line number.
    """
    colmap = parse_columns(columns)
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise CsvFormatError(path, 1, "missing header row")
        lookup = {name.strip().lower(): name for name in reader.fieldnames}
        src = {}
        for fld, name in colmap.items():
            if name.lower() not in lookup:
                raise CsvFormatError(path, 1, f"column {name!r} not found in header")
            src[fld] = lookup[name.lower()]
        bars, seen = [], set()
        for row in reader:
            line = reader.line_num
            try:
                date = dt.date.fromisoformat(row[src["date"]].strip())
                prices = [float(row[src[f]]) for f in FIELDS[1:]]
            except (TypeError, ValueError, AttributeError) as exc:
                raise CsvFormatError(path, line, f"cannot parse row ({exc})") from None
            if date in seen:
                raise CsvFormatError(path, line, f"duplicate date {date}")
            seen.add(date)
            try:
                bars.append(OhlcBar(date, *prices))
            except MalformedBarError as exc:
                raise CsvFormatError(path, line, str(exc)) from None
    if not bars:
        raise CsvFormatError(path, 2, "no data rows")
    bars.sort(key=lambda b: b.date)
    return bars


@dataclass(frozen=True)
class AlignedPanel:
    names: tuple
    dates: tuple
    raw: tuple  # DaySeries per asset, in log-return units
    standardized: tuple
    scales: tuple
    dropped: int = 0
    drops_by_asset: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.dates)


def align(assets):
    """Inner-join assets on date and standardize each surviving series.

    ``assets`` maps a name to its bar list; insertion order is kept.
    """
    if len(assets) < 2:
        raise InputError("need at least two assets")
    date_sets = {name: {b.date for b in bars} for name, bars in assets.items()}
    common = set.intersection(*date_sets.values())
    if not common:
        raise EmptyIntersectionError("assets share no trading dates")
    union = set.union(*date_sets.values())
    drops = {name: len(ds - common) for name, ds in date_sets.items()}
    if union - common:
        log.info("dropped %d dates not shared by all assets", len(union - common))
    dates = tuple(sorted(common))
    raw, std, scales = [], [], []
    for bars in assets.values():
        kept = [b for b in bars if b.date in common]
        series = day_series_from_bars(kept)
        s, scale = standardize_series(series)
        raw.append(series)
        std.append(s)
        scales.append(scale)
    return AlignedPanel(tuple(assets), dates, tuple(raw), tuple(std), tuple(scales),
                        len(union - common), drops)


def load_panel(paths, columns=None):
    assets = {}
    for p in paths:
        name = Path(p).stem
        if name in assets:
            raise InputError(f"two inputs share the asset name {name!r}")
        assets[name] = ingest_csv(p, columns)
    return align(assets)


@dataclass(frozen=True)
class ReportBundle:
    names: tuple
    pairs: dict  # (i, j) with i <= j -> PairEstimate
    rho0: np.ndarray
    rho_rz: np.ndarray
    variance_ratio_pct: np.ndarray
    n_days: int
    dropped: int
    scales: tuple
    phi_step: float

    def pair(self, i, j):
        return self.pairs[(min(i, j), max(i, j))]

    def figure_pairs(self):
        """Off-diagonal pairs ordered by second asset, then first (BA:GSK, BA:GM, GSK:GM, ...)."""
        n = len(self.names)
        return [(i, j) for j in range(1, n) for i in range(j)]


def cmd_estimate(panel, phi_table):
    n = len(panel.names)
    pairs = {}
    for i, j in itertools.combinations_with_replacement(range(n), 2):
        pairs[(i, j)] = estimate_pair(panel.standardized[i], panel.standardized[j], phi_table)
    rho0 = np.eye(n)
    rz = np.eye(n)
    ratio = np.empty((n, n))
    for (i, j), est in pairs.items():
        if i != j:
            rho0[i, j] = rho0[j, i] = min(1.0, max(-1.0, est.rho0_mean))
            rz[i, j] = rz[j, i] = est.rho_rz
        ratio[i, j] = ratio[j, i] = est.variance_ratio_pct
    return ReportBundle(panel.names, pairs, rho0, rz, ratio, len(panel), panel.dropped,
                        panel.scales, phi_table.step)


def daily_covariances(panel):
    """Yield ``(date, matrix)`` with the rank-2 range covariance of each day (log-return units)."""
    for k, date in enumerate(panel.dates):
        days = [series[k] for series in panel.raw]
        yield date, estimate_matrix_day(days)


def plot_rows(bundle):
    """One row per pair: label, simple estimate and CI, corrected range estimate and CI."""
    rows = []
    for i, j in bundle.figure_pairs():
        est: PairEstimate = bundle.pair(i, j)
        rho0 = min(1.0, max(-1.0, est.rho0_mean))
        rows.append({
            "pair": f"{bundle.names[i]}:{bundle.names[j]}",
            "rho0": rho0,
            "rho0_ci_low": est.ci95_rho0[0],
            "rho0_ci_high": est.ci95_rho0[1],
            "rho_rz": est.rho_rz,
            "rz_ci_low": est.ci95_rz[0],
            "rz_ci_high": est.ci95_rz[1],
        })
    return rows


def _num(x):
    return "nan" if isinstance(x, float) and math.isnan(x) else f"{x:.10g}"


def bundle_header(bundle):
    scales = ", ".join(f"{n}={s:.10g}" for n, s in zip(bundle.names, bundle.scales))
    return [
        f"days used: {bundle.n_days}; dates dropped in alignment: {bundle.dropped}",
        f"standardization: {STANDARDIZATION_NOTE}",
        f"scales: {scales}",
        f"phi table step: {bundle.phi_step:.10g}",
    ]


def bundle_csv(bundle):
    lines = [f"# {h}" for h in bundle_header(bundle)]

    def matrix(title, m):
        lines.append(f"# section: {title}")
        lines.append(",".join(["asset", *bundle.names]))
        for name, row in zip(bundle.names, m):
            lines.append(",".join([name, *(_num(v) for v in row)]))

    matrix("rho0", bundle.rho0)
    matrix("rho_rz", bundle.rho_rz)
    matrix("variance_ratio_pct", bundle.variance_ratio_pct)
    lines.append("# section: pairs")
    cols = ["asset_a", "asset_b", "n_days", "rho0_mean", "rz_raw_mean", "rho_rz", "sd_rho0", "sd_rz",
            "variance_ratio", "rho0_ci_low", "rho0_ci_high", "rz_ci_low", "rz_ci_high", "rz_saturated"]
    lines.append(",".join(cols))
    for (i, j), e in bundle.pairs.items():
        lines.append(",".join([
            bundle.names[i], bundle.names[j], str(e.n_days),
            *(_num(v) for v in (e.rho0_mean, e.rz_raw_mean, e.rho_rz, e.sd_rho0, e.sd_rz, e.variance_ratio,
                                *e.ci95_rho0, *e.ci95_rz)),
            str(int(e.rz_saturated)),
        ]))
    return "\n".join(lines) + "\n"


def bundle_dict(bundle):
    def clean(x):
        return None if isinstance(x, float) and math.isnan(x) else x

    return {
        "assets": list(bundle.names),
        "n_days": bundle.n_days,
        "dropped_dates": bundle.dropped,
        "standardization": STANDARDIZATION_NOTE,
        "scales": dict(zip(bundle.names, bundle.scales)),
        "phi_step": bundle.phi_step,
        "rho0": bundle.rho0.tolist(),
        "rho_rz": bundle.rho_rz.tolist(),
        "variance_ratio_pct": bundle.variance_ratio_pct.tolist(),
        "pairs": [
            {"asset_a": bundle.names[i], "asset_b": bundle.names[j],
             **{k: clean(v) if not isinstance(v, tuple) else list(v) for k, v in e.__dict__.items()}}
            for (i, j), e in bundle.pairs.items()
        ],
    }


def read_sections(text):
    """Parse :func:`bundle_csv` output into ``{section: list of rows}``."""
    sections, current = {}, None
    for line in text.splitlines():
        if line.startswith("# section: "):
            current = line[len("# section: "):]
            sections[current] = []
        elif line.startswith("#") or not line:
            continue
        elif current is not None:
            sections[current].append(line.split(","))
    return sections
