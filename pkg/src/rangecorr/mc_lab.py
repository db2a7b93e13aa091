"""Seeded Monte Carlo laboratory for the range estimator.

Paths of duration 1 are generated on ``n_steps`` equal steps for three
processes:

* ``bm``: correlated standard Brownian motions,
* ``bm_drift``: the same with a common drift per unit time,
* ``vg``: variance gamma, i.e. correlated Brownian motions run on one shared
  gamma clock with mean rate 1 and variance rate ``vg_kappa``.

Each path's random numbers depend only on ``(seed, path_index)``, so results
are identical whatever the worker count or backend partitioning.
"""

import csv
import io
import math
import os
from dataclasses import asdict, dataclass, replace

import numpy as np

from . import kernels
from .errors import InputError
from .range_core import DayStats, DaySeries, rho0_day, rz_day
from .special_fn import PhiTable

PROCESSES = ("bm", "bm_drift", "vg")
DEFAULT_RHOS = tuple(k / 10 for k in range(-9, 10))
TABLE_COLUMNS = ("rho", "mean_rho0", "sd_rho0", "mean_rz_raw", "mean_rz_corrected", "sd_rz", "variance_ratio")

# -zeta(1/2) / sqrt(2 pi): mean gap between the continuous and discretely
# observed maximum of a unit-variance walk, in units of sqrt(dt).
CONTINUITY_BETA = 0.5825971579390106

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SimConfig:
    process: str = "bm"
    rho: float = 0.0
    drift: float = 0.0
    vg_kappa: float = 0.5
    n_paths: int = 20_000
    n_steps: int = 500
    seed: int = 20080401
    continuity_correction: bool = False

    def __post_init__(self):
        if self.process not in PROCESSES:
            raise InputError(f"process must be one of {PROCESSES}, got {self.process!r}")
        if not -1.0 <= self.rho <= 1.0:
            raise InputError(f"rho {self.rho} outside [-1, 1]")
        if self.n_paths < 1 or self.n_steps < 1:
            raise InputError("n_paths and n_steps must be positive")
        if not 0 <= self.seed <= _MASK64:
            raise InputError("seed must be a 64-bit unsigned integer")
        if self.process == "vg" and not self.vg_kappa > 0:
            raise InputError("vg_kappa must be positive")
        if self.process == "bm" and self.drift != 0.0:
            raise InputError("process 'bm' is driftless; use 'bm_drift'")
        if self.process == "vg" and self.drift != 0.0:
            raise InputError("the vg process is driftless")
        if self.continuity_correction and self.process == "vg":
            raise InputError("continuity correction only applies to Brownian paths")

    @property
    def base_key(self):
        return int(kernels._paths_py.mix64(np.uint64(self.seed)))


@dataclass(frozen=True)
class PairDay:
    d1: DayStats
    d2: DayStats


@dataclass(frozen=True)
class ExperimentRow:
    rho_true: float
    mean_rho0: float
    sd_rho0: float
    mean_rz_raw: float
    mean_rz_corrected: float
    sd_rz: float
    variance_ratio: float
    n_paths: int
    mean_rz_pathwise: float
    corrected_saturated: bool = False

    def table_values(self):
        return (self.rho_true, self.mean_rho0, self.sd_rho0, self.mean_rz_raw,
                self.mean_rz_corrected, self.sd_rz, self.variance_ratio)


def default_workers():
    return os.cpu_count() or 1


def simulate_extremes(cfg, start=0, stop=None, workers=None, backend=None):
    """``(n, 6)`` array of ``H1, L1, S1, H2, L2, S2`` for paths ``start..stop-1``."""
    stop = cfg.n_paths if stop is None else stop
    if not 0 <= start <= stop <= cfg.n_paths:
        raise InputError("path range outside the configured number of paths")
    process = kernels.PROCESS_VG if cfg.process == "vg" else kernels.PROCESS_BM
    out = kernels.simulate_extremes(
        cfg.base_key, start, stop - start, cfg.n_steps, process, float(cfg.rho),
        float(cfg.drift), float(cfg.vg_kappa), workers or default_workers(), backend,
    )
    if cfg.continuity_correction:
        shift = CONTINUITY_BETA / math.sqrt(cfg.n_steps)
        out[:, [0, 3]] += shift
        out[:, [1, 4]] -= shift
    return out


def pair_series(extremes):
    """Split a kernel output array into two :class:`DaySeries`."""
    return DaySeries(*extremes[:, 0:3].T), DaySeries(*extremes[:, 3:6].T)


def gen_pair_day(cfg, path_index):
    if not 0 <= path_index < cfg.n_paths:
        raise InputError(f"path_index {path_index} outside [0, {cfg.n_paths})")
    row = simulate_extremes(cfg, path_index, path_index + 1, workers=1)[0]
    return PairDay(DayStats(*row[:3]), DayStats(*row[3:]))


def run_experiment(cfg, phi_table: PhiTable, workers=None, backend=None):
    a, b = pair_series(simulate_extremes(cfg, workers=workers, backend=backend))
    r0 = rho0_day(a, b)
    rz = rz_day(a, b)
    sd0 = float(np.std(r0, ddof=1)) if cfg.n_paths > 1 else math.nan
    sdz = float(np.std(rz, ddof=1)) if cfg.n_paths > 1 else math.nan
    mean_rz = float(np.mean(rz))
    corrected, saturated = phi_table.inverse(mean_rz, full_output=True)
    return ExperimentRow(
        rho_true=float(cfg.rho),
        mean_rho0=float(np.mean(r0)),
        sd_rho0=sd0,
        mean_rz_raw=mean_rz,
        mean_rz_corrected=corrected,
        sd_rz=sdz,
        variance_ratio=(sd0 / sdz) ** 2 if sdz > 0 else math.nan,
        n_paths=cfg.n_paths,
        mean_rz_pathwise=float(np.mean(phi_table.inverse(rz))),
        corrected_saturated=saturated,
    )


def row_seed(seed, index):
    """Independent 64-bit seed for row ``index`` of a table."""
    return int(np.random.SeedSequence(seed, spawn_key=(index,)).generate_state(1, np.uint64)[0])


def run_table(template, phi_table, rhos=DEFAULT_RHOS, workers=None, backend=None):
    return [
        run_experiment(replace(template, rho=float(rho), seed=row_seed(template.seed, k)),
                       phi_table, workers=workers, backend=backend)
        for k, rho in enumerate(rhos)
    ]


def _fmt(x):
    return f"{x:.10g}"


def table_csv(rows, comments=()):
    """CSV text in the table layout; ``comments`` become leading ``#`` lines."""
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(v) for v in row.table_values()])
    return buf.getvalue()


def rows_as_dicts(rows):
    return [asdict(r) for r in rows]
