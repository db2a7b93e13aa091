"""Synthetic OHLC panels for the CLI and pipeline tests.

Prices follow equicorrelated Brownian motions sampled on a fine intraday grid,
generated with numpy's own generator so the data is independent of the
package's path kernel.
"""

import csv
import datetime as dt

import numpy as np

NAMES = ("alpha", "beta", "gamma", "delta")


def business_days(start, n):
    days, d = [], start
    while len(days) < n:
        if d.weekday() < 5:
            days.append(d)
        d += dt.timedelta(days=1)
    return days


def simulate_days(n_days, n_assets, rho, n_steps=500, seed=0, block=2000):
    """Return ``(high, low, final)`` arrays of shape ``(n_days, n_assets)`` in unit-variance units."""
    rng = np.random.default_rng(seed)
    out = np.empty((3, n_days, n_assets))
    a, b = np.sqrt(rho), np.sqrt(1.0 - rho)
    for lo in range(0, n_days, block):
        m = min(block, n_days - lo)
        common = rng.standard_normal((m, n_steps, 1))
        own = rng.standard_normal((m, n_steps, n_assets))
        x = np.cumsum((a * common + b * own) / np.sqrt(n_steps), axis=1)
        out[0, lo:lo + m] = np.maximum(x.max(axis=1), 0.0)
        out[1, lo:lo + m] = np.minimum(x.min(axis=1), 0.0)
        out[2, lo:lo + m] = x[:, -1]
    return out


def write_panel(directory, n_days, rho, n_steps=500, seed=0, vols=(0.012, 0.02, 0.015, 0.025), names=NAMES):
    """Write one OHLC CSV per asset and return the paths in input order."""
    hls = simulate_days(n_days, len(names), rho, n_steps, seed)
    rng = np.random.default_rng(seed + 1)
    gaps = 0.004 * rng.standard_normal((n_days, len(names)))
    dates = business_days(dt.date(2015, 1, 5), n_days)
    paths = []
    for k, name in enumerate(names):
        path = directory / f"{name}.csv"
        price = 50.0 + 10 * k
        rows = []
        for t, date in enumerate(dates):
            op = price * np.exp(gaps[t, k])
            h, l, s = (vols[k] * hls[j, t, k] for j in range(3))
            close = op * np.exp(s)
            rows.append((date.isoformat(), op, op * np.exp(h), op * np.exp(l), close))
            price = close
        write_rows(path, ("date", "open", "high", "low", "close"), rows)
        paths.append(path)
    return paths


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([v if isinstance(v, str) else f"{v:.12g}" for v in r])
