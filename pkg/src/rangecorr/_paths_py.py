"""Pure numpy path kernel, the fallback for the compiled ``_paths`` module.

Random numbers come from a counter-based generator: the uniform with
counter ``n`` on stream ``key`` is ``splitmix64_finalizer(key + (n + 1) * golden)``
mapped to (0, 1). Every path gets its own key derived from
``(base_key, path_index)``, so a path's draws do not depend on which other
paths are generated, or by which worker.

Counter layout per path:

* Gaussian pair of step ``i``: counters ``2i`` and ``2i + 1`` (Box-Muller).
* Gamma clock (second stream): attempt ``k`` of step ``i`` uses counters
  ``(i << 24) | (k << 2) | slot`` with slots 0, 1 (normal), 2 (acceptance);
  slot 3 of attempt 0 is the small-shape boost uniform.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
GAMMA_STREAM = np.uint64(0xD1B54A32D192ED03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
TWO_M53 = 1.0 / 9007199254740992.0
TWO_PI = 6.283185307179586
MAX_ATTEMPTS = 1 << 22

PROCESS_BM = 0
PROCESS_VG = 1

BLOCK = 1024


def mix64(z):
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):  # wrap-around is intended
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniform(key, ctr):
    with np.errstate(over="ignore"):
        bits = mix64(key + (ctr + np.uint64(1)) * GOLDEN)
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * TWO_M53


def path_key(base_key, index):
    return int(mix64(np.uint64(base_key) ^ mix64(np.uint64(index))))


def _std_gamma(shape, gkeys, n_steps):
    """Marsaglia-Tsang gamma variates, one per (path, step); shape < 1 boosted."""
    boost = shape < 1.0
    a = shape + 1.0 if boost else shape
    d = a - 1.0 / 3.0
    c = 1.0 / np.sqrt(9.0 * d)
    out = np.empty((gkeys.size, n_steps))
    steps = np.arange(n_steps, dtype=np.uint64)
    pend_p, pend_t = np.divmod(np.arange(gkeys.size * n_steps), n_steps)
    k = 0
    while pend_p.size and k < MAX_ATTEMPTS:
        key = gkeys[pend_p]
        base = (steps[pend_t] << np.uint64(24)) | np.uint64(k << 2)
        x = np.sqrt(-2.0 * np.log(uniform(key, base))) * np.cos(TWO_PI * uniform(key, base | np.uint64(1)))
        v = 1.0 + c * x
        ok = v > 0.0
        v = np.where(ok, v, 1.0)
        v = v * v * v
        u = uniform(key, base | np.uint64(2))
        accept = ok & (np.log(u) < 0.5 * x * x + d - d * v + d * np.log(v))
        out[pend_p[accept], pend_t[accept]] = d * v[accept]
        pend_p, pend_t = pend_p[~accept], pend_t[~accept]
        k += 1
    if pend_p.size:
        out[pend_p, pend_t] = -1.0
    if boost:
        u = uniform(gkeys[:, None], (steps << np.uint64(24))[None, :] | np.uint64(3))
        boosted = out * np.exp(np.log(u) / shape)
        out = np.where(out < 0.0, out, boosted)
    return out


def _block(base_key, start, n_paths, n_steps, process, rho, drift, kappa):
    dt = 1.0 / n_steps
    sq = np.sqrt(dt)
    mu = drift * dt
    rr = np.sqrt(1.0 - rho * rho)
    idx = np.arange(start, start + n_paths, dtype=np.uint64)
    keys = mix64(np.uint64(base_key) ^ mix64(idx))
    ctr = np.arange(2 * n_steps, dtype=np.uint64)
    u = uniform(keys[:, None], ctr[None, :])
    r = np.sqrt(-2.0 * np.log(u[:, 0::2]))
    theta = TWO_PI * u[:, 1::2]
    z1 = r * np.cos(theta)
    z2 = r * np.sin(theta)
    if process == PROCESS_VG:
        g = kappa * _std_gamma(dt / kappa, mix64(keys ^ GAMMA_STREAM), n_steps)
        sg = np.sqrt(np.maximum(g, 0.0))
        dx1 = sg * z1
        dx2 = sg * (rho * z1 + rr * z2)
    else:
        dx1 = sq * z1 + mu
        dx2 = sq * (rho * z1 + rr * z2) + mu
    x1 = np.cumsum(dx1, axis=1)
    x2 = np.cumsum(dx2, axis=1)
    return np.column_stack([
        np.maximum(x1.max(axis=1), 0.0),
        np.minimum(x1.min(axis=1), 0.0),
        x1[:, -1],
        np.maximum(x2.max(axis=1), 0.0),
        np.minimum(x2.min(axis=1), 0.0),
        x2[:, -1],
    ])


def simulate_extremes(base_key, start, n_paths, n_steps, process, rho, drift=0.0, kappa=0.5, workers=1):
    """Return an ``(n_paths, 6)`` array of ``H1, L1, S1, H2, L2, S2``."""
    out = np.empty((n_paths, 6), dtype=np.float64)
    offsets = range(0, n_paths, BLOCK)

    def run(off):
        m = min(BLOCK, n_paths - off)
        out[off:off + m] = _block(base_key, start + off, m, n_steps, process, rho, drift, kappa)

    if workers > 1 and len(offsets) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, offsets))
    else:
        for off in offsets:
            run(off)
    return out
