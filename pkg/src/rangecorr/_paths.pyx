# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled path kernel: per-path extremes of correlated discrete paths.

Mirrors ``_paths_py`` operation for operation; see that module for the
counter layout. Paths are independent, so they are split across OpenMP
threads without affecting the output.
"""

import numpy as np

from libc.math cimport sqrt, log, cos, sin, exp
from libc.stdint cimport uint64_t
from cython.parallel cimport prange

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t GAMMA_STREAM = 0xD1B54A32D192ED03ULL
cdef double TWO_M53 = 1.0 / 9007199254740992.0
cdef double TWO_PI = 6.283185307179586
cdef uint64_t MAX_ATTEMPTS = 1 << 22

PROCESS_BM = 0
PROCESS_VG = 1


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double uniform(uint64_t key, uint64_t ctr) noexcept nogil:
    return (<double>(mix64(key + (ctr + 1) * GOLDEN) >> 11) + 0.5) * TWO_M53


cdef inline double std_gamma(double shape, uint64_t gkey, uint64_t step) noexcept nogil:
    cdef bint boost = shape < 1.0
    cdef double a = shape + 1.0 if boost else shape
    cdef double d = a - 1.0 / 3.0
    cdef double c = 1.0 / sqrt(9.0 * d)
    cdef double x, v, u, g
    cdef uint64_t k = 0, base
    while k < MAX_ATTEMPTS:
        base = (step << 24) | (k << 2)
        x = sqrt(-2.0 * log(uniform(gkey, base))) * cos(TWO_PI * uniform(gkey, base | 1))
        v = 1.0 + c * x
        if v > 0.0:
            v = v * v * v
            u = uniform(gkey, base | 2)
            if log(u) < 0.5 * x * x + d - d * v + d * log(v):
                break
        k += 1
    if k == MAX_ATTEMPTS:
        return -1.0
    g = d * v
    if boost:
        g = g * exp(log(uniform(gkey, (step << 24) | 3)) / shape)
    return g


cdef void one_path(uint64_t key, Py_ssize_t n_steps, int process, double rho, double rr,
                   double sq, double mu, double shape, double kappa, double *out) noexcept nogil:
    cdef uint64_t gkey = mix64(key ^ GAMMA_STREAM)
    cdef double x1 = 0.0, x2 = 0.0
    cdef double h1 = 0.0, l1 = 0.0, h2 = 0.0, l2 = 0.0
    cdef double r, theta, z1, z2, dx1, dx2, sg, g
    cdef uint64_t i
    for i in range(<uint64_t>n_steps):
        r = sqrt(-2.0 * log(uniform(key, 2 * i)))
        theta = TWO_PI * uniform(key, 2 * i + 1)
        z1 = r * cos(theta)
        z2 = r * sin(theta)
        if process == 1:
            g = kappa * std_gamma(shape, gkey, i)
            if g < 0.0:
                g = 0.0
            sg = sqrt(g)
            dx1 = sg * z1
            dx2 = sg * (rho * z1 + rr * z2)
        else:
            dx1 = sq * z1 + mu
            dx2 = sq * (rho * z1 + rr * z2) + mu
        x1 = x1 + dx1
        x2 = x2 + dx2
        if x1 > h1:
            h1 = x1
        if x1 < l1:
            l1 = x1
        if x2 > h2:
            h2 = x2
        if x2 < l2:
            l2 = x2
    out[0] = h1
    out[1] = l1
    out[2] = x1
    out[3] = h2
    out[4] = l2
    out[5] = x2


def path_key(uint64_t base_key, uint64_t index):
    return mix64(base_key ^ mix64(index))


def simulate_extremes(uint64_t base_key, Py_ssize_t start, Py_ssize_t n_paths, Py_ssize_t n_steps,
                      int process, double rho, double drift=0.0, double kappa=0.5, int workers=1):
    """Return an ``(n_paths, 6)`` array of ``H1, L1, S1, H2, L2, S2``."""
    out = np.empty((n_paths, 6), dtype=np.float64)
    cdef double[:, ::1] view = out
    cdef double dt = 1.0 / n_steps
    cdef double sq = sqrt(dt)
    cdef double mu = drift * dt
    cdef double rr = sqrt(1.0 - rho * rho)
    cdef double shape = dt / kappa
    cdef Py_ssize_t p
    cdef uint64_t key
    if n_paths == 0:
        return out
    for p in prange(n_paths, nogil=True, num_threads=max(workers, 1), schedule="static"):
        key = mix64(base_key ^ mix64(<uint64_t>(start + p)))
        one_path(key, n_steps, process, rho, rr, sq, mu, shape, kappa, &view[p, 0])
    return out
