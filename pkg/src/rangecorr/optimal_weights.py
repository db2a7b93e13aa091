"""Numerical reconstruction of the minimum-variance range estimator.

The estimator is a weight vector ``w`` over the nine cross products ``Z``
(order ``Z_LABELS``). Unbiasedness at rho = -1, 0, 1 becomes ``w.m = 1`` and
``w.y = 0``; among such weights we minimise ``w.V w``, the second moment of
the estimator at rho = 0.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import AssemblyError, SingularSystemError
from .range_core import Z_LABELS
from .special_fn import b_const, f_rho, range_coefficient, DEFAULT_QUAD

_IDX = {"H": 0, "L": 1, "S": 2}
_REFLECT = {"H": "L", "L": "H", "S": "S"}


def univariate_moments():
    """E[X Y] for X, Y in (H, L, S) of a standard Brownian motion on [0, 1]."""
    b = b_const()
    return np.array([
        [1.0, -b, 0.5],
        [-b, 1.0, 0.5],
        [0.5, 0.5, 1.0],
    ])


def _univariate_means():
    m = math.sqrt(2.0 / math.pi)
    return {"H": m, "L": -m, "S": 0.0}


@dataclass(frozen=True)
class MomentTable:
    """Means of ``Z`` at rho in (-1, 0, 1), plus the univariate second moments."""

    means: np.ndarray  # shape (9, 3), columns rho = -1, 0, 1
    univariate: np.ndarray  # 3x3 over (H, L, S)

    RHOS = (-1.0, 0.0, 1.0)

    def column(self, rho):
        return self.means[:, self.RHOS.index(rho)]


def moment_table():
    """Assemble the table from univariate moments.

    rho = 1: both assets share a path, E[A1 B2] = E[A B].
    rho = -1: asset 2 is the reflected path, with H2 = -L1, L2 = -H1, S2 = -S1.
    rho = 0: independence, E[A1 B2] = E[A] E[B].
    """
    M = univariate_moments()
    mu = _univariate_means()
    cols = []
    for lab in Z_LABELS:
        a, b = lab
        cols.append((
            -M[_IDX[a], _IDX[_REFLECT[b]]],
            mu[a] * mu[b],
            M[_IDX[a], _IDX[b]],
        ))
    return MomentTable(np.array(cols), M)


def mean_z(rho, q=DEFAULT_QUAD):
    """E[Z] at an arbitrary correlation; extreme-extreme terms through ``f_rho``."""
    fp, fm = f_rho(rho, q), f_rho(-rho, q)
    return np.array([fp, -fm, -fm, fp, rho / 2, rho / 2, rho / 2, rho / 2, rho])


def printed_covariance_matrix():
    """The reference matrix, entered literally."""
    b = b_const()
    h = 0.5
    q = 0.25
    return np.array([
        [1, -b, -b, b * b, h, -b / 2, h, -b / 2, q],
        [-b, 1, b * b, -b, h, -b / 2, -b / 2, h, q],
        [-b, b * b, 1, -b, -b / 2, h, h, -b / 2, q],
        [b * b, -b, -b, 1, -b / 2, h, -b / 2, h, q],
        [h, h, -b / 2, -b / 2, 1, -b, q, q, h],
        [-b / 2, -b / 2, h, h, -b, 1, q, q, h],
        [h, -b / 2, h, -b / 2, q, q, 1, -b, h],
        [-b / 2, h, -b / 2, h, q, q, -b, 1, h],
        [q, q, q, q, h, h, h, h, 1],
    ], dtype=float)


def build_covariance_matrix(check=True):
    """``V = E_0[Z Z^T]`` by the independence factorization.

    Under rho = 0 the assets are independent, so
    ``E[(A1 B2)(C1 D2)] = E[A C] E[B D]``. ``V`` is the uncentered second
    moment; on the feasible set (``w.y = 0``, hence mean zero at rho = 0) it is
    also the estimator's variance. With ``check`` the result must match the
    literal reference matrix or :class:`AssemblyError` is raised.
    """
    M = univariate_moments()
    n = len(Z_LABELS)
    V = np.empty((n, n))
    for i, (a, b) in enumerate(Z_LABELS):
        for j, (c, d) in enumerate(Z_LABELS):
            V[i, j] = M[_IDX[a], _IDX[c]] * M[_IDX[b], _IDX[d]]
    if check:
        diff = np.max(np.abs(V - printed_covariance_matrix()))
        if diff > 1e-12:
            raise AssemblyError(f"assembled V differs from reference matrix by {diff:.3g}")
    return V


def centered_covariance_matrix():
    """Cov_0[Z] = V - E_0[Z] E_0[Z]^T (differs from V only in the HH..LL block)."""
    mu0 = moment_table().column(0.0)
    return build_covariance_matrix() - np.outer(mu0, mu0)


def constraint_vectors():
    """``(m, y)``: the rho = 1 mean column and the rho-direction vector."""
    b = b_const()
    m = np.array([1.0, -b, -b, 1.0, 0.5, 0.5, 0.5, 0.5, 1.0])
    y = np.array([1.0, -1.0, -1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0])
    return m, y


class WeightVector:
    """Weights over the cross products, in ``Z_LABELS`` order."""

    labels = Z_LABELS

    def __init__(self, w):
        w = np.array(w, dtype=float)
        if w.shape != (len(Z_LABELS),) or not np.all(np.isfinite(w)):
            raise ValueError("weight vector needs 9 finite entries")
        w.flags.writeable = False
        self.w = w

    def __getitem__(self, key):
        return self.w[Z_LABELS.index(key) if isinstance(key, str) else key]

    def __array__(self, dtype=None, copy=None):
        return self.w if dtype is None else self.w.astype(dtype)

    def apply(self, cross):
        """Estimator value(s) for a :class:`CrossProducts` or raw ``(..., 9)`` array."""
        z = getattr(cross, "z", cross)
        return np.asarray(z) @ self.w

    def as_dict(self):
        return dict(zip(Z_LABELS, self.w.tolist()))

    def __repr__(self):
        return "WeightVector(" + ", ".join(f"{k}={v:.6g}" for k, v in self.as_dict().items()) + ")"


def solve_weights(V, m, y):
    """Minimise ``w.V w`` subject to ``w.m = 1``, ``w.y = 0``.

    The Lagrange solution is ``w = alpha V^-1 m + beta V^-1 y`` with
    ``(alpha, beta)`` from the 2x2 Gram system; ``V`` is factorized once
    (Cholesky) and never inverted explicitly.
    """
    V = np.asarray(V, dtype=float)
    if not np.allclose(V, V.T, rtol=0, atol=1e-14):
        raise SingularSystemError("V is not symmetric")
    try:
        chol = np.linalg.cholesky(V)
    except np.linalg.LinAlgError:
        raise SingularSystemError("V is not positive definite") from None
    if np.min(np.diag(chol)) ** 2 < 1e-14 * np.max(np.diag(V)):
        raise SingularSystemError("V is numerically singular")
    rhs = np.column_stack([m, y])
    sol = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))  # V^-1 [m y]
    gram = rhs.T @ sol
    try:
        alpha, beta = np.linalg.solve(gram, [1.0, 0.0])
    except np.linalg.LinAlgError:
        raise SingularSystemError("constraint Gram matrix is singular") from None
    return WeightVector(alpha * sol[:, 0] + beta * sol[:, 1])


def closed_form_weights():
    c = range_coefficient()
    return WeightVector([c, c, c, c, -c, -c, -c, -c, 0.5 + c])


def estimator_variance(w, V):
    w = np.asarray(w, dtype=float)
    V = np.asarray(V, dtype=float)
    if V.shape != (w.size, w.size):
        raise ValueError("dimension mismatch between weights and V")
    return float(w @ V @ w)


def feasible_null_space(m=None, y=None):
    """Orthonormal basis of directions keeping both constraints satisfied."""
    if m is None or y is None:
        m, y = constraint_vectors()
    A = np.vstack([m, y])
    _, _, vt = np.linalg.svd(A)
    return vt[2:].T
