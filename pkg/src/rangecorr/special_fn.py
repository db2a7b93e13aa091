"""Cross moment of Brownian maxima, its quadratic approximation and the bias map.

``f_rho(rho)`` is E[H1 H2] for two standard Brownian motions on [0, 1] with
correlation ``rho``::

    f(rho) = cos(a) * integral_0^inf cosh(nu a) / sinh(nu pi/2) * tanh(nu g) dnu,
    rho = sin(a),  2 g = a + pi/2.

``phi(rho)`` is the mean of the raw range estimator when the true correlation
is ``rho``; :class:`PhiTable` tabulates it so that it can be inverted.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import quadrature
from .errors import DomainError, InputError, NonMonotonePhiError

HALF_PI = 0.5 * math.pi

# |rho| beyond this is handled by blending towards the exact endpoint values.
ENDPOINT_SLIVER = 0.999

# Sup-bound factor of cosh(nu|a|)/sinh(nu pi/2) * exp(nu delta) for nu >= 1.
_TAIL_CONST = 2.0 / (1.0 - math.exp(-math.pi))


def b_const():
    """``2 ln 2 - 1``, equal to -E[H L] for a standard Brownian motion on [0, 1]."""
    return math.log(4.0) - 1.0


def range_coefficient():
    """Weight ``1 / (2 (1 - 2b))`` of the range product in the estimator."""
    return 0.5 / (1.0 - 2.0 * b_const())


@dataclass(frozen=True)
class FTransform:
    """Angle parametrisation of a correlation: ``rho = sin(alpha)``, ``gamma = (alpha + pi/2) / 2``."""

    rho: float
    alpha: float
    gamma: float

    @classmethod
    def from_rho(cls, rho):
        rho = _check_rho(rho)
        alpha = math.asin(rho)
        return cls(rho, alpha, 0.5 * (alpha + HALF_PI))


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy settings for evaluating ``f_rho``.

    ``nu_max=None`` derives the truncation point from the exponential tail
    bound so the neglected tail stays below ``abs_tol / 2``.
    """

    abs_tol: float = 1e-11
    nu_max: float | None = None
    scheme: str = "gauss-kronrod-7-15, globally adaptive"
    max_intervals: int = 4000

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise InputError("abs_tol must be positive")
        if self.nu_max is not None and not self.nu_max > 0:
            raise InputError("nu_max must be positive")

    def truncation(self, alpha):
        if self.nu_max is not None:
            return self.nu_max
        decay = HALF_PI - abs(alpha)
        # tail <= cos(a) * C * exp(-N decay) / decay, and cos(a) <= decay
        bound = _TAIL_CONST * math.cos(alpha) / decay
        return max(1.0, math.log(2.0 * bound / self.abs_tol) / decay)


DEFAULT_QUAD = QuadratureSpec()


def _check_rho(rho):
    rho = float(rho)
    if not -1.0 <= rho <= 1.0:
        raise DomainError(f"correlation {rho!r} outside [-1, 1]")
    return rho


def _integrand(nu, alpha, gamma):
    nu = np.asarray(nu, dtype=float)
    abs_a = abs(alpha)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.exp(nu * (abs_a - HALF_PI)) * (1.0 + np.exp(-2.0 * nu * abs_a)) / -np.expm1(-nu * math.pi)
        out = ratio * np.tanh(nu * gamma)
    # removable singularity at nu = 0
    return np.where(nu == 0.0, gamma / HALF_PI, out)


def _f_quadrature(rho, q):
    t = FTransform.from_rho(rho)
    cos_a = math.cos(t.alpha)
    nu_max = q.truncation(t.alpha)
    decay = HALF_PI - abs(t.alpha)
    value, _ = quadrature.integrate(
        lambda nu: _integrand(nu, t.alpha, t.gamma),
        0.0,
        nu_max,
        # scale so that cos(a) * (quadrature error) stays below abs_tol / 2
        abs_tol=0.5 * q.abs_tol / max(cos_a, 1e-300),
        breakpoints=[x / decay for x in (1.0, 4.0, 16.0)],
        max_intervals=q.max_intervals,
    )
    return cos_a * value


def f_rho(rho, q=DEFAULT_QUAD):
    """E[H1 H2] for standard Brownian motions with correlation ``rho``.

    Exact at ``rho = +-1`` (values 1 and b). For ``|rho| > 0.999`` the
    residual against the quadratic approximation is faded linearly from its
    value at 0.999 to zero at the endpoint instead of integrating the
    ever-longer tail.
    """
    rho = _check_rho(rho)
    if rho == 1.0:
        return 1.0
    if rho == -1.0:
        return b_const()
    if abs(rho) > ENDPOINT_SLIVER:
        anchor = math.copysign(ENDPOINT_SLIVER, rho)
        residual = _f_quadrature(anchor, q) - f_quad_approx(anchor)
        weight = (1.0 - abs(rho)) / (1.0 - ENDPOINT_SLIVER)
        return f_quad_approx(rho) + weight * residual
    return _f_quadrature(rho, q)


def quad_approx_coefficients():
    """``(a, c, d)`` of the quadratic ``a rho^2 + c rho + d`` through f at -1, 0, 1."""
    b = b_const()
    return 0.5 * (1.0 + b) - 2.0 / math.pi, 0.5 * (1.0 - b), 2.0 / math.pi


def f_quad_approx(rho):
    rho = _check_rho(rho)
    a, c, d = quad_approx_coefficients()
    return (a * rho + c) * rho + d


def _phi_from_f(rho, f_pos, f_neg):
    return 0.5 * rho + range_coefficient() * (2.0 * f_pos - 2.0 * f_neg - rho)


def phi(rho, q=DEFAULT_QUAD):
    """Mean of the raw range estimator at true correlation ``rho``."""
    rho = _check_rho(rho)
    if abs(rho) == 1.0:
        return rho
    if rho == 0.0:
        return 0.0
    return _phi_from_f(rho, f_rho(rho, q), f_rho(-rho, q))


@dataclass(frozen=True)
class PhiTable:
    """Strictly increasing grid of ``(rho_k, phi(rho_k))`` over [-1, 1].

    Construction validates the grid; the arrays are read-only afterwards.
    """

    rho: np.ndarray
    values: np.ndarray
    step: float = field(init=False)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float)
        values = np.array(self.values, dtype=float)
        if rho.ndim != 1 or rho.shape != values.shape or rho.size < 3 or rho.size % 2 == 0:
            raise InputError("phi table needs an odd number (>= 3) of matching rho/phi entries")
        if not np.all(np.isfinite(values)):
            raise NonMonotonePhiError("phi table contains non-finite values")
        if rho[0] != -1.0 or rho[-1] != 1.0 or values[0] != -1.0 or values[-1] != 1.0:
            raise InputError("phi table endpoints must be exactly (-1, -1) and (1, 1)")
        if np.any(np.diff(rho) <= 0):
            raise InputError("phi table grid must be strictly increasing")
        bad = np.flatnonzero(np.diff(values) <= 0)
        if bad.size:
            k = bad[0]
            raise NonMonotonePhiError(
                f"phi not strictly increasing between rho={rho[k]:.6g} and {rho[k + 1]:.6g}; "
                "quadrature tolerance too loose for this step"
            )
        rho.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "step", 1.0 / ((rho.size - 1) // 2))

    def __len__(self):
        return self.rho.size

    def __eq__(self, other):
        if not isinstance(other, PhiTable):
            return NotImplemented
        return np.array_equal(self.rho, other.rho) and np.array_equal(self.values, other.values)

    __hash__ = None

    def inverse(self, y, full_output=False):
        """Vectorised :func:`phi_inverse`."""
        y = np.asarray(y, dtype=float)
        saturated = (y < -1.0) | (y > 1.0)
        yc = np.clip(y, -1.0, 1.0)
        # binary search for the bracketing cell, then linear interpolation
        k = np.clip(np.searchsorted(self.values, yc, side="right") - 1, 0, self.rho.size - 2)
        v0, v1 = self.values[k], self.values[k + 1]
        r0, r1 = self.rho[k], self.rho[k + 1]
        out = r0 + (yc - v0) * (r1 - r0) / (v1 - v0)
        out = np.clip(out, -1.0, 1.0)
        if out.ndim == 0:
            out, saturated = float(out), bool(saturated)
        return (out, saturated) if full_output else out

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write("rho,phi\n")
            for r, p in zip(self.rho, self.values):
                fh.write(f"{r:.17g},{p:.17g}\n")

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != ["rho", "phi"]:
                raise InputError(f"{path}: expected header 'rho,phi'")
            try:
                rows = [(float(r), float(p)) for r, p in reader]
            except ValueError as exc:
                raise InputError(f"{path}: bad phi table row ({exc})") from None
        if not rows:
            raise InputError(f"{path}: empty phi table")
        rho, values = map(np.array, zip(*rows))
        return cls(rho, values)


def build_phi_table(step=0.001, q=DEFAULT_QUAD):
    """Tabulate phi on ``rho_k = k * step`` for ``k = -K..K``, ``K = 1/step``.

    The grid is exactly symmetric, so each f evaluation serves both
    ``phi(rho_k)`` and ``phi(-rho_k)``.
    """
    if not 0.0 < step <= 0.01:
        raise InputError("step must lie in (0, 0.01]")
    n_half = round(1.0 / step)
    if abs(n_half * step - 1.0) > 1e-9:
        raise InputError("1/step must be an integer")
    ks = np.arange(-n_half, n_half + 1)
    rho = ks / n_half
    f_vals = np.array([f_rho(r, q) for r in rho])
    values = _phi_from_f(rho, f_vals, f_vals[::-1])
    values[n_half] = 0.0
    values[0], values[-1] = -1.0, 1.0
    return PhiTable(rho, values)


def phi_inverse(y, table, full_output=False):
    """Correlation whose bias-map value is ``y``.

    Values outside [-1, 1] clamp to +-1; with ``full_output=True`` the result
    is ``(rho, saturated)``.
    """
    return table.inverse(y, full_output=full_output)
