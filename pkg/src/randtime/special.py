"""Special functions: Mittag-Leffler, the M-Wright density function and
incomplete gamma functions.

All public scalar functions return :class:`EvalResult` (value, error
estimate, method).  Vectorised helpers used by the density code return
plain arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate
from scipy.special import zeta

from .errors import DomainError

__all__ = [
    "EvalResult",
    "mittag_leffler",
    "mittag_leffler_asymptotic",
    "mittag_leffler_values",
    "wright",
    "wright_values",
    "upper_incomplete_gamma",
    "upper_incomplete_gamma_values",
    "lower_incomplete_gamma",
    "upper_gamma_complex",
    "lower_gamma_complex",
]

_EPS = np.finfo(float).eps
_EULER_GAMMA = 0.5772156649015329

Method = Literal["series", "integral", "asymptotic"]


@dataclass(frozen=True)
class EvalResult:
    """Value of a special function together with its provenance."""

    value: float
    abs_error_estimate: float
    method: Method

    def __float__(self) -> float:
        return float(self.value)


# ---------------------------------------------------------------------------
# Mittag-Leffler E_alpha(z) = sum z^n / Gamma(alpha n + 1)
# ---------------------------------------------------------------------------

#: |z| beyond which the negative real axis is handled by the integral.
ML_SERIES_RADIUS = 5.0
#: series accepted only if its rounding estimate is below this relative level
ML_SERIES_RTOL = 1e-12


def _check_ml_alpha(alpha: float) -> None:
    if not (0.0 < alpha <= 1.0) or not math.isfinite(alpha):
        raise DomainError(f"Mittag-Leffler order must lie in (0, 1], got {alpha!r}")


def _ml_series(alpha: float, z: float) -> EvalResult:
    if z == 0.0:
        return EvalResult(1.0, 0.0, "series")
    logz = math.log(abs(z))
    neg = z < 0.0
    terms: list[float] = []
    n = 0
    absum = 0.0
    while True:
        lt = n * logz - math.lgamma(alpha * n + 1.0)
        if lt > 709.0:
            return EvalResult(math.inf, math.inf, "series")
        tn = math.exp(lt)
        terms.append(-tn if (neg and n % 2) else tn)
        absum += tn
        # stop once past the peak and the remainder is negligible
        if n > 2 and tn <= _EPS * 1e-3 * absum and (n * alpha + 1.0) > abs(z) ** (1.0 / alpha):
            break
        n += 1
        if n > 100_000:
            break
    value = math.fsum(terms)
    err = _EPS * (absum + 4.0 * abs(value)) + tn
    return EvalResult(value, err, "series")


def _ml_integral(alpha: float, x: float) -> EvalResult:
    """E_alpha(-x) for 0 < alpha < 1, x > 0 from its spectral representation."""
    s, c = math.sin(alpha * math.pi), math.cos(alpha * math.pi)
    inv = 1.0 / alpha

    def f(u: float) -> float:
        r = u / x
        return math.exp(-(u**inv)) / (r * r + 2.0 * r * c + 1.0)

    # exp(-u^(1/alpha)) is negligible beyond u_cut; the rational factor
    # varies on the scale x
    u_cut = 60.0**alpha
    pts = [x] if x < u_cut else None
    v1, e1 = integrate.quad(f, 0.0, u_cut, points=pts, epsabs=0.0, epsrel=1e-13, limit=400)
    v2, e2 = integrate.quad(f, u_cut, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    pref = s / (alpha * math.pi * x)
    value = pref * (v1 + v2)
    err = pref * (e1 + e2) + 8 * _EPS * abs(value)
    return EvalResult(value, err, "integral")


def mittag_leffler_asymptotic(alpha: float, z: float) -> EvalResult:
    """Optimally truncated asymptotic series ``-sum_k z^-k / Gamma(1 - k alpha)``.

    Valid for large negative ``z``.  Terms are summed until they stop
    decreasing in magnitude; the first omitted term is the error estimate.
    """
    _check_ml_alpha(alpha)
    if z >= 0.0:
        raise DomainError("asymptotic expansion is implemented for z < 0 only")
    if alpha == 1.0:
        return EvalResult(math.exp(z), 0.0, "asymptotic")
    terms: list[float] = []
    prev = math.inf
    k = 1
    err = 0.0
    logx = math.log(-z)
    while k < 10_000:
        arg = 1.0 - k * alpha
        lmag = -k * logx + _log_rgamma_envelope(arg)
        if lmag > prev:
            err = math.exp(min(prev, 700.0))
            break
        tk = -((-1.0) ** k) * _scaled_rgamma(arg, -k * logx)
        terms.append(tk)
        prev = lmag
        k += 1
    else:
        err = math.exp(min(prev, 700.0))
    return EvalResult(math.fsum(terms), err, "asymptotic")


def _log_rgamma_envelope(x: float) -> float:
    # log of an envelope of |1/Gamma(x)| that ignores the zeros at the
    # poles; used to locate the smallest term of the asymptotic series
    if x > 0:
        return -math.lgamma(x)
    return math.lgamma(1.0 - x) - math.log(math.pi)


def _scaled_rgamma(x: float, logscale: float) -> float:
    """exp(logscale) / Gamma(x) without intermediate overflow."""
    if x > 0:
        lv = logscale - math.lgamma(x)
        return math.exp(lv) if lv > -745 else 0.0
    if x == math.floor(x):
        return 0.0
    s = math.sin(math.pi * x)
    lv = logscale + math.lgamma(1.0 - x) + math.log(abs(s)) - math.log(math.pi)
    return math.copysign(math.exp(lv), s) if lv > -745 else 0.0


def _rgamma(x: float) -> float:
    if x > 0:
        return math.exp(-math.lgamma(x))
    if x == math.floor(x):
        return 0.0
    # reflection: 1/Gamma(x) = sin(pi x) Gamma(1 - x) / pi
    return math.sin(math.pi * x) * math.exp(math.lgamma(1.0 - x)) / math.pi


def mittag_leffler(alpha: float, z: float, method: str = "auto") -> EvalResult:
    """One-parameter Mittag-Leffler function ``E_alpha(z)`` for real ``z``.

    Parameters
    ----------
    alpha:
        Order in ``(0, 1]``.
    z:
        Real argument.  Negative arguments are the main use.
    method:
        ``"auto"`` (default), ``"series"``, ``"integral"`` or
        ``"asymptotic"``.  In ``auto`` mode the power series is used for
        ``|z| <= 5`` when its rounding estimate is small; otherwise the
        spectral integral handles the negative axis.
    """
    _check_ml_alpha(alpha)
    z = float(z)
    if alpha == 1.0:
        v = math.exp(z)
        return EvalResult(v, _EPS * v, "series")
    if method == "series":
        return _ml_series(alpha, z)
    if method == "asymptotic":
        return mittag_leffler_asymptotic(alpha, z)
    if method == "integral":
        if z >= 0.0:
            raise DomainError("integral representation is implemented for z < 0")
        return _ml_integral(alpha, -z)
    if method != "auto":
        raise DomainError(f"unknown method {method!r}")
    if z >= 0.0:
        return _ml_series(alpha, z)
    if -z <= ML_SERIES_RADIUS:
        res = _ml_series(alpha, z)
        if math.isfinite(res.abs_error_estimate) and res.abs_error_estimate <= ML_SERIES_RTOL * abs(res.value):
            return res
    return _ml_integral(alpha, -z)


def mittag_leffler_values(alpha: float, z) -> np.ndarray:
    """Elementwise ``E_alpha(z)`` on an array (auto method)."""
    z = np.asarray(z, dtype=float)
    out = np.empty(z.shape)
    for idx, zi in np.ndenumerate(z):
        out[idx] = mittag_leffler(alpha, float(zi)).value
    return out


# ---------------------------------------------------------------------------
# M-Wright function  M_alpha(z) = W_{-alpha, 1-alpha}(-z)
# ---------------------------------------------------------------------------

#: series is used for z at or below this value, the integral above
WRIGHT_SERIES_MAX = 1.0


def _graded_nodes(n: int, levels: int) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on [0, pi], graded towards both ends."""
    half = np.pi / 2
    left = half * 2.0 ** -np.arange(levels, 0, -1)
    br = np.concatenate([[0.0], left, [half], np.pi - left[::-1], [np.pi]])
    br = np.unique(br)
    x, w = leggauss(n)
    a, b = br[:-1, None], br[1:, None]
    return ((b - a) / 2 * x + (a + b) / 2).ravel(), ((b - a) / 2 * w).ravel()


_PHI16, _W16 = _graded_nodes(16, 40)
_PHI10, _W10 = _graded_nodes(10, 40)


def _kanter_shape(alpha: float, phi: np.ndarray) -> np.ndarray:
    # a(phi) = (sin(alpha phi)/sin phi)^(1/(1-alpha)) * sin((1-alpha) phi)/sin(alpha phi)
    sa = np.sin(alpha * phi)
    return (sa / np.sin(phi)) ** (1.0 / (1.0 - alpha)) * np.sin((1.0 - alpha) * phi) / sa


def _wright_integral(alpha: float, z: np.ndarray, phi: np.ndarray, w: np.ndarray) -> np.ndarray:
    a = _kanter_shape(alpha, phi)
    a0 = (1.0 - alpha) * alpha ** (alpha / (1.0 - alpha))
    c = z ** (1.0 / (1.0 - alpha))
    out = np.zeros(z.shape)
    ok = c * a0 < 745.0
    if np.any(ok):
        cc = c[ok]
        # factor out the minimum of the exponent to avoid underflow
        integral = (np.exp(-np.outer(cc, a - a0)) * a) @ w
        out[ok] = z[ok] ** (alpha / (1.0 - alpha)) * integral * np.exp(-cc * a0) / (np.pi * (1.0 - alpha))
    return out


def _wright_series_terms(alpha: float, z: float) -> tuple[float, float, float]:
    """Power series of M_alpha at z; returns (value, abs-sum, last term)."""
    if z == 0.0:
        v = _rgamma(1.0 - alpha)
        return v, abs(v), 0.0
    logz = math.log(z)
    terms: list[float] = []
    absum = 0.0
    n = 0
    while True:
        x = 1.0 - alpha - alpha * n
        # envelope ignores the zeros of 1/Gamma at the poles so that a
        # vanishing term never stops the summation early
        lenv = n * logz - math.lgamma(n + 1.0) + _log_rgamma_envelope(x)
        tn = _scaled_rgamma(x, n * logz - math.lgamma(n + 1.0))
        terms.append(-tn if n % 2 else tn)
        absum += abs(tn)
        env = math.exp(lenv) if lenv > -745 else 0.0
        if n > 4 and env <= _EPS * 1e-3 * max(absum, 1e-300):
            break
        n += 1
        if n > 5000:
            break
    return math.fsum(terms), absum, tn


def wright(alpha: float, z: float) -> EvalResult:
    """M-Wright function ``W_{-alpha,1-alpha}(-z)`` for ``z >= 0``.

    ``t**-alpha * wright(alpha, tau * t**-alpha)`` is the density of the
    inverse alpha-stable subordinator at time ``t``.
    """
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"Wright order must lie in (0, 1), got {alpha!r}")
    z = float(z)
    if not (z >= 0.0) or not math.isfinite(z):
        raise DomainError(f"Wright argument must be finite and >= 0, got {z!r}")
    if z <= WRIGHT_SERIES_MAX:
        v, absum, last = _wright_series_terms(alpha, z)
        return EvalResult(max(v, 0.0), _EPS * (absum + 4 * abs(v)) + last, "series")
    zz = np.array([z])
    v16 = float(_wright_integral(alpha, zz, _PHI16, _W16)[0])
    v10 = float(_wright_integral(alpha, zz, _PHI10, _W10)[0])
    return EvalResult(v16, abs(v16 - v10) + 8 * _EPS * v16, "integral")


def wright_values(alpha: float, z) -> np.ndarray:
    """Vectorised :func:`wright` (values only)."""
    if not (0.0 < alpha < 1.0):
        raise DomainError(f"Wright order must lie in (0, 1), got {alpha!r}")
    z = np.asarray(z, dtype=float)
    flat = z.ravel()
    if np.any(~(flat >= 0.0)):
        raise DomainError("Wright argument must be >= 0")
    out = np.empty(flat.shape)
    small = flat <= WRIGHT_SERIES_MAX
    for i in np.flatnonzero(small):
        out[i] = max(_wright_series_terms(alpha, float(flat[i]))[0], 0.0)
    big = ~small
    if np.any(big):
        out[big] = _wright_integral(alpha, flat[big], _PHI16, _W16)
    return out.reshape(z.shape)


# ---------------------------------------------------------------------------
# Incomplete gamma functions (real public API, complex-capable kernels)
# ---------------------------------------------------------------------------

_CF_MAXITER = 5000


def _lower_series(nu: float, z: np.ndarray) -> np.ndarray:
    """gamma(nu, z) = z^nu e^-z sum_n z^n / (nu (nu+1) ... (nu+n)), nu not in -N."""
    term = 1.0 / nu * np.ones_like(z)
    total = term.copy()
    for n in range(1, 2000):
        term = term * z / (nu + n)
        total = total + term
        if np.all(np.abs(term) <= _EPS * 1e-2 * np.abs(total)):
            break
    return np.exp(nu * np.log(z) - z) * total


def _upper_cf(nu: float, z: np.ndarray) -> np.ndarray:
    """Gamma(nu, z) by the Legendre continued fraction (modified Lentz)."""
    tiny = 1e-300
    b = z + 1.0 - nu
    c = np.full_like(z, 1.0 / tiny)
    d = 1.0 / b
    h = d.copy()
    done = np.zeros(z.shape, dtype=bool)
    for i in range(1, _CF_MAXITER):
        an = -i * (i - nu)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < tiny, tiny, d)
        c = b + an / c
        c = np.where(np.abs(c) < tiny, tiny, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < _EPS
        if np.all(done):
            break
    return np.exp(nu * np.log(z) - z) * h


def _e1_series(z: np.ndarray) -> np.ndarray:
    # E_1(z) = -gamma_E - log z - sum_{n>=1} (-z)^n / (n n!)
    term = np.ones_like(z)
    total = np.zeros_like(z)
    for n in range(1, 400):
        term = term * (-z) / n
        add = term / n
        total = total + add
        if np.all(np.abs(add) <= _EPS * 1e-2 * np.maximum(np.abs(total), 1e-300)):
            break
    return -_EULER_GAMMA - np.log(z) - total


def _gamma_fn(nu: float) -> float:
    return math.gamma(nu)


def _gamma1p_m1_over(nu: float) -> float:
    """``(Gamma(1 + nu) - 1) / nu`` for ``|nu| <= 1/2`` without cancellation.

    Uses ``log Gamma(1 + nu) = -gamma_E nu + sum_k (-1)^k zeta(k) nu^k / k``.
    """
    if nu == 0.0:
        return -_EULER_GAMMA
    L = -_EULER_GAMMA * nu
    for k in range(2, 80):
        term = (-1) ** k * zeta(k) * nu**k / k
        L += term
        if abs(term) <= _EPS * 1e-2 * abs(L):
            break
    return math.expm1(L) / nu


def _upper_small_order(nu: float, z: np.ndarray) -> np.ndarray:
    """Gamma(nu, z) for ``|nu| <= 1/2`` and small ``|z|``.

    Splits off the cancelling parts of ``Gamma(nu) - z^nu / nu``.
    """
    head = _gamma1p_m1_over(nu)
    if nu == 0.0:
        zpow_m1 = np.log(z)
    else:
        zpow_m1 = np.expm1(nu * np.log(z)) / nu
    term = np.ones_like(z)
    total = np.zeros_like(z)
    for n in range(1, 400):
        term = term * (-z) / n
        add = term / (nu + n)
        total = total + add
        if np.all(np.abs(add) <= _EPS * 1e-2 * np.maximum(np.abs(total), 1e-300)):
            break
    return head - zpow_m1 - np.exp(nu * np.log(z)) * total


def _upper_kernel(nu: float, z: np.ndarray) -> np.ndarray:
    """Gamma(nu, z) for arrays z with Re z > 0 (or z real positive)."""
    out = np.empty(z.shape, dtype=z.dtype)
    az = np.abs(z)
    if nu > 0:
        use_series = az <= nu + 1.0
    else:
        use_series = az <= 1.0
    if np.any(~use_series):
        out[~use_series] = _upper_cf(nu, z[~use_series])
    if np.any(use_series):
        zs = z[use_series]
        if abs(nu) <= 0.5 or (nu < 0 and nu != math.floor(nu)):
            # orders near or below zero: start at nu0 = nu - round(nu) and
            # recur downward, Gamma(a - 1, z) = (Gamma(a, z) - z^(a-1) e^-z) / (a - 1)
            m = int(round(nu))
            a = nu - m
            val = _upper_small_order(a, zs)
            for _ in range(-m):
                a -= 1.0
                val = (val - np.exp(a * np.log(zs) - zs)) / a
            out[use_series] = val
        elif nu == math.floor(nu) and nu <= 0:
            # integer orders <= 0: start from E_1 and recur upward in the
            # sense Gamma(nu, z) = (Gamma(nu + 1, z) - z^nu e^-z) / nu
            val = _e1_series(zs)
            for m in range(-1, int(nu) - 1, -1):
                val = (val - zs**m * np.exp(-zs)) / m
            out[use_series] = val
        else:
            out[use_series] = _gamma_fn(nu) - _lower_series(nu, zs)
    return out


def upper_gamma_complex(nu: float, z) -> np.ndarray:
    """Vectorised ``Gamma(nu, z)`` for complex ``z`` off the negative axis."""
    z = np.asarray(z, dtype=complex)
    return _upper_kernel(float(nu), z.ravel()).reshape(z.shape)


def lower_gamma_complex(nu: float, z) -> np.ndarray:
    """Vectorised ``gamma(nu, z)`` for ``nu > 0`` and complex ``z`` off the negative axis."""
    if not nu > 0:
        raise DomainError("lower incomplete gamma needs nu > 0")
    z = np.asarray(z, dtype=complex)
    flat = z.ravel()
    out = np.empty(flat.shape, dtype=complex)
    small = np.abs(flat) <= nu + 1.0
    if np.any(small):
        out[small] = _lower_series(float(nu), flat[small])
    if np.any(~small):
        out[~small] = math.gamma(nu) - _upper_cf(float(nu), flat[~small])
    return out.reshape(z.shape)


def upper_incomplete_gamma(nu: float, z: float) -> float:
    """Upper incomplete gamma ``Gamma(nu, z) = int_z^inf e^-t t^(nu-1) dt``.

    Continued fraction for ``z > nu + 1``, power series otherwise
    (``z <= 1`` for ``nu <= 0``).  ``nu`` may be zero or negative.
    """
    z = float(z)
    if not (z > 0.0) or not math.isfinite(z):
        raise DomainError(f"incomplete gamma needs z > 0, got {z!r}")
    if not math.isfinite(nu):
        raise DomainError("order must be finite")
    return float(_upper_kernel(float(nu), np.array([z]))[0])


def upper_incomplete_gamma_values(nu: float, z) -> np.ndarray:
    """Vectorised real :func:`upper_incomplete_gamma`."""
    z = np.asarray(z, dtype=float)
    if np.any(~(z > 0.0)):
        raise DomainError("incomplete gamma needs z > 0")
    return _upper_kernel(float(nu), z.ravel()).reshape(z.shape)


def lower_incomplete_gamma(nu: float, z: float) -> float:
    """Lower incomplete gamma ``gamma(nu, z)`` for ``nu > 0``, ``z >= 0``."""
    if not nu > 0:
        raise DomainError("lower incomplete gamma needs nu > 0")
    z = float(z)
    if z < 0:
        raise DomainError("lower incomplete gamma needs z >= 0")
    if z == 0.0:
        return 0.0
    if z <= nu + 1.0:
        return float(_lower_series(float(nu), np.array([z]))[0])
    return math.gamma(nu) - float(_upper_cf(float(nu), np.array([z]))[0])

