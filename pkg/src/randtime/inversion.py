"""Numerical inversion of Laplace transforms.

Three methods, each usable as an oracle for the others:

* Gaver-Stehfest: real-axis samples only, weights from exact rationals.
* fixed Talbot: deformed Bromwich contour, needs complex evaluation and
  decay of ``F`` in the left half-plane.
* Euler (Fourier series on a vertical line with binomial averaging of the
  tail): complex evaluation on ``Re lam > 0`` only, which makes it robust
  for transforms of the form ``K(lam) exp(-tau phi(lam))`` whose modulus
  grows to the left of the imaginary axis.
* de Hoog: the same Fourier series accelerated by a continued-fraction
  (Pade) summation; also confined to ``Re lam > 0`` and much less
  sensitive to originals with kinks.

Transforms are called with a 1-d array of abscissae and must return an
array whose leading axis matches; trailing axes (for example a grid of
``tau`` values) are carried through, so a whole slice of originals can be
recovered from a single batch of transform evaluations.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import DomainError, InversionOverflowError, NonFiniteError

__all__ = [
    "gaver_stehfest_weights",
    "invert_gaver_stehfest",
    "invert_talbot",
    "invert_euler",
    "invert_dehoog",
    "invert",
    "DEFAULT_GS_N",
    "DEFAULT_TALBOT_M",
    "DEFAULT_EULER_M",
]

DEFAULT_GS_N = 14
DEFAULT_TALBOT_M = 32
DEFAULT_EULER_M = 17
DEFAULT_DEHOOG_M = 30
#: target error fixing the abscissa of the de Hoog line
DEHOOG_TOL = 1e-8

Transform = Callable[[np.ndarray], np.ndarray]


def _check_t(t: float) -> float:
    t = float(t)
    if not (t > 0.0) or not math.isfinite(t):
        raise DomainError(f"inversion time must be finite and > 0, got {t!r}")
    return t


@lru_cache(maxsize=None)
def _gs_weights_exact(n: int) -> tuple[Fraction, ...]:
    half = n // 2
    out = []
    for k in range(1, n + 1):
        acc = Fraction(0)
        for j in range((k + 1) // 2, min(k, half) + 1):
            num = Fraction(j**half) * math.factorial(2 * j)
            den = (
                math.factorial(half - j)
                * math.factorial(j)
                * math.factorial(j - 1)
                * math.factorial(k - j)
                * math.factorial(2 * j - k)
            )
            acc += num / den
        out.append((-1) ** (k + half) * acc)
    return tuple(out)


def gaver_stehfest_weights(n: int) -> np.ndarray:
    """Stehfest weights ``V_k`` (k = 1..n) rounded once from exact rationals."""
    if n % 2 or not (2 <= n <= 40):
        raise DomainError(f"Gaver-Stehfest order must be even and in [2, 40], got {n}")
    return np.array([float(v) for v in _gs_weights_exact(n)])


def _evaluate(F: Transform, lam: np.ndarray) -> np.ndarray:
    vals = np.asarray(F(lam))
    if vals.shape[:1] != lam.shape:
        raise DomainError("transform must return an array whose leading axis matches its input")
    return vals


def invert_gaver_stehfest(F: Transform, t: float, n: int = DEFAULT_GS_N):
    """Gaver-Stehfest inversion ``ln2/t * sum_k V_k F(k ln2 / t)``.

    ``n`` must be even and in [8, 18]; larger orders lose all accuracy in
    double precision.
    """
    t = _check_t(t)
    if n % 2 or not (8 <= n <= 18):
        raise DomainError(f"Gaver-Stehfest order must be even and in [8, 18], got {n}")
    V = gaver_stehfest_weights(n)
    a = math.log(2.0) / t
    lam = a * np.arange(1, n + 1, dtype=float)
    vals = np.real(_evaluate(F, lam))
    with np.errstate(over="ignore", invalid="ignore"):
        terms = np.tensordot(V, vals, axes=(0, 0))
        out = a * terms
    if not np.all(np.isfinite(out)):
        raise InversionOverflowError("Gaver-Stehfest sum left the floating-point range")
    return float(out) if np.ndim(out) == 0 else out


def invert_talbot(F: Transform, t: float, M: int = DEFAULT_TALBOT_M):
    """Fixed-Talbot inversion with ``M`` nodes.

    Contour ``lam(theta) = r theta (cot theta + i)``, ``r = 2M / (5t)``.
    Raises :class:`NonFiniteError` if any contour value is NaN or infinite.
    """
    t = _check_t(t)
    if M < 16:
        raise DomainError(f"Talbot needs M >= 16, got {M}")
    r = 2.0 * M / (5.0 * t)
    k = np.arange(1, M)
    theta = k * np.pi / M
    cot = 1.0 / np.tan(theta)
    lam = np.concatenate([[r + 0j], r * theta * (cot + 1j)])
    sigma = theta + (theta * cot - 1.0) * cot
    with np.errstate(all="ignore"):
        vals = np.asarray(_evaluate(F, lam), dtype=complex)
        weights = np.concatenate([[0.5 * np.exp(r * t)], np.exp(t * lam[1:]) * (1.0 + 1j * sigma)])
        shape = (-1,) + (1,) * (vals.ndim - 1)
        terms = vals * weights.reshape(shape)
        if not np.all(np.isfinite(terms)):
            raise NonFiniteError("transform is not finite on the Talbot contour")
        out = r / M * np.real(terms.sum(axis=0))
    if not np.all(np.isfinite(out)):
        raise NonFiniteError("Talbot sum is not finite")
    return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=None)
def _euler_coefficients(M: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(2 * M + 1)
    beta = M * math.log(10.0) / 3.0 + 1j * math.pi * k
    xi = np.ones(2 * M + 1)
    xi[0] = 0.5
    xi[2 * M] = 2.0**-M
    for j in range(1, M):
        xi[2 * M - j] = xi[2 * M - j + 1] + 2.0**-M * math.comb(M, j)
    eta = (-1.0) ** k * xi
    return beta, eta


def invert_euler(F: Transform, t: float, M: int = DEFAULT_EULER_M):
    """Euler-summation inversion along ``Re lam = M ln(10) / (3t)``.

    Uses ``2M + 1`` transform values, all with positive real part.
    """
    t = _check_t(t)
    if M < 5:
        raise DomainError(f"Euler inversion needs M >= 5, got {M}")
    beta, eta = _euler_coefficients(M)
    with np.errstate(all="ignore"):
        vals = np.asarray(_evaluate(F, beta / t), dtype=complex)
        out = 10.0 ** (M / 3.0) / t * np.real(np.tensordot(eta, vals, axes=(0, 0)))
    if not np.all(np.isfinite(out)):
        raise NonFiniteError("Euler inversion produced a non-finite value")
    return float(out) if np.ndim(out) == 0 else out


def invert_dehoog(F: Transform, t: float, M: int = DEFAULT_DEHOOG_M, tol: float = DEHOOG_TOL):
    """de Hoog inversion with ``2M + 1`` samples on ``Re lam = -ln(tol) / (4t)``.

    The trapezoid (Fourier) series over period ``2T = 4t`` is summed as a
    continued fraction built by the quotient-difference algorithm and
    closed with the usual improved remainder.
    """
    t = _check_t(t)
    if M < 4:
        raise DomainError(f"de Hoog inversion needs M >= 4, got {M}")
    T = 2.0 * t
    n = 2 * M + 1
    gam = -math.log(tol) / (2.0 * T)
    lam = gam + 1j * math.pi * np.arange(n) / T
    with np.errstate(all="ignore"):
        fp = np.asarray(_evaluate(F, lam), dtype=complex)
        tail = fp.shape[1:]
        # quotient-difference table
        e = np.zeros((n, M + 1) + tail, dtype=complex)
        q = np.zeros((n, M) + tail, dtype=complex)
        q[0, 0] = fp[1] / (fp[0] / 2.0)
        q[1 : 2 * M, 0] = fp[2 : 2 * M + 1] / fp[1 : 2 * M]
        for r in range(1, M + 1):
            mr = 2 * (M - r) + 1
            e[:mr, r] = q[1 : mr + 1, r - 1] - q[:mr, r - 1] + e[1 : mr + 1, r - 1]
            if r < M:
                mq = mr + 1
                q[:mq, r] = q[1 : mq + 1, r - 1] * e[1 : mq + 1, r] / e[:mq, r]
        d = np.empty((n,) + tail, dtype=complex)
        d[0] = fp[0] / 2.0
        d[1::2] = -q[0, :M]
        d[2::2] = -e[0, 1:]
        z = np.exp(1j * math.pi * t / T)
        A0, A1 = np.zeros(tail, dtype=complex), d[0].copy()
        B0, B1 = np.ones(tail, dtype=complex), np.ones(tail, dtype=complex)
        for i in range(1, 2 * M):
            A0, A1 = A1, A1 + d[i] * A0 * z
            B0, B1 = B1, B1 + d[i] * B0 * z
        brem = (1.0 + (d[2 * M - 1] - d[2 * M]) * z) / 2.0
        rem = -brem * (1.0 - np.sqrt(1.0 + d[2 * M] * z / brem**2))
        out = math.exp(gam * t) / T * np.real((A1 + rem * A0) / (B1 + rem * B0))
        # samples that underflowed (subnormal or 0) break the qd ratios; there
        # the value is negligible and the plain trapezoid sum is used instead
        lost = ~np.isfinite(out) & np.any(np.abs(fp) < np.finfo(float).tiny, axis=0)
        if np.any(lost):
            plain = math.exp(gam * t) / T * np.real(fp[0] / 2.0 + np.tensordot(z ** np.arange(1, n), fp[1:], axes=1))
            out = np.where(lost, plain, out)
    if not np.all(np.isfinite(out)):
        raise NonFiniteError("de Hoog inversion produced a non-finite value")
    return float(out) if np.ndim(out) == 0 else out


def invert(F: Transform, t: float, method: str = "euler", **kw):
    """Dispatch to one of the inversion methods by name."""
    if method == "euler":
        return invert_euler(F, t, **kw)
    if method == "talbot":
        return invert_talbot(F, t, **kw)
    if method in ("gaver-stehfest", "gs"):
        return invert_gaver_stehfest(F, t, **kw)
    if method == "dehoog":
        return invert_dehoog(F, t, **kw)
    raise DomainError(f"unknown inversion method {method!r}")
