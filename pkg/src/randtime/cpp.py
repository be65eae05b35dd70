"""Laplace functional of inverse compound Poisson subordinators and decay bounds.

For a compound Poisson subordinator with arrival rate ``lam`` and jumps
``R_i``, ``E(t)`` is the arrival time of the first partial sum
``S_k = R_1 + ... + R_k`` reaching ``t``.  With ``s = c beta`` and
``q = lam / (lam + s)``::

    E exp(-s E(t)) = (s / (lam + s)) * sum_{k >= 1} P(S_k >= t) q^k,   t > 0,

and the value is 1 at ``t = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import gammaincc

from .catalog import Deterministic, Exponential, JumpDist, Pareto
from .errors import DomainError, NoFeasibleRateError, TruncationTooSmallError

__all__ = [
    "CppBoundInput",
    "CppSeriesValue",
    "inverse_cpp_laplace",
    "inverse_cpp_laplace_detail",
    "deterministic_closed_form",
    "partial_sum_tail",
    "polynomial_bound",
    "polynomial_constant",
    "exponential_bound",
    "ETA_MARGIN",
]

#: safety margin on the exponential-rate constraint
ETA_MARGIN = 1e-6
#: grid cells used for Pareto partial-sum convolutions
PARETO_CELLS = 4096


@dataclass(frozen=True)
class CppBoundInput:
    """Compound Poisson data with the dissipativity rate ``c`` and Hoelder data.

    ``holder_constant`` is ``C_f`` in ``|f(x) - f(y)| <= C_f |x - y|^beta``.
    """

    rate: float
    jumps: JumpDist
    c: float
    beta: float
    moment_order: Optional[float] = None
    mgf_radius: Optional[float] = None
    holder_constant: float = 1.0

    def __post_init__(self):
        for name in ("rate", "c", "holder_constant"):
            v = float(getattr(self, name))
            if not (v > 0) or not math.isfinite(v):
                raise DomainError(f"{name} must be finite and > 0")
        if not (0.0 < self.beta <= 1.0):
            raise DomainError("beta must lie in (0, 1]")
        if self.moment_order is not None:
            if not (self.moment_order > 0) or not math.isfinite(self.jumps.moment(self.moment_order)):
                raise DomainError(f"E[R^{self.moment_order:g}] is not finite for {self.jumps.variant} jumps")
        if self.mgf_radius is not None:
            if not (self.mgf_radius > 0) or not math.isfinite(self.jumps.mgf(self.mgf_radius)):
                raise DomainError(f"E[exp({self.mgf_radius:g} R)] is not finite for {self.jumps.variant} jumps")

    @property
    def s(self) -> float:
        return self.c * self.beta

    @property
    def q(self) -> float:
        return self.rate / (self.rate + self.s)


@dataclass(frozen=True)
class CppSeriesValue:
    value: float
    error_estimate: float
    terms: int
    approximate: bool


def _pareto_bounds(jumps: Pareto, t: float, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Lower and upper bounds on ``P(S_k >= t)``, k = 1..K, by grid convolution.

    Rounding each jump down (up) to the grid gives a stochastically smaller
    (larger) sum, hence a lower (upper) bound.
    """
    n = PARETO_CELLS
    dx = t / n
    cdf = 1.0 - np.asarray(jumps.tail(dx * np.arange(n + 1)), dtype=float)
    cell = np.diff(cdf)  # P(R in [i dx, (i+1) dx)); mass beyond t is dropped
    out = []
    # round down: cell i sits on grid point i; round up: on i + 1
    for pmf in (np.concatenate([cell, [0.0]]), np.concatenate([[0.0], cell])):
        cur = pmf
        probs = []
        for k in range(1, K + 1):
            if k > 1:
                cur = np.convolve(cur, pmf)[: n + 1]
            probs.append(1.0 - cur[:n].sum())  # grid points below t
        out.append(np.clip(np.array(probs), 0.0, 1.0))
    return out[0], out[1]


def partial_sum_tail(jumps: JumpDist, t: float, K: int) -> tuple[np.ndarray, bool]:
    """``P(S_k >= t)`` for k = 1..K and whether the values are approximate."""
    k = np.arange(1, K + 1, dtype=float)
    if isinstance(jumps, Exponential):
        return gammaincc(k, jumps.rate * t), False
    if isinstance(jumps, Deterministic):
        return (k * jumps.r >= t).astype(float), False
    if isinstance(jumps, Pareto):
        lo, hi = _pareto_bounds(jumps, t, K)
        return 0.5 * (lo + hi), True
    raise DomainError(f"no partial-sum law for {jumps.variant} jumps")


def _terms_for(inp: CppBoundInput, t: float, tol: float) -> int:
    """Terms for an absolute tail below ``tol`` plus twice the typical number
    of jumps needed to reach ``t``, so that small values keep relative accuracy."""
    q = inp.q
    base = max(1, int(math.ceil(math.log(tol) / math.log(q))) - 1)
    mean = inp.jumps.mean
    if isinstance(inp.jumps, Pareto) and not math.isfinite(mean):
        mean = inp.jumps.scale  # S_k >= k * scale
    return base + int(math.ceil(2.0 * t / mean))


def inverse_cpp_laplace_detail(inp: CppBoundInput, t: float, K: Optional[int] = None, tol: float = 1e-13) -> CppSeriesValue:
    """Series value with truncation (and, for Pareto, discretisation) error."""
    t = float(t)
    if not (t >= 0) or not math.isfinite(t):
        raise DomainError("t must be finite and >= 0")
    if t == 0.0:
        return CppSeriesValue(1.0, 0.0, 0, False)
    q = inp.q
    if K is None:
        K = _terms_for(inp, t, tol)
    if K < 1:
        raise DomainError("truncation K must be >= 1")
    tail = q ** (K + 1)
    if tail > tol:
        raise TruncationTooSmallError(f"geometric tail {tail:.3g} exceeds tolerance {tol:.3g}; increase K")
    k = np.arange(1, K + 1, dtype=float)
    w = (1.0 - q) * q**k
    if isinstance(inp.jumps, Pareto):
        lo, hi = _pareto_bounds(inp.jumps, t, K)
        v_lo, v_hi = float(np.dot(w, lo)), float(np.dot(w, hi))
        return CppSeriesValue(0.5 * (v_lo + v_hi), 0.5 * (v_hi - v_lo) + tail, K, True)
    p, approx = partial_sum_tail(inp.jumps, t, K)
    return CppSeriesValue(math.fsum(w * p), tail, K, approx)


def inverse_cpp_laplace(inp: CppBoundInput, t: float, K: Optional[int] = None, tol: float = 1e-13) -> float:
    """``E exp(-c beta E(t))`` from the partial-sum series, truncated after ``K`` terms.

    ``K`` defaults to the count whose geometric tail ``q^(K+1)`` is below
    ``tol``, extended by twice the typical number of jumps needed to reach
    ``t``; an explicit ``K`` with a tail above ``tol`` is rejected.
    """
    return inverse_cpp_laplace_detail(inp, t, K, tol).value


def deterministic_closed_form(inp: CppBoundInput, t: float) -> float:
    """``q^m`` with ``m`` the number of unit jumps needed to reach ``t``."""
    if not isinstance(inp.jumps, Deterministic):
        raise DomainError("closed form applies to Deterministic jumps")
    if t == 0:
        return 1.0
    r = inp.jumps.r
    m = math.ceil(t / r)
    # guard the rounding of t / r so that m r >= t exactly as in the series
    while (m - 1) * r >= t and m > 1:
        m -= 1
    while m * r < t:
        m += 1
    return inp.q**m


def polynomial_constant(inp: CppBoundInput, series_tol: float = 1e-12) -> float:
    """``C = C_f (s/(lam+s)) E[R^a] sum_k k^(a+1) q^k`` for moment order ``a``."""
    a = inp.moment_order
    if a is None:
        raise DomainError("polynomial bound needs a moment order")
    q = inp.q
    total, k = 0.0, 1
    peak = (a + 1.0) / -math.log(q)
    while True:
        term = k ** (a + 1.0) * q**k
        total += term
        if k > peak and term <= series_tol * total:
            break
        k += 1
    return inp.holder_constant * (1.0 - q) * inp.jumps.moment(a) * total


def polynomial_bound(inp: CppBoundInput, t: float, x_dist: float) -> float:
    """``C t^(-a) x_dist^beta`` bound on ``|v(t, x) - f(x0)|``."""
    t, x_dist = float(t), float(x_dist)
    if not (t > 0):
        raise DomainError("t must be > 0")
    if x_dist < 0:
        raise DomainError("x_dist must be >= 0")
    if x_dist == 0:
        return 0.0
    return polynomial_constant(inp) / t**inp.moment_order * x_dist**inp.beta


def _rate_ratio(inp: CppBoundInput, eta: float) -> float:
    return inp.rate * inp.jumps.mgf(eta) / (inp.rate + inp.s)


def exponential_bound(inp: CppBoundInput, t: float, x_dist: float) -> tuple[float, float]:
    """Largest admissible rate ``eta`` and the bound ``C x_dist^beta exp(-eta t)``.

    ``eta`` solves ``lam E[exp(eta R)] / (lam + s) <= 1 - ETA_MARGIN`` by
    bisection inside ``(0, mgf_radius)``; without a radius, Exponential
    jumps use their rate and Deterministic jumps an unbounded bracket.
    """
    t, x_dist = float(t), float(x_dist)
    if not (t >= 0) or x_dist < 0:
        raise DomainError("need t >= 0 and x_dist >= 0")
    target = 1.0 - ETA_MARGIN
    if _rate_ratio(inp, 0.0) > target:
        raise NoFeasibleRateError("the rate constraint fails already at eta = 0")
    delta = inp.mgf_radius
    if delta is None:
        if isinstance(inp.jumps, Exponential):
            delta = inp.jumps.rate
        elif isinstance(inp.jumps, Deterministic):
            delta = 1.0
            while _rate_ratio(inp, delta) <= target:
                delta *= 2.0
        else:
            raise DomainError(f"{inp.jumps.variant} jumps have no exponential moments")
    lo, hi = 0.0, float(delta)
    if _rate_ratio(inp, hi) <= target:
        eta = hi
    else:
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if _rate_ratio(inp, mid) <= target:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * max(hi, 1.0):
                break
        eta = lo
    if not eta > 0:
        raise NoFeasibleRateError("no positive admissible rate")
    rho = _rate_ratio(inp, eta)
    C = inp.holder_constant * (1.0 - inp.q) * rho / (1.0 - rho)
    bound = 0.0 if x_dist == 0 else C * x_dist**inp.beta * math.exp(-eta * t)
    return eta, bound
