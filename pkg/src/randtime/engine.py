"""Time-changed evolutions ``v(t, x) = E f(X(E(t); x))``.

``v`` is evaluated pointwise in ``t`` by integrating the undelayed profile
``u(tau) = f(X(tau; x))`` against the density of ``E(t)``, or by Monte
Carlo over sampled inverse subordinators.  The module also provides the
generalised fractional derivative ``d/dt int_0^t k(t - s) (v(s) - v(0)) ds``,
decay fits, mean trajectories and (renormalised) potentials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from .catalog import CompoundPoisson, SubordinatorSpec, kernel_double_integral, kernel_integral
from .dynamics import Flow
from .errors import (
    DomainError,
    GridTooCoarseError,
    InsufficientPointsError,
    NonPositiveValueError,
    QuadratureError,
    UnsupportedSpecError,
)
from .inverse import DensitySlice, density_slice
from .sampling import sample_inverse_batch

__all__ = [
    "SubordinatedSolution",
    "subordinate",
    "subordinate_quadrature",
    "subordinate_monte_carlo",
    "profile",
    "gfd_apply",
    "gfd_weights",
    "ResidualProfile",
    "fractional_residual",
    "DecayFit",
    "decay_fit",
    "mean_trajectory",
    "PotentialResult",
    "potential",
    "RenormalizedPotential",
    "renormalized_potential",
    "MIN_CELLS",
]

#: fewest grid cells on [0, t] accepted by the fractional derivative
MIN_CELLS = 16

_GL_X, _GL_W = leggauss(16)


def profile(f: Callable, flow: Flow, x=None) -> Callable[[np.ndarray], np.ndarray]:
    """``tau -> f(X(tau; x))`` as a vectorised callable."""

    def u(tau):
        return np.asarray(f(flow(np.asarray(tau, dtype=float), x)), dtype=float)

    return u


@dataclass(frozen=True)
class SubordinatedSolution:
    """Value of ``v(t) = int u(tau) G_t(tau) dtau`` with its provenance."""

    spec: SubordinatorSpec
    u: Callable
    t: float
    value: float
    method: str
    error_estimate: float
    n_samples: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if self.method not in ("quadrature", "monte_carlo"):
            raise DomainError(f"unknown method {self.method!r}")
        if not math.isfinite(self.error_estimate):
            raise DomainError("error estimate must be finite")
        if self.method == "monte_carlo" and (self.n_samples is None or self.seed is None):
            raise DomainError("Monte Carlo results need n_samples and seed")

    def __float__(self) -> float:
        return self.value


def _against_slice(u, sl: DensitySlice) -> tuple[float, float]:
    """(integral, sup of |u - u(0)| on the grid), with ``u(0)`` taken out exactly."""
    u0 = float(np.asarray(u(np.zeros(1)), dtype=float).reshape(-1)[0])
    du = np.asarray(u(sl.tau), dtype=float) - u0
    return u0 + float(np.dot(sl.weights, du * sl.g)), float(np.max(np.abs(du), initial=0.0))


def _quadrature(u, spec: SubordinatorSpec, t: float, tol: float) -> tuple[float, float]:
    if isinstance(spec, CompoundPoisson):
        raise UnsupportedSpecError("compound Poisson inverses have atoms; use subordinate_monte_carlo")
    t = float(t)
    if t == 0.0:
        return float(np.asarray(u(np.zeros(1))).reshape(-1)[0]), 0.0
    if not (t > 0.0):
        raise DomainError("t must be >= 0")
    prev = None
    for refine in range(3):
        sl = density_slice(spec, t, refine=refine)
        val, sup = _against_slice(u, sl)
        # the constant part is exact, so the tail costs sup|u - u(0)| * tail
        tail = sup * sl.tail_bound
        if prev is not None:
            err = abs(val - prev) + tail
            if err <= tol:
                return val, err
        prev = val
    raise QuadratureError(f"quadrature error {err:.3g} above tolerance {tol:.3g} at t={t:g}")


def subordinate_quadrature(u: Callable, spec: SubordinatorSpec, t: float, tol: float = 1e-6) -> float:
    """``int_0^inf u(tau) G_t(tau) dtau`` over a density slice.

    ``u`` must accept an array of ``tau``.  The error estimate (grid
    refinement plus ``sup|u - u(0)|`` times the slice tail bound) must stay
    below ``tol``.
    """
    return _quadrature(u, spec, t, tol)[0]


def subordinate_monte_carlo(f: Callable, flow: Flow, x, spec: SubordinatorSpec, t, n: int, seed: int):
    """Mean and standard error of ``f(X(E_i(t); x))`` over ``n`` inverse draws.

    ``t`` may be an array; the same paths are then used for every level.
    """
    if n < 100:
        raise DomainError("Monte Carlo needs n >= 100")
    E = sample_inverse_batch(spec, t, n, seed)
    vals = np.asarray(f(flow(E, x)), dtype=float)
    mean = vals.mean(axis=0)
    se = vals.std(axis=0, ddof=1) / math.sqrt(n)
    if np.ndim(t) == 0:
        return float(mean), float(se)
    return mean, se


def subordinate(
    u: Callable,
    spec: SubordinatorSpec,
    t: float,
    method: str = "quadrature",
    tol: float = 1e-6,
    n: Optional[int] = None,
    seed: Optional[int] = None,
) -> SubordinatedSolution:
    """Subordinated value with error estimate, by quadrature or Monte Carlo.

    For Monte Carlo ``u`` is evaluated directly at the sampled ``E(t)``.
    """
    if method == "quadrature":
        val, err = _quadrature(u, spec, t, tol)
        return SubordinatedSolution(spec, u, float(t), val, "quadrature", err)
    if method == "monte_carlo":
        if n is None or seed is None:
            raise DomainError("Monte Carlo needs n and seed")
        if n < 100:
            raise DomainError("Monte Carlo needs n >= 100")
        vals = np.asarray(u(sample_inverse_batch(spec, float(t), n, seed)), dtype=float)
        se = float(vals.std(ddof=1) / math.sqrt(n))
        return SubordinatedSolution(spec, u, float(t), float(vals.mean()), "monte_carlo", se, n, seed)
    raise DomainError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# generalised fractional derivative
# ---------------------------------------------------------------------------


def gfd_weights(spec: SubordinatorSpec, h: float, n: int) -> np.ndarray:
    """Product-integration weights ``w_m = int k(s) phi_m(s) ds``, m = 0..n.

    ``phi_0`` is the half hat on ``[0, h]`` and ``phi_m`` the hat centred at
    ``m h``; all moments come from the exact double integral ``K2`` of ``k``.
    """
    K2 = np.asarray(kernel_double_integral(spec, h * np.arange(n + 2, dtype=float)), dtype=float)
    w = np.empty(n + 1)
    w[0] = K2[1] / h
    w[1:] = (K2[2:] - 2.0 * K2[1:-1] + K2[:-2]) / h
    return w


def _grid_values(v, t: float, h: float) -> np.ndarray:
    n = int(round(t / h))
    if abs(n * h - t) > 1e-9 * max(t, 1.0):
        raise DomainError(f"t={t:g} is not a grid point for step h={h:g}")
    if n < MIN_CELLS:
        raise GridTooCoarseError(f"only {n} cells on [0, {t:g}]; need at least {MIN_CELLS}")
    if callable(v):
        return np.asarray(v(h * np.arange(n + 1)), dtype=float)
    vals = np.asarray(v, dtype=float)
    if vals.size < n + 1:
        raise DomainError("not enough grid values for t")
    return vals[: n + 1]


def gfd_apply(spec: SubordinatorSpec, v, t: float, h: float) -> float:
    """Generalised fractional derivative of ``v`` at ``t``.

    ``v`` is a callable or the array of values on ``0, h, 2h, ...``.  The
    convolution ``J(t_n) = int_0^{t_n} k(t_n - s) (v(s) - v(0)) ds`` is
    integrated exactly for the piecewise-linear interpolant of ``v`` and
    differentiated by a backward difference; first order in ``h``.
    """
    t, h = float(t), float(h)
    if not (t > 0 and h > 0):
        raise DomainError("need t > 0 and h > 0")
    vals = _grid_values(v, t, h)
    n = vals.size - 1
    w = gfd_weights(spec, h, n)
    dv = vals - vals[0]
    J_n = float(np.dot(w[: n][::-1], dv[1:]))  # w_{n-j}, j = 1..n
    J_prev = float(np.dot(w[: n - 1][::-1], dv[1:n]))
    return (J_n - J_prev) / h


def _gfd_profile(spec: SubordinatorSpec, vals: np.ndarray, h: float) -> np.ndarray:
    """Derivative at every grid point 1..N (index 0 is left as NaN)."""
    N = vals.size - 1
    w = gfd_weights(spec, h, N)
    dv = vals - vals[0]
    # J_n = sum_{j=1}^n w_{n-j} dv_j, a causal convolution
    J = np.concatenate([[0.0], np.convolve(dv[1:], w[:N])[:N]])
    D = np.full(N + 1, np.nan)
    D[1:] = np.diff(J) / h
    return D


@dataclass(frozen=True)
class ResidualProfile:
    """``D v - L v`` on grid points with at least :data:`MIN_CELLS` cells."""

    t: np.ndarray
    residual: np.ndarray
    h: float

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.residual)))


def fractional_residual(f: Callable, flow: Flow, x, spec: SubordinatorSpec, T: float, h: float, dx: float = 1e-4) -> ResidualProfile:
    """Residual of the time-fractional equation ``D v = b . grad v`` along a grid.

    ``v`` is evaluated by quadrature at ``x`` and at ``x +- dx e_i``; the
    spatial derivative uses central differences, ``D`` uses :func:`gfd_apply`.
    """
    if flow.field is None:
        raise DomainError("flow must carry its vector field")
    T, h = float(T), float(h)
    N = int(round(T / h))
    if N < MIN_CELLS:
        raise GridTooCoarseError(f"only {N} cells on [0, {T:g}]")
    x = flow.x0 if x is None else np.atleast_1d(np.asarray(x, dtype=float))
    ts = h * np.arange(N + 1)

    def v_on_grid(point):
        u = profile(f, flow, point)
        out = np.empty(N + 1)
        out[0] = float(u(np.zeros(1))[0])
        for i in range(1, N + 1):
            sl = density_slice(spec, ts[i])
            out[i] = _against_slice(u, sl)[0]
        return out

    v0 = v_on_grid(x)
    b = flow.field(x)
    Lv = np.zeros(N + 1)
    for i in range(flow.dim):
        if b[i] == 0.0:
            continue
        e = np.zeros(flow.dim)
        e[i] = dx
        Lv += b[i] * (v_on_grid(x + e) - v_on_grid(x - e)) / (2.0 * dx)
    D = _gfd_profile(spec, v0, h)
    keep = np.arange(N + 1) >= MIN_CELLS
    return ResidualProfile(ts[keep], (D - Lv)[keep], h)


# ---------------------------------------------------------------------------
# decay fits
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayFit:
    """Least-squares line ``log v = log_constant + exponent log t``."""

    exponent: float
    log_constant: float
    r_squared: float
    fit_window: tuple[float, float]
    n_points: int = 0

    def __post_init__(self):
        lo, hi = self.fit_window
        if not lo < hi:
            raise DomainError("fit window must satisfy t_lo < t_hi")


def decay_fit(samples: Sequence[tuple[float, float]], window: Optional[tuple[float, float]] = None) -> DecayFit:
    """Fit a power law to ``(t, v)`` pairs inside ``window`` (inclusive)."""
    arr = np.asarray(samples, dtype=float).reshape(-1, 2)
    t, v = arr[:, 0], arr[:, 1]
    if window is None:
        window = (float(t.min()), float(t.max())) if t.size else (0.0, 1.0)
    lo, hi = window
    inside = (t >= lo) & (t <= hi)
    if inside.sum() < 8:
        raise InsufficientPointsError(f"need at least 8 points in [{lo:g}, {hi:g}], got {int(inside.sum())}")
    t, v = t[inside], v[inside]
    if np.any(~(v > 0)) or np.any(~(t > 0)):
        raise NonPositiveValueError("decay fits need t > 0 and v > 0")
    X, Y = np.log(t), np.log(v)
    slope, intercept = np.polyfit(X, Y, 1)
    resid = Y - (intercept + slope * X)
    ss_tot = float(np.sum((Y - Y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(float(slope), float(intercept), min(max(r2, 0.0), 1.0), (float(lo), float(hi)), int(t.size))


# ---------------------------------------------------------------------------
# trajectories and potentials
# ---------------------------------------------------------------------------


def mean_trajectory(flow: Flow, x, spec: SubordinatorSpec, t: float) -> np.ndarray:
    """``E X(E(t); x)``, componentwise quadrature of the flow against ``G_t``."""
    x = flow.x0 if x is None else np.atleast_1d(np.asarray(x, dtype=float))
    t = float(t)
    if t == 0.0:
        return x.copy()
    sl = density_slice(spec, t)
    dX = flow(sl.tau, x) - x
    return x + (sl.weights * sl.g) @ dX


@dataclass(frozen=True)
class PotentialResult:
    """Outcome of :func:`potential`; ``value`` is ``inf`` when divergent."""

    value: float
    divergent: bool
    error_estimate: float
    partial_T: np.ndarray = field(repr=False)
    partial_integrals: np.ndarray = field(repr=False)


#: increments over successive doublings shrinking slower than this flag divergence
DIVERGENCE_RATIO = 0.95
#: number of consecutive slow doublings needed
DIVERGENCE_RUN = 3


def potential(u: Callable[[float], float], T_max: float = 1e6, tol: float = 1e-6) -> PotentialResult:
    """``int_0^inf u(t) dt`` from partial integrals over ``[0, 2^j]``.

    The increments over successive doublings are monitored: if
    :data:`DIVERGENCE_RUN` consecutive increment ratios are at least
    :data:`DIVERGENCE_RATIO` the integral is flagged divergent.  Otherwise
    the remaining tail is extrapolated geometrically from the last ratio.
    """
    T_max = float(T_max)
    if not (T_max >= 8.0):
        raise DomainError("T_max must be >= 8")
    f = lambda s: float(u(s))  # noqa: E731
    Ts = [1.0]
    I = [integrate.quad(f, 0.0, 1.0, limit=200)[0]]
    incs: list[float] = []
    slow = 0
    while Ts[-1] * 2.0 <= T_max * (1 + 1e-12):
        a, b = Ts[-1], 2.0 * Ts[-1]
        d = integrate.quad(f, a, b, limit=400)[0]
        Ts.append(b)
        I.append(I[-1] + d)
        if incs and abs(incs[-1]) > 0:
            ratio = abs(d) / abs(incs[-1])
            slow = slow + 1 if ratio >= DIVERGENCE_RATIO and abs(d) > tol else 0
            if slow >= DIVERGENCE_RUN:
                return PotentialResult(math.inf, True, math.inf, np.array(Ts), np.array(I))
        incs.append(d)
        if abs(d) <= 1e-3 * tol and len(incs) >= 3:
            break
    rho = abs(incs[-1]) / abs(incs[-2]) if len(incs) >= 2 and incs[-2] != 0 else 0.0
    tail = incs[-1] * rho / (1.0 - rho) if rho < 1.0 else math.inf
    if not math.isfinite(tail):
        return PotentialResult(math.inf, True, math.inf, np.array(Ts), np.array(I))
    return PotentialResult(I[-1] + tail, False, abs(tail), np.array(Ts), np.array(I))


@dataclass(frozen=True)
class RenormalizedPotential:
    """``(1/N(T)) int_0^T v`` on doubling horizons with an extrapolated limit."""

    value: float
    extrapolated: float
    converged: bool
    horizons: np.ndarray
    ratios: np.ndarray


def renormalized_potential(
    f: Callable, flow: Flow, x, spec: SubordinatorSpec, T: float, n_doublings: int = 4, s_min: float = 1e-10
) -> RenormalizedPotential:
    """``R(T) = (1/N(T)) int_0^T v(s, x) ds`` with ``N(T) = int_0^T k``.

    ``R`` is reported at ``T, T/2, ..., T/2^n_doublings``; the limit is
    extrapolated with Aitken's delta-squared on the last three horizons.
    ``converged`` is False when the last two horizons differ by more than 5%.
    """
    T = float(T)
    if not (T > 0):
        raise DomainError("T must be > 0")
    if n_doublings < 2:
        raise DomainError("need at least two doublings")
    u = profile(f, flow, x)
    u0 = float(u(np.zeros(1))[0])
    if u0 == 0.0 and not np.any(u(np.geomspace(1e-6, T, 64))):
        z = np.zeros(n_doublings + 1)
        hs = T / 2.0 ** np.arange(n_doublings, -1, -1)
        return RenormalizedPotential(0.0, 0.0, True, hs, z)
    horizons = T / 2.0 ** np.arange(n_doublings, -1, -1)
    # dyadic panels from s_min to T so every horizon is a panel edge
    n_pan = int(math.ceil(math.log2(T / s_min)))
    edges = T * 2.0 ** np.arange(-n_pan, 1, dtype=float)
    a, b = edges[:-1, None], edges[1:, None]
    s = ((b - a) / 2 * _GL_X + (a + b) / 2).ravel()
    w = ((b - a) / 2 * _GL_W).ravel()
    vals = np.empty(s.size)
    for i, si in enumerate(s):
        vals[i] = _against_slice(u, density_slice(spec, float(si)))[0]
    panel = (w * vals).reshape(n_pan, 16).sum(axis=1)
    cum = edges[0] * u0 + np.cumsum(panel)
    ratios = np.empty(horizons.size)
    for j, H in enumerate(horizons):
        idx = int(round(math.log2(H / edges[0]))) - 1
        ratios[j] = cum[idx] / float(kernel_integral(spec, H))
    r0, r1, r2 = ratios[-3:]
    denom = (r2 - r1) - (r1 - r0)
    extrap = r2 - (r2 - r1) ** 2 / denom if denom != 0 else r2
    converged = abs(r2 - r1) <= 0.05 * abs(r2)
    return RenormalizedPotential(float(r2), float(extrap), bool(converged), horizons, ratios)
