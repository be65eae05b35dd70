"""Marginal law of the inverse subordinator ``E(t) = inf{r : S(r) > t}``.

The density ``G_t(tau)`` of ``E(t)`` has ``t``-Laplace transform
``K(lam) exp(-tau phi(lam))``; it is recovered by numerical inversion
(Euler by default, Talbot and Gaver-Stehfest as cross-checks).  For the
alpha-stable family the M-Wright closed form is used instead.

Sampling lives in :mod:`randtime.sampling` and is re-exported here.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from . import inversion
from .catalog import (
    AlphaStable,
    CompoundPoisson,
    SubordinatorSpec,
    TruncatedStable,
    asymptotic_params,
    laplace_exponent,
    spec_to_dict,
)
from .errors import DomainError, UnsupportedSpecError
from .sampling import PathSample, sample_inverse, sample_inverse_batch, sample_path
from .special import wright_values

__all__ = [
    "DensitySlice",
    "density",
    "density_values",
    "density_slice",
    "auto_method",
    "laplace_functional",
    "asymptotic_laplace",
    "moment_first",
    "double_laplace",
    "PathSample",
    "sample_path",
    "sample_inverse",
    "sample_inverse_batch",
    "TAIL_TARGET",
]

#: Chernoff bound on the mass beyond the last grid point
TAIL_TARGET = 1e-8
#: first panel ends at this multiple of the natural scale
HEAD_FRACTION = 1e-6
_GL_X, _GL_W = leggauss(16)

METHODS = ("auto", "wright", "euler", "dehoog", "talbot", "gaver-stehfest")


def _density_spec(spec: SubordinatorSpec) -> None:
    if isinstance(spec, CompoundPoisson):
        raise UnsupportedSpecError("E(t) has atoms for compound Poisson subordinators; use sampling or the series in randtime.cpp")


def _positive(name: str, x: float) -> float:
    x = float(x)
    if not (x > 0.0) or not math.isfinite(x):
        raise DomainError(f"{name} must be finite and > 0, got {x!r}")
    return x


def _transform(spec: SubordinatorSpec, taus: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """``lam -> K(lam) exp(-tau phi(lam))`` on a grid of ``tau`` (trailing axis)."""

    def F(lam):
        K = np.asarray(spec._K(lam), dtype=complex)
        phi = lam * K
        return K[:, None] * np.exp(-np.outer(phi, taus))

    return F


def auto_method(spec: SubordinatorSpec) -> str:
    """Inversion method used by ``method="auto"``.

    Truncated-stable densities have kinks in ``t`` at multiples of the
    cutoff, which slows the plain Euler series; de Hoog's accelerated sum
    copes with them.  Everything else uses Euler.
    """
    return "dehoog" if isinstance(spec, TruncatedStable) else "euler"


def density_values(spec: SubordinatorSpec, t: float, taus, method: str = "auto", **kw) -> np.ndarray:
    """Density ``G_t`` at each point of ``taus`` (all > 0)."""
    _density_spec(spec)
    t = _positive("t", t)
    taus = np.asarray(taus, dtype=float)
    if np.any(~(taus > 0)) or np.any(~np.isfinite(taus)):
        raise DomainError("tau must be finite and > 0")
    if method not in METHODS:
        raise DomainError(f"unknown density method {method!r}")
    if method == "wright" or (method == "auto" and isinstance(spec, AlphaStable)):
        if not isinstance(spec, AlphaStable):
            raise DomainError("the Wright closed form applies to AlphaStable only")
        s = t ** -spec.alpha
        return s * wright_values(spec.alpha, taus * s)
    name = auto_method(spec) if method == "auto" else method
    flat = taus.ravel()
    out = inversion.invert(_transform(spec, flat), t, name, **kw)
    return np.asarray(out, dtype=float).reshape(taus.shape)


def density(spec: SubordinatorSpec, t: float, tau: float, method: str = "auto", **kw) -> float:
    """Density of ``E(t)`` at ``tau``.

    ``method`` is ``"auto"`` (Wright for AlphaStable, see :func:`auto_method`
    otherwise) or one of ``"wright"``, ``"euler"``, ``"dehoog"``,
    ``"talbot"``, ``"gaver-stehfest"``.
    """
    tau = _positive("tau", tau)
    return float(density_values(spec, t, np.array([tau]), method, **kw)[0])


# ---------------------------------------------------------------------------
# slices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensitySlice:
    """Density of ``E(t)`` on a quadrature grid.

    ``weights`` are composite Gauss-Legendre weights on geometric panels,
    so ``sum(weights * g)`` integrates over ``[0, tau_max]``; ``tail_bound``
    bounds the mass beyond ``tau_max``.
    """

    spec: SubordinatorSpec
    t: float
    tau: np.ndarray
    g: np.ndarray
    weights: np.ndarray
    tail_bound: float

    @property
    def tau_max(self) -> float:
        return float(self.tau[-1] if self.tau.size else 0.0)

    @property
    def mass(self) -> float:
        return float(np.dot(self.weights, self.g))

    def expect(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        """``int f(tau) G_t(tau) dtau`` over the grid."""
        return float(np.dot(self.weights, np.asarray(f(self.tau), dtype=float) * self.g))

    def to_csv(self, path) -> None:
        header = f"# spec={json.dumps(spec_to_dict(self.spec), sort_keys=True)} t={self.t!r}\ntau,g\n"
        with open(path, "w") as fh:
            fh.write(header)
            for a, b in zip(self.tau, self.g):
                fh.write(f"{a:.17g},{b:.17g}\n")


def _panel_nodes(scale: float, tau_max: float, refine: int) -> tuple[np.ndarray, np.ndarray]:
    head = HEAD_FRACTION * scale
    edges = [0.0, head]
    while edges[-1] < tau_max:
        edges.append(min(2.0 * edges[-1], tau_max))
    edges = np.asarray(edges)
    for _ in range(refine):
        mid = 0.5 * (edges[:-1] + edges[1:])
        edges = np.sort(np.concatenate([edges, mid]))
    a, b = edges[:-1, None], edges[1:, None]
    x = ((b - a) / 2 * _GL_X + (a + b) / 2).ravel()
    w = ((b - a) / 2 * _GL_W).ravel()
    return x, w


def _tau_range(spec: SubordinatorSpec, t: float) -> tuple[float, float, float]:
    """(scale, tau_max, tail bound) from ``P(E(t) > tau) <= exp(1 - tau phi(1/t))``."""
    phi = float(laplace_exponent(spec, 1.0 / t))
    scale = 1.0 / phi
    tau_max = (1.0 - math.log(TAIL_TARGET)) * scale
    return scale, tau_max, math.exp(1.0 - tau_max * phi)


@lru_cache(maxsize=32)
def _unit_stable_slice(alpha: float, refine: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # E(t) = t^alpha E(1); slice of E(1) in the variable z = tau t^-alpha
    z, w = _panel_nodes(1.0, 1.0 - math.log(TAIL_TARGET), refine)
    return z, w, wright_values(alpha, z)


def density_slice(spec: SubordinatorSpec, t: float, method: str = "auto", refine: int = 0) -> DensitySlice:
    """Density of ``E(t)`` on an automatically chosen grid.

    The grid ends where the Chernoff bound on the remaining mass falls below
    :data:`TAIL_TARGET`.  ``refine`` halves every panel that many times,
    which gives a quadrature error estimate by comparison.
    """
    _density_spec(spec)
    t = _positive("t", t)
    scale, tau_max, tail = _tau_range(spec, t)
    if isinstance(spec, AlphaStable) and method in ("auto", "wright"):
        z, w, m = _unit_stable_slice(spec.alpha, refine)
        s = t**spec.alpha
        return DensitySlice(spec, t, z * s, m / s, w * s, tail)
    tau, w = _panel_nodes(scale, tau_max, refine)
    g = np.maximum(density_values(spec, t, tau, method), 0.0)
    return DensitySlice(spec, t, tau, g, w, tail)


# ---------------------------------------------------------------------------
# functionals
# ---------------------------------------------------------------------------


def laplace_functional(spec: SubordinatorSpec, t: float, z: float, method: str = "auto") -> float:
    """``A(t, z) = E exp(-z E(t))`` by quadrature over a density slice."""
    z = float(z)
    if not (z >= 0.0) or not math.isfinite(z):
        raise DomainError(f"z must be finite and >= 0, got {z!r}")
    sl = density_slice(spec, t, method)
    return sl.expect(lambda tau: np.exp(-z * tau))


def asymptotic_laplace(spec: SubordinatorSpec, t: float, z: float) -> float:
    """Large-``t`` equivalent ``t^(gamma-1) Q(t) / (z Gamma(gamma))`` of ``A(t, z)``."""
    t = _positive("t", t)
    z = _positive("z", z)
    p = asymptotic_params(spec)
    if p.gamma <= 0.0:
        raise UnsupportedSpecError(f"{spec.variant} has finite K(0); the regular-variation equivalent does not apply")
    return float(t ** (p.gamma - 1.0) * p.Q(t) / (z * math.gamma(p.gamma)))


def moment_first(spec: SubordinatorSpec, t: float, method: str = "auto", **kw) -> float:
    """``E[E(t)]``, the inverse Laplace transform of ``1 / (lam phi(lam))``.

    ``t = 0`` returns 0.
    """
    _density_spec(spec)
    t = float(t)
    if t == 0.0:
        return 0.0
    t = _positive("t", t)

    def F(lam):
        return 1.0 / (lam * lam * np.asarray(spec._K(lam), dtype=complex))

    if method in ("auto", "wright"):
        method = auto_method(spec)
    return float(inversion.invert(F, t, method, **kw))


def double_laplace(spec: SubordinatorSpec, lam: float, p: float, t_min: float = 1e-10, panels_per_octave: int = 1) -> float:
    """``int_0^inf exp(-lam t) A(t, p) dt`` by nested quadrature over density slices.

    ``[0, t_min]`` is accounted for with ``A = 1`` there.
    """
    lam = _positive("lambda", lam)
    p = _positive("p", p)
    t_max = 60.0 / lam
    n_oct = int(math.ceil(math.log2(t_max / t_min)))
    edges = t_min * 2.0 ** np.linspace(0, n_oct, n_oct * panels_per_octave + 1)
    a, b = edges[:-1, None], edges[1:, None]
    ts = ((b - a) / 2 * _GL_X + (a + b) / 2).ravel()
    ws = ((b - a) / 2 * _GL_W).ravel()
    A = np.array([laplace_functional(spec, float(ti), p) for ti in ts])
    return float(np.dot(ws, np.exp(-lam * ts) * A) + t_min)
