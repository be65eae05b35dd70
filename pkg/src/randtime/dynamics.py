"""Deterministic flows ``X(t; x)`` of ``dX = b(X) dt``.

Closed-form flows cover the linear and power-law systems; any other
autonomous field is integrated with a fixed-step classical Runge-Kutta
scheme.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.stats import norm, qmc

from .errors import BlowUpError, DomainError

__all__ = [
    "VectorField",
    "Flow",
    "linear_motion",
    "power_law_flow",
    "ou_flow",
    "integrate_flow",
    "integrate_flow_batch",
    "integrated_flow",
    "dissipativity_estimate",
    "named_field",
    "named_flow",
    "BLOWUP_LIMIT",
]

BLOWUP_LIMIT = 1e12


def _vec(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class VectorField:
    """Autonomous field ``b: R^d -> R^d``.

    ``b`` must accept and return 1-d arrays of length ``dim``; when
    ``vectorized`` is set it must also map arrays of shape ``(n, dim)``
    row-wise, which lets many trajectories be integrated together.  Fields
    used concurrently must be safe to call concurrently.
    """

    dim: int
    b: Callable[[np.ndarray], np.ndarray]
    lipschitz_hint: Optional[float] = None
    dissipativity_hint: Optional[tuple[np.ndarray, float]] = None
    name: str = ""
    vectorized: bool = False

    def __post_init__(self):
        if int(self.dim) < 1:
            raise DomainError("dimension must be a positive integer")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 2:
            return np.asarray(self.b(x), dtype=float)
        return _vec(self.b(_vec(x)))


@dataclass(frozen=True)
class Flow:
    """Flow map ``(t, x) -> X(t; x)``.

    ``fn(t, x)`` takes an array of times and one initial point and returns
    an array of shape ``t.shape + (dim,)``.  ``x0`` is the default
    starting point.
    """

    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    dim: int
    kind: str
    x0: np.ndarray
    field: Optional[VectorField] = None

    def __call__(self, t, x=None) -> np.ndarray:
        x = self.x0 if x is None else _vec(x)
        if x.shape != (self.dim,):
            raise DomainError(f"initial point must have dimension {self.dim}")
        tt = np.asarray(t, dtype=float)
        if np.any(~(tt >= 0)):
            raise DomainError("flow times must be >= 0")
        out = np.asarray(self.fn(tt, x), dtype=float)
        # X(0; x) = x exactly
        return np.where((tt == 0.0)[..., None], x, out)

    def scalar(self, t, x=None):
        """First component, convenient for one-dimensional flows."""
        return self(t, x)[..., 0]


def linear_motion(v, x0=0.0) -> Flow:
    """Uniform motion ``X(t; x) = x + v t``."""
    v = _vec(v)
    x0 = np.broadcast_to(_vec(x0), v.shape).astype(float)

    def fn(t, x):
        return x + t[..., None] * v

    field = VectorField(v.size, lambda x: np.broadcast_to(v, np.shape(x)).copy(), lipschitz_hint=0.0, name="linear", vectorized=True)
    return Flow(fn, v.size, "closed_form", x0, field)


def power_law_flow(beta: float, C: float) -> Flow:
    """Flow of ``beta X^(beta-1) dX = dt``, i.e. ``X(t; x) = (x^beta + t)^(1/beta)``.

    The default start is ``C^(1/beta)``, so ``X(t) = (t + C)^(1/beta)``.
    """
    beta, C = float(beta), float(C)
    if not (beta >= 1.0) or not math.isfinite(beta):
        raise DomainError(f"beta must be >= 1, got {beta!r}")
    if not (C > 0.0) or not math.isfinite(C):
        raise DomainError(f"C must be > 0, got {C!r}")

    def fn(t, x):
        if x[0] <= 0.0:
            raise DomainError("power-law flow is defined for x > 0")
        return ((x[0] ** beta + t) ** (1.0 / beta))[..., None]

    field = VectorField(1, lambda x: 1.0 / (beta * x ** (beta - 1.0)), name="power", vectorized=True)
    return Flow(fn, 1, "closed_form", np.array([C ** (1.0 / beta)]), field)


def ou_flow(rate: float, x0=1.0) -> Flow:
    """Linear relaxation ``b(x) = -rate x``, ``X(t; x) = x exp(-rate t)``."""
    rate = float(rate)
    x0 = _vec(x0)

    def fn(t, x):
        return np.exp(-rate * t)[..., None] * x

    field = VectorField(x0.size, lambda x: -rate * x, lipschitz_hint=abs(rate), dissipativity_hint=(np.zeros(x0.size), rate), name="ou", vectorized=True)
    return Flow(fn, x0.size, "closed_form", x0, field)


def _rk4(field: VectorField, x: np.ndarray, n: int, h: float) -> np.ndarray:
    for _ in range(n):
        k1 = field(x)
        k2 = field(x + 0.5 * h * k1)
        k3 = field(x + 0.5 * h * k2)
        k4 = field(x + h * k3)
        x = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)) or np.max(np.abs(x)) > BLOWUP_LIMIT:
            raise BlowUpError(f"|X| exceeded {BLOWUP_LIMIT:g} during integration")
    return x


def integrate_flow(field: VectorField, x, t: float, h_max: float) -> np.ndarray:
    """``X(t; x)`` by classical RK4 with the largest uniform step ``<= h_max``."""
    x = _vec(x)
    t, h_max = float(t), float(h_max)
    if x.shape != (field.dim,):
        raise DomainError(f"initial point must have dimension {field.dim}")
    if not (t >= 0.0) or not (h_max > 0.0):
        raise DomainError("need t >= 0 and h_max > 0")
    if t == 0.0:
        return x.copy()
    n = max(1, int(math.ceil(t / h_max - 1e-12)))
    return _rk4(field, x, n, t / n)


def integrate_flow_batch(field: VectorField, X, times, h_max: float) -> np.ndarray:
    """Integrate every row of ``X`` to each of the increasing ``times``.

    Returns an array of shape ``(len(times), n, dim)``.  Steps between
    consecutive output times are uniform and ``<= h_max``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    times = np.asarray(times, dtype=float)
    if X.shape[1] != field.dim:
        raise DomainError(f"points must have dimension {field.dim}")
    if np.any(np.diff(times) < 0) or np.any(times < 0):
        raise DomainError("times must be increasing and >= 0")
    if not field.vectorized:
        return np.stack([np.stack([integrate_flow(field, x, t, h_max) for x in X]) for t in times])
    out = np.empty((times.size,) + X.shape)
    cur, t_cur = X.copy(), 0.0
    for i, t in enumerate(times):
        dt = t - t_cur
        if dt > 0:
            n = max(1, int(math.ceil(dt / h_max - 1e-12)))
            cur = _rk4(field, cur, n, dt / n)
            t_cur = t
        out[i] = cur
    return out


def integrated_flow(field: VectorField, x0, h_max: float = 1e-3) -> Flow:
    """Flow of a general field, integrated on demand with :func:`integrate_flow`."""

    def fn(t, x):
        flat = t.ravel()
        out = np.empty(flat.shape + (field.dim,))
        for i, ti in enumerate(flat):
            out[i] = integrate_flow(field, x, float(ti), h_max)
        return out.reshape(t.shape + (field.dim,))

    return Flow(fn, field.dim, "integrated", _vec(x0), field)


def dissipativity_estimate(field: VectorField, x0, box_radius: float, n_samples: int, seed: int = 0) -> float:
    """``c_hat = -max b(x).(x - x0) / |x - x0|^2`` over sampled points.

    Points are ``x0 + r u`` with scrambled-Sobol directions ``u`` and radii
    log-uniform on ``[1e-6 R, R]``, plus ``r = R`` for every direction.  A positive value certifies
    ``b(x).(x - x0) <= -c |x - x0|^2`` on the sample.
    """
    x0 = _vec(x0)
    if n_samples < 100:
        raise DomainError("n_samples must be >= 100")
    if not (box_radius > 0):
        raise DomainError("box_radius must be > 0")
    d = field.dim
    m = int(math.ceil(math.log2(n_samples)))
    pts = qmc.Sobol(d + 1, scramble=True, seed=seed).random_base2(m)[:n_samples]
    radius = box_radius * np.exp(math.log(1e-6) * (1.0 - pts[:, 0]))
    if d == 1:
        u = np.where(pts[:, 1] < 0.5, -1.0, 1.0)[:, None]
    else:
        g = norm.ppf(np.clip(pts[:, 1:], 1e-12, 1 - 1e-12))
        u = g / np.linalg.norm(g, axis=1, keepdims=True)
    # every direction is also probed on the boundary of the ball
    radius = np.concatenate([radius, np.full(len(u), float(box_radius))])
    u = np.concatenate([u, u])
    pts = x0 + radius[:, None] * u
    # the offsets actually evaluated, free of the rounding in x0 + r u
    dX = pts - x0
    keep = np.any(dX != 0.0, axis=1)
    pts, dX = pts[keep], dX[keep]
    if field.vectorized:
        bx = field(pts)
    else:
        bx = np.stack([field(p) for p in pts])
    return -float(np.max(np.sum(bx * dX, axis=1) / np.sum(dX * dX, axis=1)))


def _params(text: str, n: int, name: str) -> list[float]:
    parts = [p for p in text.split(",") if p]
    if len(parts) != n:
        raise DomainError(f"field {name!r} expects {n} parameter(s)")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise DomainError(f"bad parameters for field {name!r}: {text!r}") from exc


def named_flow(name: str, x0=None) -> Flow:
    """Closed-form flow for ``linear:v``, ``power:beta,C`` or ``ou:rate``."""
    kind, _, rest = name.partition(":")
    if kind == "linear":
        (v,) = _params(rest, 1, kind)
        return linear_motion(v, 0.0 if x0 is None else x0)
    if kind == "power":
        beta, C = _params(rest, 2, kind)
        fl = power_law_flow(beta, C)
        return fl if x0 is None else Flow(fl.fn, 1, fl.kind, _vec(x0), fl.field)
    if kind == "ou":
        (rate,) = _params(rest, 1, kind)
        return ou_flow(rate, 1.0 if x0 is None else x0)
    if kind == "nonauto-counterexample":
        raise DomainError("the non-autonomous counterexample is a transport fixture, not a flow")
    raise DomainError(f"unknown field {name!r}")


def named_field(name: str) -> VectorField:
    """Vector field behind a named flow."""
    return named_flow(name).field
