"""Transport equation ``u_t = b . grad u`` solved along characteristics.

``u(t, x) = f(X(t; x))`` for autonomous fields.  The module checks the
numerically verifiable consequences of that representation: second-order
vanishing of the classical residual, order preservation, and the Hoelder
decay bound for dissipative fields; it also carries the non-autonomous
fixture for which the representation is not a classical solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .dynamics import Flow, VectorField, dissipativity_estimate, integrate_flow_batch
from .errors import DomainError

__all__ = [
    "TransportProblem",
    "validate_holder",
    "solve_characteristics",
    "solve_grid",
    "classical_residual",
    "residual_grid",
    "residual_order",
    "CounterexampleFixture",
    "counterexample_fixture",
    "ComparisonResult",
    "comparison_check",
    "DecayCheck",
    "decay_check",
    "upwind_solve",
    "grid_to_csv",
    "COMPARISON_SLACK",
]

#: violations of u <= v smaller than this are ignored
COMPARISON_SLACK = 1e-9


def _obs(f: Callable, X: np.ndarray) -> np.ndarray:
    return np.asarray(f(X), dtype=float)


def validate_holder(f: Callable, C: float, beta: float, center, radius: float, dim: int, n_pairs: int = 10_000, seed: int = 0) -> float:
    """Largest ``|f(x) - f(y)| / (C |x - y|^beta)`` over random pairs in a box.

    Pairs mix uniform points with nearby perturbations at log-uniform
    distances, so both scales of the certificate are probed.
    """
    rng = np.random.default_rng(seed)
    center = np.broadcast_to(np.asarray(center, dtype=float), (dim,))
    x = center + radius * rng.uniform(-1.0, 1.0, (n_pairs, dim))
    y = center + radius * rng.uniform(-1.0, 1.0, (n_pairs, dim))
    half = n_pairs // 2
    step = radius * 10.0 ** rng.uniform(-8.0, 0.0, half)
    direction = rng.normal(size=(half, dim))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    y[:half] = x[:half] + step[:, None] * direction
    d = np.linalg.norm(x - y, axis=1)
    ok = d > 0
    ratio = np.abs(_obs(f, x) - _obs(f, y))[ok] / (C * d[ok] ** beta)
    return float(ratio.max(initial=0.0))


@dataclass(frozen=True)
class TransportProblem:
    """Field, initial datum and optional Hoelder certificate ``(C_h, beta)``.

    ``flow`` may supply a closed-form flow of ``field``; otherwise
    characteristics are integrated with step ``h_max``.
    """

    field: VectorField
    f: Callable[[np.ndarray], np.ndarray]
    holder: Optional[tuple[float, float]] = None
    flow: Optional[Flow] = None
    h_max: float = 1e-3

    def certify(self, center, radius: float, n_pairs: int = 10_000, seed: int = 0) -> float:
        """Validate the Hoelder certificate; raises if it is violated."""
        if self.holder is None:
            raise DomainError("problem carries no Hoelder certificate")
        C, beta = self.holder
        worst = validate_holder(self.f, C, beta, center, radius, self.field.dim, n_pairs, seed)
        if worst > 1.0 + 1e-9:
            raise DomainError(f"Hoelder certificate violated: ratio {worst:.6g}")
        return worst


def _points(xs, dim: int) -> np.ndarray:
    X = np.asarray(xs, dtype=float)
    return X.reshape(-1, 1) if dim == 1 and X.ndim <= 1 else X.reshape(-1, dim)


def _flow_grid(prob: TransportProblem, ts: np.ndarray, X: np.ndarray) -> np.ndarray:
    """``X(t_i; x_j)``, shape ``(len(ts), len(X), dim)``."""
    order = np.argsort(ts, kind="stable")
    if prob.flow is not None:
        out = np.stack([prob.flow(ts, x) for x in X], axis=1)
        return out
    res = integrate_flow_batch(prob.field, X, ts[order], prob.h_max)
    out = np.empty_like(res)
    out[order] = res
    return out


def solve_grid(prob: TransportProblem, ts, xs) -> np.ndarray:
    """``u(t_i, x_j) = f(X(t_i; x_j))`` on a tensor grid, shape ``(len(ts), n_x)``."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    X = _points(xs, prob.field.dim)
    return _obs(prob.f, _flow_grid(prob, ts, X))


def solve_characteristics(prob: TransportProblem, t: float, x) -> float:
    """``u(t, x) = f(X(t; x))``."""
    return float(solve_grid(prob, [t], [x] if prob.field.dim > 1 else np.atleast_1d(x))[0, 0])


def residual_grid(prob: TransportProblem, t_range: tuple[float, float], x_range: tuple[float, float], h: float):
    """``(ts, xs, u_t - b u_x)`` on the interior nodes of a 1-d grid with step ``h``.

    Both derivatives are central differences of the characteristic solution.
    """
    if prob.field.dim != 1:
        raise DomainError("classical_residual works on one-dimensional grids")
    ts = _uniform(t_range, h)
    xs = _uniform(x_range, h)
    U = solve_grid(prob, ts, xs)
    ut = (U[2:, 1:-1] - U[:-2, 1:-1]) / (2.0 * h)
    ux = (U[1:-1, 2:] - U[1:-1, :-2]) / (2.0 * h)
    b = prob.field(xs[1:-1, None])[:, 0]
    return ts[1:-1], xs[1:-1], ut - b[None, :] * ux


def classical_residual(prob: TransportProblem, t_range: tuple[float, float], x_range: tuple[float, float], h: float) -> float:
    """``max |u_t - b u_x|`` over interior nodes of a 1-d grid with step ``h``."""
    return float(np.max(np.abs(residual_grid(prob, t_range, x_range, h)[2])))


def residual_order(prob: TransportProblem, t_range: tuple[float, float], x_range: tuple[float, float], h: float) -> tuple[float, float, float]:
    """Residuals at ``h`` and ``h/2`` and their ratio, on the nodes both grids share.

    The finer grid's interior reaches half a step closer to the boundary,
    so only the coarse interior nodes are compared.
    """
    tc, xc, rc = residual_grid(prob, t_range, x_range, h)
    tf, xf, rf = residual_grid(prob, t_range, x_range, h / 2)
    # coarse interior nodes sit at every other fine node
    i = np.searchsorted(tf, tc - 0.25 * h)
    j = np.searchsorted(xf, xc - 0.25 * h)
    r1 = float(np.max(np.abs(rc)))
    r2 = float(np.max(np.abs(rf[np.ix_(i, j)])))
    return r1, r2, r1 / r2


def _uniform(rng_: tuple[float, float], h: float) -> np.ndarray:
    a, b = map(float, rng_)
    n = int(round((b - a) / h))
    if n < 2 or abs(a + n * h - b) > 1e-9 * max(1.0, abs(b)):
        raise DomainError(f"range {rng_} is not a multiple of h={h:g} with at least 2 cells")
    return a + h * np.arange(n + 1)


@dataclass(frozen=True)
class CounterexampleFixture:
    """Non-autonomous field ``b(t, x) = t + x`` with datum ``f(x) = x``.

    The flow started at time 0 gives ``u(t, x) = (1 + x) e^t - t - 1``;
    ``u_t - b u_x = (1 - t) e^t - 1`` vanishes only on ``t = 0``.
    """

    def u(self, t, x):
        t, x = np.asarray(t, dtype=float), np.asarray(x, dtype=float)
        return (1.0 + x) * np.exp(t) - t - 1.0

    def u_t(self, t, x):
        t, x = np.asarray(t, dtype=float), np.asarray(x, dtype=float)
        return (1.0 + x) * np.exp(t) - 1.0

    def b_u_x(self, t, x):
        t, x = np.asarray(t, dtype=float), np.asarray(x, dtype=float)
        return (t + x) * np.exp(t)

    def residual(self, t, x):
        return self.u_t(t, x) - self.b_u_x(t, x)

    def numerical_residual(self, t_range, x_range, h: float) -> np.ndarray:
        """Central-difference residual of the exact ``u`` on interior nodes."""
        ts, xs = _uniform(t_range, h), _uniform(x_range, h)
        T, Xg = np.meshgrid(ts, xs, indexing="ij")
        U = self.u(T, Xg)
        ut = (U[2:, 1:-1] - U[:-2, 1:-1]) / (2.0 * h)
        ux = (U[1:-1, 2:] - U[1:-1, :-2]) / (2.0 * h)
        return ut - (T[1:-1, 1:-1] + Xg[1:-1, 1:-1]) * ux


def counterexample_fixture() -> CounterexampleFixture:
    return CounterexampleFixture()


@dataclass(frozen=True)
class ComparisonResult:
    ordered: bool
    worst_gap: float  # max of u_sub - v_super; <= 0 when ordered


def comparison_check(u_sub, v_super) -> ComparisonResult:
    """Check ``u_sub <= v_super + COMPARISON_SLACK`` on grid arrays of shape ``(n_t, n_x)``.

    Row 0 is the initial time and must already be ordered.
    """
    u, v = np.asarray(u_sub, dtype=float), np.asarray(v_super, dtype=float)
    if u.shape != v.shape:
        raise DomainError("grids must have the same shape")
    if np.any(u[0] > v[0] + COMPARISON_SLACK):
        raise DomainError("initial data are not ordered")
    gap = float(np.max(u - v))
    return ComparisonResult(gap <= COMPARISON_SLACK, gap)


@dataclass(frozen=True)
class DecayCheck:
    """Worst ratio to the Hoelder decay bound and the fitted decay rate."""

    worst_ratio: float
    c_hat: float
    beta: float
    slope: float  # d/dt log sup_x |u - f(x0)|
    ratios: np.ndarray


def decay_check(
    prob: TransportProblem, x0, ts, xs, c_hat: Optional[float] = None, n_samples: int = 1024, fit_from: Optional[float] = None
) -> DecayCheck:
    """Compare ``|u(t,x) - f(x0)|`` with ``C |x - x0|^beta exp(-c beta t)``.

    ``c`` defaults to :func:`dissipativity_estimate` over the grid's box;
    the Hoelder certificate is validated on the same box first.  The decay
    rate of ``sup_x |u - f(x0)|`` is fitted on ``t >= fit_from`` (default:
    the later half of ``ts``), where bounded data no longer saturate.
    """
    if prob.holder is None:
        raise DomainError("decay_check needs a Hoelder certificate")
    C, beta = prob.holder
    dim = prob.field.dim
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (dim,))
    ts = np.asarray(ts, dtype=float)
    X = _points(xs, dim)
    radius = float(np.max(np.linalg.norm(X - x0, axis=1)))
    prob.certify(x0, max(radius, 1e-12))
    if c_hat is None:
        c_hat = dissipativity_estimate(prob.field, x0, radius, n_samples)
    if not c_hat > 0:
        raise DomainError(f"field is not dissipative on the sample (c_hat={c_hat:.3g})")
    U = solve_grid(prob, ts, X)
    f0 = float(_obs(prob.f, x0[None, :])[0])
    dist = np.linalg.norm(X - x0, axis=1)
    keep = dist > 0
    gap = np.abs(U - f0)
    bound = C * dist[None, keep] ** beta * np.exp(-c_hat * beta * ts)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(bound > 0, gap[:, keep] / bound, np.where(gap[:, keep] > 0, np.inf, 0.0))
    sup = gap.max(axis=1)
    if fit_from is None:
        fit_from = float(ts[len(ts) // 2])
    pos = (sup > 0) & (ts >= fit_from)
    slope = float(np.polyfit(ts[pos], np.log(sup[pos]), 1)[0]) if pos.sum() >= 2 else -math.inf
    return DecayCheck(float(ratios.max(initial=0.0)), float(c_hat), float(beta), slope, ratios)


def upwind_solve(prob: TransportProblem, T: float, xs, cfl: float = 0.5) -> np.ndarray:
    """First-order upwind solution of ``u_t = b u_x`` at time ``T`` on a uniform 1-d grid.

    Boundary values are extrapolated as constants.  Independent of the
    characteristic solver and used only to cross-check it.
    """
    if prob.field.dim != 1:
        raise DomainError("upwind_solve works on one-dimensional grids")
    xs = np.asarray(xs, dtype=float)
    dx = float(xs[1] - xs[0])
    b = prob.field(xs[:, None])[:, 0]
    bmax = float(np.max(np.abs(b)))
    u = _obs(prob.f, xs[:, None])
    if T == 0 or bmax == 0:
        return u
    n = int(math.ceil(T / (cfl * dx / bmax)))
    dt = T / n
    for _ in range(n):
        up = np.concatenate([u[1:], u[-1:]])
        dn = np.concatenate([u[:1], u[:-1]])
        # information travels with velocity -b
        ux = np.where(b > 0, (up - u) / dx, (u - dn) / dx)
        u = u + dt * b * ux
    return u


def grid_to_csv(path, ts: Sequence[float], xs, U: np.ndarray, header: str = "") -> None:
    """Write ``t,x...,u`` rows with 17 significant digits."""
    X = np.asarray(xs, dtype=float)
    X = X.reshape(-1, 1) if X.ndim <= 1 else X
    cols = ["t"] + (["x"] if X.shape[1] == 1 else [f"x{i}" for i in range(X.shape[1])]) + ["u"]
    with open(path, "w") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        fh.write(",".join(cols) + "\n")
        for i, t in enumerate(ts):
            for j, x in enumerate(X):
                fh.write(",".join(f"{v:.17g}" for v in (t, *x, U[i, j])) + "\n")
