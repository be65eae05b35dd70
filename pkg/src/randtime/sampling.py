"""Path simulation of subordinators and first-passage sampling of their
inverses.

This module deliberately does not use any density or Laplace-inversion
code, so that Monte Carlo results are an independent check of the
quadrature route.

Sampling strategies
-------------------
* ``AlphaStable``: self-similarity ``S(r) = r^(1/alpha) S(1)`` with ``S(1)``
  from the Kanter / Chambers-Mallows-Stuck one-sided generator, hence
  ``E(t) = (t / S(1))^alpha`` exactly in law.
* ``SumStable``: ``r^(1/alpha) A + r^(1/beta) B`` with independent unit
  stable variables, inverted by bisection (exact marginal of ``E(t)``).
* ``CompoundPoisson``: exact arrival times and jumps.
* ``Gamma``, ``TruncatedStable``, ``ExpWeighted``, ``DistributedOrder``:
  shot-noise representation.  Jumps larger than a cutoff ``eps`` arrive
  at rate ``k(eps)`` with sizes drawn by inverting the tail ``k``; jumps
  below ``eps`` are replaced by their mean, a drift
  ``int_0^eps (k(s) - k(eps)) ds``.  The cutoff is chosen so that
  ``k(eps)`` equals a fixed jump budget per unit of operational time.

All samplers work on blocks of :data:`rng.BLOCK_SIZE` replicates and
evaluate every requested level on the same path, so draws are monotone
in ``t`` for a fixed seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import rng as _rng
from .catalog import (
    AlphaStable,
    CompoundPoisson,
    SubordinatorSpec,
    SumStable,
    TruncatedStable,
    kernel_integral,
)
from .errors import DomainError, HorizonExhaustedError

__all__ = [
    "PathSample",
    "ShotNoise",
    "stable_unit",
    "sample_path",
    "sample_inverse",
    "sample_inverse_batch",
    "shot_noise_for",
]

#: expected number of simulated jumps per unit of operational time
JUMP_BUDGET = 64.0
#: smallest admissible jump cutoff
EPS_FLOOR = 1e-12
#: largest tabulated jump; larger jumps are clipped (they cross every level below it)
SIZE_CAP = 1e12
#: jumps generated per replicate and round
ROUND = 256
#: compound Poisson paths need far fewer arrivals per level
CPP_ROUND = 32
#: maximum number of rounds (the horizon doubles with each exhausted batch of rounds)
MAX_ROUNDS = 1 << 14
#: first-passage bisection resolution
BISECT_TOL = 1e-12


@dataclass(frozen=True)
class PathSample:
    """Sampled subordinator path on increasing times ``r`` with values ``S``."""

    r: np.ndarray
    S: np.ndarray
    rng_seed: int
    exact_jump_times: bool = False


def stable_unit(gen: np.random.Generator, alpha: float, size) -> np.ndarray:
    """One-sided stable variables with ``E exp(-lam S) = exp(-lam^alpha)``."""
    u = gen.random(size) * np.pi
    w = gen.standard_exponential(size)
    a = np.sin(alpha * u) / np.sin(u) ** (1.0 / alpha)
    b = (np.sin((1.0 - alpha) * u) / w) ** ((1.0 - alpha) / alpha)
    return a * b


# ---------------------------------------------------------------------------
# shot-noise representation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ShotNoise:
    """Jumps above ``eps`` at rate ``rate``; small jumps folded into ``drift``.

    Jump sizes come from a table of ``log s`` on a uniform grid of
    ``log k(s)``, so the inverse-tail lookup is a direct index.
    """

    eps: float
    rate: float
    drift: float
    small_jump_variance: float
    log_k_start: float
    log_k_step: float
    log_s_table: np.ndarray  # log s at log_k_start + i * log_k_step
    size_cap: float

    def sizes(self, u: np.ndarray) -> np.ndarray:
        x = (np.log(u) + math.log(self.rate) - self.log_k_start) / self.log_k_step
        n = self.log_s_table.size - 1
        beyond = x < 0
        x = np.clip(x, 0.0, n - 1e-9)
        i = x.astype(np.intp)
        w = x - i
        ls = self.log_s_table
        out = np.exp(ls[i] + w * (ls[i + 1] - ls[i]))
        return np.where(beyond, self.size_cap, out)


def _k(spec: SubordinatorSpec, s) -> np.ndarray:
    return np.asarray(spec._k(np.asarray(s, dtype=float)), dtype=float)


def _solve_level(spec: SubordinatorSpec, target: float, lo: float, hi: float) -> float:
    """Find s in [lo, hi] with k(s) = target (k nonincreasing), by log-bisection."""
    a, b = math.log(lo), math.log(hi)
    for _ in range(200):
        m = 0.5 * (a + b)
        if float(_k(spec, math.exp(m))) > target:
            a = m
        else:
            b = m
        if b - a < 1e-13:
            break
    return math.exp(0.5 * (a + b))


@lru_cache(maxsize=64)
def shot_noise_for(spec: SubordinatorSpec, budget: float = JUMP_BUDGET) -> ShotNoise:
    """Build the shot-noise description of an infinite-activity spec."""
    if isinstance(spec, (AlphaStable, SumStable, CompoundPoisson)):
        raise DomainError(f"{spec.variant} is sampled exactly, not by shot noise")
    if float(_k(spec, EPS_FLOOR)) <= budget:
        eps = EPS_FLOOR
    else:
        hi = 1.0
        while float(_k(spec, hi)) > budget:
            hi *= 2.0
        eps = _solve_level(spec, budget, EPS_FLOOR, hi)
    k_eps = float(_k(spec, eps))
    drift = max(float(kernel_integral(spec, eps)) - eps * k_eps, 0.0)
    # table upper end: where the tail has fallen by 1e-15, capped
    if isinstance(spec, TruncatedStable):
        s_max = spec.delta * (1.0 - 1e-12)
    elif float(_k(spec, SIZE_CAP)) > 1e-15 * k_eps:
        s_max = SIZE_CAP
    else:
        s_max = _solve_level(spec, 1e-15 * k_eps, eps, SIZE_CAP)
    s = np.exp(np.linspace(math.log(eps), math.log(s_max), 8000))
    lk = np.log(np.maximum(_k(spec, s), 1e-300))
    lk[0] = math.log(k_eps)
    lk = np.minimum.accumulate(lk)[::-1]  # increasing
    grid = np.linspace(lk[0], lk[-1], 16384)
    table = np.interp(grid, lk, np.log(s)[::-1])
    return ShotNoise(
        eps=eps,
        rate=k_eps,
        drift=drift,
        small_jump_variance=eps * drift,
        log_k_start=float(grid[0]),
        log_k_step=float(grid[1] - grid[0]),
        log_s_table=table,
        size_cap=float(s_max),
    )


# ---------------------------------------------------------------------------
# block first-passage kernels
# ---------------------------------------------------------------------------


def _round_generator(spec: SubordinatorSpec):
    """Return (draw(gen, m) -> (interarrivals, sizes), drift)."""
    if isinstance(spec, CompoundPoisson):
        rate, jumps = spec.rate, spec.jumps

        def draw(gen, m):
            dr = gen.standard_exponential((m, CPP_ROUND)) / rate
            return dr, np.asarray(jumps.sample(gen, (m, CPP_ROUND)), dtype=float)

        return draw, 0.0
    sn = shot_noise_for(spec)

    def draw(gen, m):
        dr = gen.standard_exponential((m, ROUND)) / sn.rate
        u = 1.0 - gen.random((m, ROUND))
        return dr, sn.sizes(u)

    return draw, sn.drift


def _passage_jump_process(spec, gen, m: int, ts: np.ndarray) -> np.ndarray:
    """inf{r : drift r + J(r) >= t} for every t in ``ts`` on ``m`` paths."""
    draw, drift = _round_generator(spec)
    nt = ts.size
    E = np.full((m, nt), np.nan)
    E[:, ts == 0.0] = 0.0
    r_prev = np.zeros(m)
    J_prev = np.zeros(m)
    for _ in range(MAX_ROUNDS):
        if not np.isnan(E).any():
            return E
        dr, sz = draw(gen, m)
        r = r_prev[:, None] + np.cumsum(dr, axis=1)
        J = J_prev[:, None] + np.cumsum(sz, axis=1)
        Jb = np.concatenate([J_prev[:, None], J[:, :-1]], axis=1)
        rb = np.concatenate([r_prev[:, None], r[:, :-1]], axis=1)
        for i, t in enumerate(ts):
            todo = np.flatnonzero(np.isnan(E[:, i]))
            if todo.size == 0:
                continue
            hit = drift * r[todo] + J[todo] >= t
            anyhit = hit.any(axis=1)
            rows = todo[anyhit]
            jj = hit[anyhit].argmax(axis=1)
            rj = r[rows, jj]
            Jbj = Jb[rows, jj]
            if drift > 0.0:
                # the level may be reached continuously before the jump
                by_drift = drift * rj + Jbj >= t
                cross = np.maximum((t - Jbj) / drift, rb[rows, jj])
                E[rows, i] = np.where(by_drift, cross, rj)
            else:
                E[rows, i] = rj
        r_prev, J_prev = r[:, -1], J[:, -1]
    raise HorizonExhaustedError(f"path did not reach level {ts.max():g} within {MAX_ROUNDS} rounds of jumps")


def _passage_stable(spec: AlphaStable, gen, m, ts):
    s1 = stable_unit(gen, spec.alpha, m)
    return (ts[None, :] / s1[:, None]) ** spec.alpha


def _passage_sum_stable(spec: SumStable, gen, m, ts):
    a = stable_unit(gen, spec.alpha, m)[:, None]
    b = stable_unit(gen, spec.beta, m)[:, None]
    ia, ib = 1.0 / spec.alpha, 1.0 / spec.beta
    tt = np.broadcast_to(ts[None, :], (m, ts.size))
    pos = tt > 0
    with np.errstate(divide="ignore"):
        lt = np.log(np.where(pos, tt, 1.0))
    # bracket in log r: each single term reaches t/2 at the lower end, t at the upper
    hi = np.minimum(spec.alpha * (lt - np.log(a)), spec.beta * (lt - np.log(b)))
    lo = np.minimum(spec.alpha * (lt - math.log(2.0) - np.log(a)), spec.beta * (lt - math.log(2.0) - np.log(b)))
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = np.exp(mid * ia) * a + np.exp(mid * ib) * b
        up = val >= tt
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
        if np.all(hi - lo < BISECT_TOL):
            break
    return np.where(pos, np.exp(hi), 0.0)


def _passage_block(spec, gen, m, ts):
    if isinstance(spec, AlphaStable):
        return _passage_stable(spec, gen, m, ts)
    if isinstance(spec, SumStable):
        return _passage_sum_stable(spec, gen, m, ts)
    return _passage_jump_process(spec, gen, m, ts)


def sample_inverse_batch(spec: SubordinatorSpec, t, n: int, seed: int) -> np.ndarray:
    """``n`` independent draws of ``E(t)``.

    ``t`` may be a scalar (result shape ``(n,)``) or a 1-d array of levels
    evaluated on the same paths (result shape ``(n, len(t))``).
    """
    seed = _rng.check_seed(seed)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if ts.ndim != 1 or np.any(~(ts >= 0)) or np.any(~np.isfinite(ts)):
        raise DomainError("levels t must be finite and >= 0")
    if n < 1:
        raise DomainError("n must be >= 1")
    out = np.empty((n, ts.size))
    for b, start, stop in _rng.block_ranges(n):
        gen = _rng.stream(seed, b)
        block = _passage_block(spec, gen, _rng.BLOCK_SIZE, ts)
        out[start:stop] = block[: stop - start]
    return out[:, 0] if np.ndim(t) == 0 else out


def sample_inverse(spec: SubordinatorSpec, t: float, rng_seed: int) -> float:
    """One draw of ``E(t) = inf{r : S(r) >= t}`` (``E(0) = 0``)."""
    return float(sample_inverse_batch(spec, float(t), 1, rng_seed)[0])


# ---------------------------------------------------------------------------
# paths
# ---------------------------------------------------------------------------


def sample_path(spec: SubordinatorSpec, T: float, h: float, rng_seed: int) -> PathSample:
    """Simulate ``S`` on ``[0, T]``.

    Grid-based families return values on ``r = 0, h, 2h, ...``; compound
    Poisson paths are returned at their exact jump times.
    """
    seed = _rng.check_seed(rng_seed)
    T, h = float(T), float(h)
    if not (T > 0 and h > 0):
        raise DomainError("T and h must be > 0")
    gen = _rng.stream(seed, 0)
    if isinstance(spec, CompoundPoisson):
        times, sizes = [], []
        r = 0.0
        while True:
            r += gen.standard_exponential() / spec.rate
            if r > T:
                break
            times.append(r)
            sizes.append(float(spec.jumps.sample(gen, 1)[0]))
        rr = np.concatenate([[0.0], times])
        SS = np.concatenate([[0.0], np.cumsum(sizes)])
        return PathSample(rr, SS, seed, exact_jump_times=True)
    n = int(math.ceil(T / h - 1e-12))
    grid = np.minimum(np.arange(n + 1) * h, T)
    dt = np.diff(grid)
    if isinstance(spec, AlphaStable):
        inc = dt ** (1.0 / spec.alpha) * stable_unit(gen, spec.alpha, n)
    elif isinstance(spec, SumStable):
        inc = dt ** (1.0 / spec.alpha) * stable_unit(gen, spec.alpha, n)
        inc = inc + dt ** (1.0 / spec.beta) * stable_unit(gen, spec.beta, n)
    elif spec.variant == "Gamma":
        inc = gen.gamma(spec.a * dt) / spec.b
    else:
        sn = shot_noise_for(spec)
        jt, js = [], []
        r = 0.0
        while r <= T:
            dr = gen.standard_exponential(ROUND) / sn.rate
            sz = sn.sizes(1.0 - gen.random(ROUND))
            rr = r + np.cumsum(dr)
            jt.append(rr)
            js.append(sz)
            r = rr[-1]
        jt, js = np.concatenate(jt), np.concatenate(js)
        keep = jt <= T
        cum = np.concatenate([[0.0], np.cumsum(js[keep])])
        idx = np.searchsorted(jt[keep], grid, side="right")
        return PathSample(grid, sn.drift * grid + cum[idx], seed)
    return PathSample(grid, np.concatenate([[0.0], np.cumsum(inc)]), seed)
