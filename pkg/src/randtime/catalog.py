"""Subordinator families and their analytic objects.

Every family exposes

* the Laplace exponent ``phi(lam)`` (a Bernstein function),
* the Levy tail ``k(t) = sigma((t, inf))``,
* the Laplace transform of the tail ``K(lam)`` with ``phi = lam * K``,
* the primitives ``K1(s) = int_0^s k`` and ``K2(s) = int_0^s K1``.

The private ``_phi``/``_K`` methods accept complex arrays with positive
real part so that contour-based Laplace inversion can use them.  The
module-level functions validate arguments and work on real inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from typing import Callable, ClassVar

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate
from scipy.special import gammainc, rgamma

from .errors import DomainError, UnsupportedSpecError
from .special import lower_gamma_complex, upper_gamma_complex, upper_incomplete_gamma_values

__all__ = [
    "JumpDist",
    "Exponential",
    "Pareto",
    "Deterministic",
    "SubordinatorSpec",
    "AlphaStable",
    "Gamma",
    "TruncatedStable",
    "SumStable",
    "ExpWeighted",
    "DistributedOrder",
    "CompoundPoisson",
    "HypothesisReport",
    "AsymptoticParams",
    "laplace_exponent",
    "kernel_k",
    "kernel_laplace_K",
    "kernel_integral",
    "kernel_double_integral",
    "check_hypotheses",
    "asymptotic_params",
    "spec_to_dict",
    "spec_from_dict",
    "spec_to_json",
    "spec_from_json",
    "default_catalog",
]


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (value > 0.0) or not math.isfinite(value):
        raise DomainError(f"{name} must be finite and > 0, got {value!r}")
    return value


def _unit_open(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 < value < 1.0):
        raise DomainError(f"{name} must lie in (0, 1), got {value!r}")
    return value


def _as_array(x) -> np.ndarray:
    return np.asarray(x, dtype=complex if np.iscomplexobj(x) else float)


def _ret(x, like):
    """Return a Python float for scalar input, an array otherwise."""
    if np.ndim(like) == 0:
        return complex(x) if np.iscomplexobj(x) else float(x)
    return x


# ---------------------------------------------------------------------------
# Jump distributions for compound Poisson subordinators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JumpDist:
    """Law of a positive jump size ``R``."""

    variant: ClassVar[str] = ""

    def params(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def tail(self, t):
        """``P(R >= t)``."""
        raise NotImplementedError

    def tail_laplace(self, s):
        """``int_0^inf e^{-s t} P(R >= t) dt`` (equals ``E[R]`` at s = 0)."""
        raise NotImplementedError

    def moment(self, q: float) -> float:
        """``E[R^q]`` (``inf`` when it does not exist)."""
        raise NotImplementedError

    def mgf(self, eta: float) -> float:
        """``E[e^{eta R}]`` (``inf`` when it does not exist)."""
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size) -> np.ndarray:
        raise NotImplementedError

    @property
    def mean(self) -> float:
        return self.moment(1.0)


@dataclass(frozen=True)
class Exponential(JumpDist):
    rate: float
    variant: ClassVar[str] = "Exponential"

    def __post_init__(self):
        object.__setattr__(self, "rate", _positive("rate", self.rate))

    def tail(self, t):
        t = np.asarray(t, dtype=float)
        return _ret(np.where(t <= 0, 1.0, np.exp(-self.rate * np.maximum(t, 0.0))), t)

    def tail_laplace(self, s):
        return 1.0 / (self.rate + _as_array(s))

    def moment(self, q):
        return math.gamma(1.0 + q) / self.rate**q

    def mgf(self, eta):
        return self.rate / (self.rate - eta) if eta < self.rate else math.inf

    def sample(self, rng, size):
        return rng.standard_exponential(size) / self.rate


@dataclass(frozen=True)
class Pareto(JumpDist):
    """Pareto law ``P(R > r) = (scale / r)^index`` for ``r >= scale``."""

    index: float
    scale: float
    variant: ClassVar[str] = "Pareto"

    def __post_init__(self):
        object.__setattr__(self, "index", _positive("index", self.index))
        object.__setattr__(self, "scale", _positive("scale", self.scale))

    def tail(self, t):
        t = np.asarray(t, dtype=float)
        with np.errstate(divide="ignore"):
            v = np.where(t <= self.scale, 1.0, (self.scale / np.maximum(t, self.scale)) ** self.index)
        return _ret(v, t)

    def tail_laplace(self, s):
        s = _as_array(s)
        a, xm = self.index, self.scale
        out = np.empty(s.shape, dtype=np.result_type(s, float))
        flat, res = s.ravel(), out.reshape(-1)
        zero = flat == 0
        if np.any(zero):
            res[zero] = xm * a / (a - 1.0) if a > 1 else math.inf
        nz = ~zero
        if np.any(nz):
            sz = flat[nz]
            z = sz * xm
            head = -np.expm1(-z) / sz
            if np.iscomplexobj(sz):
                ug = upper_gamma_complex(1.0 - a, z)
            else:
                ug = upper_incomplete_gamma_values(1.0 - a, z)
            res[nz] = head + xm**a * sz ** (a - 1.0) * ug
        return out

    def moment(self, q):
        return self.index * self.scale**q / (self.index - q) if q < self.index else math.inf

    def mgf(self, eta):
        return 1.0 if eta == 0 else math.inf

    def sample(self, rng, size):
        u = 1.0 - rng.random(size)
        return self.scale * u ** (-1.0 / self.index)


@dataclass(frozen=True)
class Deterministic(JumpDist):
    r: float
    variant: ClassVar[str] = "Deterministic"

    def __post_init__(self):
        object.__setattr__(self, "r", _positive("r", self.r))

    def tail(self, t):
        t = np.asarray(t, dtype=float)
        return _ret(np.where(t <= self.r, 1.0, 0.0), t)

    def tail_laplace(self, s):
        s = _as_array(s)
        z = s * self.r
        with np.errstate(invalid="ignore", divide="ignore"):
            v = -np.expm1(-z) / s
        return np.where(s == 0, self.r, v)

    def moment(self, q):
        return self.r**q

    def mgf(self, eta):
        return math.exp(eta * self.r)

    def sample(self, rng, size):
        return np.full(size, self.r)


_JUMPS = {c.variant: c for c in (Exponential, Pareto, Deterministic)}


# ---------------------------------------------------------------------------
# Subordinator families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubordinatorSpec:
    """Immutable description of a subordinator family with parameters."""

    variant: ClassVar[str] = ""

    def params(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self) if not isinstance(getattr(self, f.name), JumpDist)}

    # complex-capable closed forms; subclasses override
    def _phi(self, lam):
        return lam * self._K(lam)

    def _K(self, lam):
        raise NotImplementedError

    def _k(self, t: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _K1(self, s: np.ndarray) -> np.ndarray:
        return np.array([integrate.quad(lambda u: float(self._k(np.array([u]))[0]), 0.0, si, limit=200)[0] for si in s.ravel()]).reshape(s.shape)

    def _K2(self, s: np.ndarray) -> np.ndarray:
        return np.array(
            [integrate.quad(lambda u: float(self._K1(np.array([u]))[0]), 0.0, si, limit=200)[0] for si in s.ravel()]
        ).reshape(s.shape)

    @property
    def K_at_zero(self) -> float:
        """``lim_{lam -> 0} K(lam) = int_0^inf k`` (``inf`` if divergent)."""
        return math.inf

    def label(self) -> str:
        inner = ", ".join(f"{k}={v:g}" for k, v in self.params().items())
        return f"{self.variant}({inner})"


@dataclass(frozen=True)
class AlphaStable(SubordinatorSpec):
    alpha: float
    variant: ClassVar[str] = "AlphaStable"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _unit_open("alpha", self.alpha))

    def _phi(self, lam):
        return lam**self.alpha

    def _K(self, lam):
        return lam ** (self.alpha - 1.0)

    def _k(self, t):
        return t ** (-self.alpha) * rgamma(1.0 - self.alpha)

    def _K1(self, s):
        return s ** (1.0 - self.alpha) * rgamma(2.0 - self.alpha)

    def _K2(self, s):
        return s ** (2.0 - self.alpha) * rgamma(3.0 - self.alpha)


@dataclass(frozen=True)
class Gamma(SubordinatorSpec):
    a: float
    b: float
    variant: ClassVar[str] = "Gamma"

    def __post_init__(self):
        object.__setattr__(self, "a", _positive("a", self.a))
        object.__setattr__(self, "b", _positive("b", self.b))

    def _phi(self, lam):
        return self.a * np.log1p(lam / self.b)

    def _K(self, lam):
        x = lam / self.b
        small = np.abs(x) < 1e-8
        xs = np.where(small, 1.0, x)
        ratio = np.where(small, 1.0 - x / 2.0 + x * x / 3.0, np.log1p(xs) / xs)
        return self.a / self.b * ratio

    def _k(self, t):
        return self.a * upper_incomplete_gamma_values(0.0, self.b * t)

    def _K1(self, s):
        bs = self.b * s
        return self.a * (s * upper_incomplete_gamma_values(0.0, bs) - np.expm1(-bs) / self.b)

    def _K2(self, s):
        b, bs = self.b, self.b * s
        e1 = upper_incomplete_gamma_values(0.0, bs)
        part1 = 0.5 * s * s * e1 + (1.0 - np.exp(-bs) * (1.0 + bs)) / (2.0 * b * b)
        part2 = s / b + np.expm1(-bs) / (b * b)
        return self.a * (part1 + part2)

    @property
    def K_at_zero(self):
        return self.a / self.b


@dataclass(frozen=True)
class TruncatedStable(SubordinatorSpec):
    """Stable Levy density restricted to jumps of size at most ``delta``."""

    alpha: float
    delta: float
    variant: ClassVar[str] = "TruncatedStable"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _unit_open("alpha", self.alpha))
        object.__setattr__(self, "delta", _positive("delta", self.delta))

    def _K(self, lam):
        al, d = self.alpha, self.delta
        lam = np.asarray(lam, dtype=complex)
        z = d * lam
        # int_0^delta e^{-lam s} s^{-alpha} ds = lam^{alpha-1} gamma(1-alpha, delta lam)
        small = np.abs(z) < 1e-6
        zs = np.where(small, 1.0, z)
        lam_s = np.where(small, 1.0, lam)
        head = np.where(small, d ** (1 - al) * (1 / (1 - al) - z / (2 - al)), lam_s ** (al - 1.0) * lower_gamma_complex(1.0 - al, zs))
        tail = np.where(small, d ** (1 - al) * (1.0 - z / 2.0), -(d**-al) * np.expm1(-zs) / lam_s)
        return (head - tail) * rgamma(1.0 - al)

    def _k(self, t):
        al, d = self.alpha, self.delta
        tt = np.minimum(t, d)
        return np.where(t < d, (tt ** (-al) - d ** (-al)) * rgamma(1.0 - al), 0.0)

    def _K1(self, s):
        al, d = self.alpha, self.delta
        m = np.minimum(s, d)
        return (m ** (1 - al) / (1 - al) - d ** (-al) * m) * rgamma(1.0 - al)

    def _K2(self, s):
        al, d = self.alpha, self.delta
        m = np.minimum(s, d)
        inner = (m ** (2 - al) / ((1 - al) * (2 - al)) - d ** (-al) * m * m / 2) * rgamma(1.0 - al)
        return inner + np.maximum(s - d, 0.0) * self._K1(np.asarray(d))

    @property
    def K_at_zero(self):
        return self.alpha * self.delta ** (1 - self.alpha) * float(rgamma(2.0 - self.alpha))

    def phi_closed_form(self, lam):
        """Exponent from the incomplete-gamma closed form (real ``lam`` > 0).

        ``lam^a (1 - Gamma(-a, delta lam) / Gamma(-a)) - delta^-a / Gamma(1-a)``.
        Kept as an independent cross-check of ``lam * K(lam)``.
        """
        al, d = self.alpha, self.delta
        lam = np.asarray(lam, dtype=float)
        ug = upper_incomplete_gamma_values(-al, d * lam)
        return lam**al * (1.0 - ug / math.gamma(-al)) - d ** (-al) * float(rgamma(1.0 - al))


@dataclass(frozen=True)
class SumStable(SubordinatorSpec):
    alpha: float
    beta: float
    variant: ClassVar[str] = "SumStable"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _unit_open("alpha", self.alpha))
        object.__setattr__(self, "beta", _unit_open("beta", self.beta))
        if not self.alpha < self.beta:
            raise DomainError(f"SumStable needs alpha < beta, got {self.alpha} >= {self.beta}")

    def _phi(self, lam):
        return lam**self.alpha + lam**self.beta

    def _K(self, lam):
        return lam ** (self.alpha - 1.0) + lam ** (self.beta - 1.0)

    def _k(self, t):
        return t ** (-self.alpha) * rgamma(1.0 - self.alpha) + t ** (-self.beta) * rgamma(1.0 - self.beta)

    def _K1(self, s):
        return s ** (1.0 - self.alpha) * rgamma(2.0 - self.alpha) + s ** (1.0 - self.beta) * rgamma(2.0 - self.beta)

    def _K2(self, s):
        return s ** (2.0 - self.alpha) * rgamma(3.0 - self.alpha) + s ** (2.0 - self.beta) * rgamma(3.0 - self.beta)

    def components(self) -> tuple[AlphaStable, AlphaStable]:
        return AlphaStable(self.alpha), AlphaStable(self.beta)


@dataclass(frozen=True)
class ExpWeighted(SubordinatorSpec):
    """Stable tail damped by ``exp(-gamma t)``; ``gamma = 0`` is the stable case."""

    alpha: float
    gamma: float
    variant: ClassVar[str] = "ExpWeighted"

    def __post_init__(self):
        object.__setattr__(self, "alpha", _unit_open("alpha", self.alpha))
        g = float(self.gamma)
        if not (g >= 0.0) or not math.isfinite(g):
            raise DomainError(f"gamma must be finite and >= 0, got {g!r}")
        object.__setattr__(self, "gamma", g)

    def _K(self, lam):
        return (lam + self.gamma) ** (self.alpha - 1.0)

    def _phi(self, lam):
        return lam * (lam + self.gamma) ** (self.alpha - 1.0)

    def _k(self, t):
        return t ** (-self.alpha) * np.exp(-self.gamma * t) * rgamma(1.0 - self.alpha)

    def _K1(self, s):
        al, g = self.alpha, self.gamma
        if g == 0.0:
            return s ** (1.0 - al) * rgamma(2.0 - al)
        return g ** (al - 1.0) * gammainc(1.0 - al, g * s)

    def _K2(self, s):
        al, g = self.alpha, self.gamma
        if g == 0.0:
            return s ** (2.0 - al) * rgamma(3.0 - al)
        # int_0^s K1 = s K1(s) - int_0^s u k(u) du
        return s * self._K1(s) - (1.0 - al) * g ** (al - 2.0) * gammainc(2.0 - al, g * s)

    @property
    def K_at_zero(self):
        return self.gamma ** (self.alpha - 1.0) if self.gamma > 0 else math.inf


_DO_NODES, _DO_WEIGHTS = leggauss(96)
_DO_BETA = 0.5 * (_DO_NODES + 1.0)
_DO_W = 0.5 * _DO_WEIGHTS


@dataclass(frozen=True)
class DistributedOrder(SubordinatorSpec):
    """Uniform mixture of stable tails over the order in (0, 1)."""

    variant: ClassVar[str] = "DistributedOrder"

    def _K(self, lam):
        lam = np.asarray(lam)
        w = lam - 1.0
        near = np.abs(w) < 1e-3
        lam_s = np.where(near, 2.0, lam)
        # log(lam)/(lam-1) = 1 - w/2 + w^2/3 - ... near lam = 1
        series = 1.0 - w / 2 + w**2 / 3 - w**3 / 4 + w**4 / 5 - w**5 / 6
        return np.where(near, 1.0 / (lam * series), (lam_s - 1.0) / (lam_s * np.log(lam_s)))

    def _k(self, t):
        t = np.asarray(t, dtype=float)
        lt = np.log(t)[..., None]
        return (np.exp((_DO_BETA - 1.0) * lt) * rgamma(_DO_BETA)) @ _DO_W

    def _K1(self, s):
        ls = np.log(np.asarray(s, dtype=float))[..., None]
        return (np.exp(_DO_BETA * ls) * rgamma(_DO_BETA + 1.0)) @ _DO_W

    def _K2(self, s):
        ls = np.log(np.asarray(s, dtype=float))[..., None]
        return (np.exp((_DO_BETA + 1.0) * ls) * rgamma(_DO_BETA + 2.0)) @ _DO_W


@dataclass(frozen=True)
class CompoundPoisson(SubordinatorSpec):
    rate: float
    jumps: JumpDist = field(default_factory=lambda: Exponential(1.0))
    variant: ClassVar[str] = "CompoundPoisson"

    def __post_init__(self):
        object.__setattr__(self, "rate", _positive("rate", self.rate))
        if not isinstance(self.jumps, JumpDist):
            raise DomainError("jumps must be a JumpDist")

    def _K(self, lam):
        return self.rate * self.jumps.tail_laplace(lam)

    def _phi(self, lam):
        return lam * self._K(lam)

    def _k(self, t):
        return self.rate * np.asarray(self.jumps.tail(t), dtype=float)

    @property
    def K_at_zero(self):
        return self.rate * self.jumps.mean

    def label(self) -> str:
        jp = ", ".join(f"{k}={v:g}" for k, v in self.jumps.params().items())
        return f"CompoundPoisson(rate={self.rate:g}, {self.jumps.variant}({jp}))"


_VARIANTS: dict[str, type[SubordinatorSpec]] = {
    c.variant: c for c in (AlphaStable, Gamma, TruncatedStable, SumStable, ExpWeighted, DistributedOrder, CompoundPoisson)
}


# ---------------------------------------------------------------------------
# Public evaluation functions
# ---------------------------------------------------------------------------


def _real_positive(name: str, x, allow_zero: bool = False) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    bad = ~(arr >= 0.0) if allow_zero else ~(arr > 0.0)
    if np.any(bad) or np.any(~np.isfinite(arr)):
        raise DomainError(f"{name} must be {'>= 0' if allow_zero else '> 0'} and finite")
    return arr


def laplace_exponent(spec: SubordinatorSpec, lam):
    """Laplace exponent ``phi(lam)`` for real ``lam > 0``.

    For compound Poisson specs ``lam = 0`` is also accepted (``phi(0) = 0``).
    """
    arr = _real_positive("lambda", lam, allow_zero=isinstance(spec, CompoundPoisson))
    with np.errstate(invalid="ignore", divide="ignore"):
        v = np.real(spec._phi(arr))
    v = np.where(arr == 0.0, 0.0, v)
    return _ret(v, lam)


def kernel_laplace_K(spec: SubordinatorSpec, lam):
    """Laplace transform ``K(lam)`` of the Levy tail, ``lam > 0``."""
    arr = _real_positive("lambda", lam)
    return _ret(np.real(spec._K(arr)), lam)


def kernel_k(spec: SubordinatorSpec, t):
    """Levy tail ``k(t) = sigma((t, inf))`` for ``t > 0``."""
    arr = _real_positive("t", t)
    return _ret(np.asarray(spec._k(arr), dtype=float), t)


def kernel_integral(spec: SubordinatorSpec, s):
    """``K1(s) = int_0^s k(u) du`` for ``s >= 0``."""
    arr = _real_positive("s", s, allow_zero=True)
    out = np.zeros(arr.shape)
    pos = arr > 0
    if np.any(pos):
        out[pos] = spec._K1(arr[pos])
    return _ret(out, s)


def kernel_double_integral(spec: SubordinatorSpec, s):
    """``K2(s) = int_0^s (s - u) k(u) du`` for ``s >= 0``."""
    arr = _real_positive("s", s, allow_zero=True)
    out = np.zeros(arr.shape)
    pos = arr > 0
    if np.any(pos):
        out[pos] = spec._K2(arr[pos])
    return _ret(out, s)


# ---------------------------------------------------------------------------
# Hypothesis probing
# ---------------------------------------------------------------------------

PROBE_EXPONENTS = tuple(range(1, 9))
#: magnitude beyond which a trend is accepted as divergence / vanishing
LIMIT_THRESHOLD = 1e3
#: successive log-increments must not shrink faster than this ratio
TREND_RATIO = 0.5


def _limit_holds(values: list[float], direction: str) -> bool:
    """Decide ``values -> inf`` (``direction='inf'``) or ``-> 0`` ('zero').

    The last three probes must move monotonically in the required
    direction and either pass the magnitude threshold or keep moving with
    log-increments that do not decay geometrically (a geometric decay of
    the increments signals a finite limit).
    """
    v = np.asarray(values[-4:], dtype=float)
    if np.any(~np.isfinite(v)) or np.any(v <= 0):
        return False
    lv = np.log(v)
    d = np.diff(lv)
    if direction == "inf":
        if not np.all(d > 0):
            return False
        if v[-1] >= LIMIT_THRESHOLD:
            return True
    else:
        if not np.all(d < 0):
            return False
        if v[-1] <= 1.0 / LIMIT_THRESHOLD:
            return True
    ratios = d[1:] / d[:-1]
    return bool(np.all(ratios >= TREND_RATIO))


@dataclass(frozen=True)
class HypothesisReport:
    """Outcome of probing the four limit conditions on ``K`` and ``phi``."""

    spec_label: str
    K_to_inf_at_zero: bool
    K_to_zero_at_inf: bool
    phi_to_zero_at_zero: bool
    phi_to_inf_at_inf: bool
    probes: dict[str, list[float]]

    @property
    def all_hold(self) -> bool:
        return self.K_to_inf_at_zero and self.K_to_zero_at_inf and self.phi_to_zero_at_zero and self.phi_to_inf_at_inf

    def failing(self) -> list[str]:
        names = {
            "K_to_inf_at_zero": "K(lam) -> inf as lam -> 0",
            "K_to_zero_at_inf": "K(lam) -> 0 as lam -> inf",
            "phi_to_zero_at_zero": "phi(lam) -> 0 as lam -> 0",
            "phi_to_inf_at_inf": "phi(lam) -> inf as lam -> inf",
        }
        return [txt for key, txt in names.items() if not getattr(self, key)]


def check_hypotheses(spec: SubordinatorSpec) -> HypothesisReport:
    """Probe ``K`` and ``phi`` at ``10^-k`` and ``10^k`` (k = 1..8).  Never raises."""
    small = [10.0 ** (-k) for k in PROBE_EXPONENTS]
    large = [10.0**k for k in PROBE_EXPONENTS]
    try:
        with np.errstate(all="ignore"):
            Ks = [float(np.real(spec._K(np.array(x)))) for x in small]
            Kl = [float(np.real(spec._K(np.array(x)))) for x in large]
            Ps = [float(np.real(spec._phi(np.array(x)))) for x in small]
            Pl = [float(np.real(spec._phi(np.array(x)))) for x in large]
    except Exception:  # report, never throw
        nan = [math.nan] * len(small)
        Ks = Kl = Ps = Pl = nan
    return HypothesisReport(
        spec_label=spec.label(),
        K_to_inf_at_zero=_limit_holds(Ks, "inf"),
        K_to_zero_at_inf=_limit_holds(Kl, "zero"),
        phi_to_zero_at_zero=_limit_holds(Ps, "zero"),
        phi_to_inf_at_inf=_limit_holds(Pl, "inf"),
        probes={"K_small": Ks, "K_large": Kl, "phi_small": Ps, "phi_large": Pl},
    )


# ---------------------------------------------------------------------------
# Asymptotic parameters  K(lam) ~ lam^-gamma Q(1/lam) as lam -> 0
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticParams:
    """Regular-variation data of ``K`` at the origin."""

    gamma: float
    Q: Callable[[float], float]
    description: str

    def __call__(self, t):
        return self.Q(t)


def _const(c: float) -> Callable:
    def q(t):
        return c * np.ones_like(np.asarray(t, dtype=float)) if np.ndim(t) else c

    return q


def asymptotic_params(spec: SubordinatorSpec) -> AsymptoticParams:
    """Index ``gamma`` and slowly varying ``Q`` with ``K(lam) ~ lam^-gamma Q(1/lam)``."""
    if isinstance(spec, CompoundPoisson):
        raise UnsupportedSpecError("compound Poisson subordinators have bounded phi; no regular-variation data")
    if isinstance(spec, AlphaStable):
        return AsymptoticParams(1.0 - spec.alpha, _const(1.0), "Q = 1")
    if isinstance(spec, SumStable):
        d = spec.alpha - spec.beta
        return AsymptoticParams(1.0 - spec.alpha, lambda t: 1.0 + np.asarray(t, dtype=float) ** d, f"Q(t) = 1 + t^{d:g}")
    if isinstance(spec, DistributedOrder):
        return AsymptoticParams(1.0, lambda t: 1.0 / np.log(t), "Q(t) = 1/log t")
    if isinstance(spec, ExpWeighted) and spec.gamma == 0.0:
        return AsymptoticParams(1.0 - spec.alpha, _const(1.0), "Q = 1")
    if isinstance(spec, (Gamma, TruncatedStable, ExpWeighted)):
        c = spec.K_at_zero
        return AsymptoticParams(0.0, _const(c), f"Q = {c:.6g} (finite K(0); degenerate)")
    raise UnsupportedSpecError(f"no asymptotic data for {spec.variant}")


# ---------------------------------------------------------------------------
# Serialisation
# ---------------------------------------------------------------------------


def spec_to_dict(spec: SubordinatorSpec) -> dict:
    out: dict = {"variant": spec.variant, "params": dict(spec.params())}
    if isinstance(spec, CompoundPoisson):
        out["jumps"] = {"variant": spec.jumps.variant, "params": spec.jumps.params()}
    return out


def spec_from_dict(d: dict) -> SubordinatorSpec:
    try:
        variant = d["variant"]
        params = dict(d.get("params", {}))
    except (TypeError, KeyError) as exc:
        raise DomainError(f"malformed spec object: {d!r}") from exc
    cls = _VARIANTS.get(variant)
    if cls is None:
        raise DomainError(f"unknown subordinator variant {variant!r}")
    if cls is CompoundPoisson:
        jd = d.get("jumps")
        if not isinstance(jd, dict) or jd.get("variant") not in _JUMPS:
            raise DomainError("CompoundPoisson spec needs a 'jumps' object with a known variant")
        try:
            params["jumps"] = _JUMPS[jd["variant"]](**jd.get("params", {}))
        except TypeError as exc:
            raise DomainError(f"bad jump parameters: {exc}") from exc
    try:
        return cls(**params)
    except TypeError as exc:
        raise DomainError(f"bad parameters for {variant}: {exc}") from exc


def spec_to_json(spec: SubordinatorSpec) -> str:
    return json.dumps(spec_to_dict(spec), sort_keys=True)


def spec_from_json(text: str) -> SubordinatorSpec:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"spec is not valid JSON: {exc}") from exc
    return spec_from_dict(d)


def default_catalog() -> list[SubordinatorSpec]:
    """One representative instance per family."""
    return [
        AlphaStable(0.5),
        Gamma(1.0, 1.0),
        TruncatedStable(0.5, 1.0),
        SumStable(0.3, 0.7),
        ExpWeighted(0.5, 1.0),
        DistributedOrder(),
        CompoundPoisson(1.0, Exponential(1.0)),
    ]
