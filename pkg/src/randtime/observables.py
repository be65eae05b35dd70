"""Named observables ``f: R^d -> R`` addressable by string.

Each observable acts on arrays of points with the coordinate on the last
axis and returns an array with that axis removed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError

__all__ = ["Observable", "parse_observable", "OBSERVABLE_NAMES"]

OBSERVABLE_NAMES = ("exp-abs:a", "exp-power:a,beta", "identity", "holder-power:C,beta")


@dataclass(frozen=True)
class Observable:
    """Observable with optional Hoelder certificate ``|f(x)-f(y)| <= C |x-y|^beta``."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    holder: Optional[tuple[float, float]] = None
    bound: Optional[float] = None

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim == 0:
            x = x[None]
        return self.fn(x)


def _norm(x: np.ndarray) -> np.ndarray:
    return np.abs(x[..., 0]) if x.shape[-1] == 1 else np.linalg.norm(x, axis=-1)


def _floats(text: str, n: int, name: str) -> list[float]:
    parts = [p for p in text.split(",") if p]
    if len(parts) != n:
        raise DomainError(f"observable {name!r} expects {n} parameter(s), got {text!r}")
    try:
        vals = [float(p) for p in parts]
    except ValueError as exc:
        raise DomainError(f"bad parameters for observable {name!r}: {text!r}") from exc
    if not all(math.isfinite(v) for v in vals):
        raise DomainError(f"observable {name!r} parameters must be finite")
    return vals


def parse_observable(name: str) -> Observable:
    """Build an observable from ``exp-abs:a``, ``exp-power:a,beta``,
    ``identity`` or ``holder-power:C,beta``.

    ``holder-power`` is ``C min(|x|, 1)^beta``, bounded by ``C``.
    """
    kind, _, rest = name.partition(":")
    if kind == "exp-abs":
        (a,) = _floats(rest, 1, kind)
        if a < 0:
            raise DomainError("exp-abs needs a >= 0")
        return Observable(name, lambda x: np.exp(-a * _norm(x)), holder=(a, 1.0), bound=1.0)
    if kind == "exp-power":
        a, beta = _floats(rest, 2, kind)
        if a < 0 or not (0 < beta <= 1):
            raise DomainError("exp-power needs a >= 0 and beta in (0, 1]")
        return Observable(name, lambda x: np.exp(-a * _norm(x) ** beta), holder=(a, beta), bound=1.0)
    if kind == "identity":
        if rest:
            raise DomainError("identity takes no parameters")
        return Observable(name, lambda x: x[..., 0].copy(), holder=(1.0, 1.0))
    if kind == "holder-power":
        C, beta = _floats(rest, 2, kind)
        if C <= 0 or not (0 < beta <= 1):
            raise DomainError("holder-power needs C > 0 and beta in (0, 1]")
        return Observable(name, lambda x: C * np.minimum(_norm(x), 1.0) ** beta, holder=(C, beta), bound=C)
    raise DomainError(f"unknown observable {name!r}")
