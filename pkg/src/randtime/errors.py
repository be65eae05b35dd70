"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class RandTimeError(Exception):
    """Base class for all errors raised by :mod:`randtime`."""


class DomainError(RandTimeError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedSpecError(RandTimeError, ValueError):
    """The requested operation is not defined for this subordinator family."""


class InversionOverflowError(RandTimeError, ArithmeticError):
    """Gaver-Stehfest weights times transform values left the float range."""


class NonFiniteError(RandTimeError, ArithmeticError):
    """A contour evaluation produced NaN or infinity."""


class HorizonExhaustedError(RandTimeError, RuntimeError):
    """A sampled path did not cross the requested level within the horizon."""


class GridTooCoarseError(RandTimeError, ValueError):
    """Fewer grid cells than the discretisation needs."""


class InsufficientPointsError(RandTimeError, ValueError):
    """Too few samples inside a fitting window."""


class NonPositiveValueError(RandTimeError, ValueError):
    """A logarithmic fit received a value that is not strictly positive."""


class QuadratureError(RandTimeError, ArithmeticError):
    """Adaptive quadrature could not reach the requested tolerance."""


class TruncationTooSmallError(RandTimeError, ValueError):
    """A series truncation leaves a tail larger than the requested tolerance."""


class NoFeasibleRateError(RandTimeError, ArithmeticError):
    """No positive exponential rate satisfies the moment constraint."""


class BlowUpError(RandTimeError, ArithmeticError):
    """A trajectory left the bounded region during integration."""


class NonConvergenceError(RandTimeError, ArithmeticError):
    """Successive refinements of a limit disagree beyond tolerance."""


class ConfigError(RandTimeError, ValueError):
    """A run configuration failed validation."""
